#pragma once

#include "nlqft/interaction.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlqft {

// Thrown for anything wrong with the run configuration; field is a dotted path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::runtime_error("config field '" + field + "': " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ExternalPoint {
    std::vector<double> times;
    std::vector<Vec3> momenta;      // adiabatic mode
    std::vector<int> grid_momenta;  // grid mode, indices into the oracle grid
};

struct RunConfig {
    // model
    std::string preset = "gaussian-phi3";
    double mass = 1.0;
    double ell = 1.0;
    double coupling = 1.0;
    int legs = 3;
    double volume_factor = kTwoPiCubed;

    int order = 0;                  // maximal number of internal vertices
    std::string kind = "wightman";  // wightman | green
    std::string mode = "grid";      // grid | adiabatic
    int n = 2;
    std::vector<int> alpha;         // empty: every sign vector (graphs, green)
    std::vector<ExternalPoint> points;

    // cut-off
    double delta = 0.0;             // band limit of h; 0 means no temporal band limit requested
    std::string profile = "gaussian";
    double sigma_k = 0.3;
    double sigma_t = 3.0;
    std::vector<double> Ls{1.0};

    // quadrature budget
    int gh_order = 12;
    double rel_tol = 1e-9;

    // oracle grid
    int grid_half = 1;
    double grid_dp = 0.7;
    int nmax = 4;
    long max_dim = 20000;
    int panels = 48;
    std::optional<double> oracle_volume_factor;  // defaults to the model's

    // scan request (V = 1 tree, last momentum smeared)
    int scan_slot = 0;
    std::vector<double> scan_times;
    std::vector<Vec3> scan_momenta;
    Vec3 f_center{0, 0, 0};
    double f_width = 0.3;

    std::uint64_t seed = 0;
    int threads = 1;

    PresetParams preset_params() const;
    CutoffProfile cutoff_profile() const;
};

// Parses and validates; throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Canonical text of the configuration after defaults are filled in (used for run ids).
std::string canonical_config(const RunConfig& c);

// Number of Fock basis states with at most nmax particles on G momenta.
long fock_dimension(int grid_points, int nmax);

}  // namespace nlqft
