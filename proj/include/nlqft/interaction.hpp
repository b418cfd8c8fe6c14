#pragma once

#include <array>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace nlqft {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPiCubed = 8.0 * kPi * kPi * kPi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double norm2(const Vec3& p) { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2]; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

struct Dispersion {
    std::function<double(const Vec3&)> omega;
    double mass = 1.0;
    double operator()(const Vec3& p) const { return omega(p); }
};

Dispersion make_relativistic_dispersion(double mass);

// F_{(l',l)}(out momenta; in momenta): l' creators, l annihilators.
using KernelFn = std::function<cplx(const std::vector<Vec3>& out, const std::vector<Vec3>& in)>;

struct InteractionSpec {
    std::string name;
    Dispersion dispersion;
    std::map<std::pair<int, int>, KernelFn> kernels;  // key (l', l)
    int max_legs = 0;
    double volume_factor = kTwoPiCubed;  // stand-in for (2 pi)^3 in field normalizations

    bool has(int lp, int l) const { return kernels.count({lp, l}) != 0; }
    cplx kernel(int lp, int l, const std::vector<Vec3>& out, const std::vector<Vec3>& in) const;
    std::vector<int> valences() const;
    // sqrt(volume_factor * 2 omega(p)), the per-leg field normalization.
    double leg_norm(const Vec3& p) const;
};

struct PresetParams {
    double mass = 1.0;
    double ell = 1.0;      // smearing length
    double coupling = 1.0; // overall constant in front of the kernels
    int legs = 3;          // only used by quantum-wick-product
    double volume_factor = kTwoPiCubed;
};

// gaussian-phi3, gaussian-phi4, quantum-wick-product.
InteractionSpec preset_interaction(const std::string& name, const PresetParams& params);

InteractionSpec empty_interaction(double mass);

// Sign-indexed form factor; alpha[j] = +1 for a creator leg, -1 for an annihilator leg.
struct FormFactor {
    std::vector<int> alpha;
    std::function<cplx(const std::vector<Vec3>&)> eval;
    cplx operator()(const std::vector<Vec3>& k) const { return eval(k); }
};

FormFactor form_factor_from_kernels(const InteractionSpec& spec, const std::vector<int>& alpha);

// Inverse conversion: recovers F_{(l',l)}(out; in) from the (+...+,-...-) form factor.
cplx kernel_from_form_factor(const InteractionSpec& spec, const FormFactor& ff, const std::vector<Vec3>& out,
                             const std::vector<Vec3>& in);

// Band-limited temporal cut-off. hhat(w) = e * exp(-1/(1-(w/Delta)^2)) on (-Delta, Delta),
// h(t) = (1/2pi) int hhat(w) exp(-i w t) dw, so that int h = hhat(0) = 1.
class TemporalCutoff {
public:
    explicit TemporalCutoff(double delta);
    double delta() const { return delta_; }
    double hhat(double w) const;
    double h(double t) const;
    // Gauss-Legendre nodes and weights covering [-Delta, Delta], weights already multiplied by hhat/(2 pi).
    const std::vector<double>& spectral_nodes() const { return nodes_; }
    const std::vector<double>& spectral_weights() const { return weights_; }

private:
    double delta_;
    std::vector<double> nodes_, weights_;
};

// Separable space-time profile lambda~(k, t) = G(k) chi(t), G with unit integral, chi(0) = 1.
struct CutoffProfile {
    std::string name;
    double sigma_k = 1.0;  // Gaussian width of G
    double sigma_t = 1.0;  // time scale of chi
    enum class Time { Gaussian, Sech } time = Time::Gaussian;
    double L = 1.0;        // adiabatic scale

    double spatial(const Vec3& k) const;      // L^3 G(k L)
    double temporal(double t) const;          // chi(t / L)
    double temporal_ft(double w) const;       // int chi(t/L) e^{i w t} dt
    double value(const Vec3& k, double t) const { return spatial(k) * temporal(t); }
    // Spatial Gaussian width after scaling.
    double spatial_width() const { return sigma_k / L; }
    CutoffProfile scaled(double L_new) const;
};

CutoffProfile gaussian_profile(double sigma_k, double sigma_t);
CutoffProfile sech_profile(double sigma_k, double sigma_t);

// Time profile of a vertex after convolution with h: (chi * h)(t), evaluated spectrally.
double convolved_temporal(const CutoffProfile& prof, const TemporalCutoff& h, double t);

}  // namespace nlqft
