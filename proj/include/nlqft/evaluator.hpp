#pragma once

#include "nlqft/fock.hpp"
#include "nlqft/graphs.hpp"
#include "nlqft/routing.hpp"
#include "nlqft/timefactors.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nlqft {

struct GraphContribution {
    int order = 0;
    int index = 0;  // position in the deterministic enumeration at that order
    std::string key;
    cplx value = 0.0;
    double err = 0.0;
};

struct CorrelatorResult {
    std::vector<cplx> value;  // coefficient of g^k
    std::vector<double> err;
    std::vector<GraphContribution> graphs;
    std::string convention;
};

// ---------------------------------------------------------------------------------------
// Cut-off mode on a momentum grid (the oracle's discretization). Internal line momenta are
// summed over the grid with weight dv, external momenta are grid indices, delta^3 between two
// external fields becomes Kronecker/dv. Vertex time profile chi(t), spatial cut-off G(kappa).

struct GridModel {
    const InteractionSpec* spec = nullptr;
    const MomentumGrid* grid = nullptr;
    std::function<double(const Vec3&)> spatial;
    std::function<double(double)> temporal;
    double rel_tol = 1e-10;
    int threads = 1;
};

struct GridPoint {
    std::vector<int> alpha;      // operator order, leftmost first
    std::vector<double> times;
    std::vector<int> momenta;    // grid indices
};

// Contribution of one totally ordered graph, symmetry factor and (-i)^V included.
TimeValue evaluate_graph_grid(const FeynmanGraph& g, const GridPoint& pt, const GridModel& m);

// Sum over the graphs of orders 0..max_order. include_vacuum admits vacuum components
// (the unnormalized numerator); otherwise the result is already the normalized correlator.
CorrelatorResult correlator_grid(const GridPoint& pt, int max_order, const GridModel& m, bool include_vacuum = false);

struct VacuumFactorization {
    std::vector<cplx> full, nonvac, vac, product;
    std::vector<double> rel_gap;
};
// full_k against sum_j nonvac_j vac_{k-j}
VacuumFactorization vacuum_factorization(const GridPoint& pt, int max_order, const GridModel& m);

// ---------------------------------------------------------------------------------------
// Adiabatic limit. Momentum deltas are resolved by the routing; values are densities with
// respect to the remaining delta^3(sum of external momenta). Loop momenta use a product
// Gauss-Hermite rule.

struct AdiabaticModel {
    const InteractionSpec* spec = nullptr;
    int gh_order = 16;
    double gh_scale = 0.0;  // 0: derived from the smearing length
    double ell = 1.0;       // smearing length used for the default scale
    int threads = 1;
    double scale() const;
};

// All connected totally ordered graphs with n externals and V internal vertices, for every
// sign vector, with their routings. Externals are labeled by operator position.
class GraphSet {
public:
    struct Entry {
        FeynmanGraph graph;
        MomentumRouting routing;
        std::vector<int> alpha;
    };
    // completion_seed is handed to build_routing; values do not depend on it
    GraphSet(const InteractionSpec& spec, int n, int V, std::uint64_t completion_seed = 0);
    int n() const { return n_; }
    int V() const { return V_; }
    const std::vector<std::unique_ptr<Entry>>& entries() const { return entries_; }

private:
    int n_, V_;
    std::vector<std::unique_ptr<Entry>> entries_;
};

// Per-edge kinematics of a totally ordered graph at routing variables x.
struct Kinematics {
    std::vector<Vec3> edge_p;       // along the edge, earlier -> later
    std::vector<double> edge_w;
    std::vector<double> delta;      // per graph vertex (0 for externals)
};
Kinematics kinematics(const FeynmanGraph& g, const MomentumRouting& r, const Dispersion& disp, const Eigen::MatrixXd& x);

// Time-momentum ordered rules for one graph: restricted Wightman density at externals in
// operator order (t_op decreasing), symmetry factor and (-i)^V included.
cplx evaluate_graph_adiabatic(const GraphSet::Entry& e, const std::vector<Vec3>& p_op, const std::vector<double>& t_op,
                              const AdiabaticModel& m);

// Restricted Wightman function for one sign vector.
cplx wightman_restricted(const GraphSet& gs, const std::vector<int>& alpha, const std::vector<Vec3>& p_op,
                         const std::vector<double>& t_op, const AdiabaticModel& m);

// Green function at pairwise distinct times (physical labels), ordered presentation:
// sum over sign vectors of the restricted Wightman values in the time-sorted sector.
cplx green_time_ordered(const GraphSet& gs, const std::vector<Vec3>& p, const std::vector<double>& t,
                        const AdiabaticModel& m);

// Same restricted to one operator-order sector sigma (sigma[k] = physical label at position k);
// times must be decreasing along sigma.
cplx green_time_sector(const GraphSet& gs, const std::vector<int>& sigma, const std::vector<Vec3>& p,
                       const std::vector<double>& t, const AdiabaticModel& m);

// ---------------------------------------------------------------------------------------
// Cut-off mode in the continuum for graphs with V <= 1, smeared in the last external momentum
// with a normalized Gaussian f. Used by the adiabatic scan.

struct SmearedRequest {
    std::vector<double> times;    // operator order
    std::vector<Vec3> momenta;    // p_1..p_{n-1}; the last one is integrated against f
    Vec3 f_center{0, 0, 0};
    double f_width = 0.3;
    double f(const Vec3& p) const;
};

TimeValue evaluate_graph_cutoff(const GraphSet::Entry& e, const SmearedRequest& req, const InteractionSpec& spec,
                                const TemporalCutoff& h, const CutoffProfile& prof, int gh_order = 12);
// L -> infinity value of the same smeared request.
cplx smeared_limit(const GraphSet::Entry& e, const SmearedRequest& req, const AdiabaticModel& m);

struct ScanRow {
    double L = 0.0;
    cplx value = 0.0;
    double err = 0.0;
    double gap = 0.0;
};
struct ScanResult {
    std::vector<ScanRow> rows;
    cplx limit = 0.0;          // direct adiabatic-limit evaluation
    cplx extrapolated = 0.0;   // Richardson extrapolation of the L sequence (gaps ~ 1/L^2)
    double extrapolation_err = 0.0;
};
ScanResult adiabatic_scan(const GraphSet::Entry& e, const SmearedRequest& req, const InteractionSpec& spec,
                          const TemporalCutoff& h, const CutoffProfile& base, const std::vector<double>& Ls,
                          const AdiabaticModel& m, int gh_order = 12);

// Helpers shared with the presentations.
std::vector<std::vector<int>> sign_vectors(int n);
std::vector<std::vector<int>> permutations(int n);
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace nlqft
