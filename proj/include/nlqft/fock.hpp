#pragma once

#include "nlqft/interaction.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace nlqft {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Finite set of momenta, symmetric under p -> -p. Integrals become sums with weight dv,
// delta^3 becomes Kronecker/dv.
struct MomentumGrid {
    std::vector<Vec3> points;
    double dv = 1.0;
    double volume_factor = kTwoPiCubed;

    int size() const { return int(points.size()); }
    int index_of(const Vec3& p, double tol = 1e-12) const;  // -1 when absent
    int negate(int i) const;
};

// Quasi-1D grid: points (k*dp, 0, 0) for k = -half..half. dv defaults to dp^3.
MomentumGrid make_line_grid(int half, double dp, double dv = 0.0, double volume_factor = kTwoPiCubed);

// Occupation-number basis for particle numbers 0..nmax. A state is the sorted list of
// occupied grid indices (a multiset).
class FockSpace {
public:
    FockSpace(MomentumGrid grid, int nmax);

    const MomentumGrid& grid() const { return grid_; }
    int nmax() const { return nmax_; }
    int dim() const { return int(states_.size()); }
    const std::vector<int>& state(int i) const { return states_[i]; }
    int index(const std::vector<int>& sorted_multiset) const;  // -1 when above nmax
    int particles(int i) const { return int(states_[i].size()); }
    // Free energy sum of omega over occupied momenta.
    double energy(int i, const Dispersion& disp) const;
    int vacuum() const { return 0; }

private:
    MomentumGrid grid_;
    int nmax_;
    std::vector<std::vector<int>> states_;
    std::map<std::vector<int>, int> lookup_;
};

// Grid kernel A(out | in) with lp out-momenta and l in-momenta, stored densely,
// flat index = sum of digits in base G, out digits first.
struct KernelOperator {
    int lp = 0, l = 0, G = 0;
    std::vector<cplx> amp;

    KernelOperator() = default;
    KernelOperator(int lp_, int l_, int G_);
    std::size_t flat(const std::vector<int>& out, const std::vector<int>& in) const;
    cplx& at(const std::vector<int>& out, const std::vector<int>& in) { return amp[flat(out, in)]; }
    cplx at(const std::vector<int>& out, const std::vector<int>& in) const { return amp[flat(out, in)]; }
    // Iterate over all index tuples: f(out, in, value&).
    void for_each(const std::function<void(const std::vector<int>&, const std::vector<int>&, cplx&)>& f);
    void for_each(const std::function<void(const std::vector<int>&, const std::vector<int>&, cplx)>& f) const;
};

KernelOperator symmetrize(const KernelOperator& A);
KernelOperator adjoint(const KernelOperator& A);

// Literal second quantization: on every n-particle sector apply A (x) 1, symmetrize and
// multiply by sqrt(n!(n-l+l')!)/(n-l)!. Sectors above nmax are dropped.
Matrix second_quantize(const KernelOperator& A, const FockSpace& space);
// Same operator from normal-ordered products of ladder matrices; used as a cross-check.
Matrix second_quantize_ladder(const KernelOperator& A, const FockSpace& space);

// Ladder operators a_+(p_k) and a_-(p_k) with [a_-(p), a_+(q)] = delta_pq / dv.
Matrix creation(const FockSpace& space, int k);
Matrix annihilation(const FockSpace& space, int k);

struct WickTerm {
    double factor;
    int r;
    KernelOperator kernel;
};

// A B = sum_r r! C(l_A,r) C(l'_B,r) (A (x)_r B), each contracted kernel symmetrized.
std::vector<WickTerm> wick_product(const KernelOperator& A, const KernelOperator& B, const MomentumGrid& grid);

// Kernel of the (l',l) part of H_I at time t: F * lambda(defect) * chi(t) * e^{i(sum w' - sum w)t} / (l! l'!).
KernelOperator interaction_kernel(const InteractionSpec& spec, int lp, int l, const MomentumGrid& grid,
                                  const std::function<double(const Vec3&)>& spatial, double chi_t, double t);

Matrix hamiltonian_matrix(const InteractionSpec& spec, const std::function<double(const Vec3&)>& spatial,
                          double chi_t, double t, const FockSpace& space);

// Everything the Dyson expansion needs; H(t) = chi(t) e^{iH0 t} K e^{-iH0 t}.
struct OracleContext {
    const FockSpace* space = nullptr;
    const InteractionSpec* spec = nullptr;
    std::function<double(const Vec3&)> spatial;
    std::function<double(double)> temporal;
    int panels = 48;  // composite Gauss-Legendre panels on the compactified axis

    Matrix K;                   // hamiltonian_matrix at t = 0 with chi = 1
    Eigen::SparseMatrix<cplx> Ks, KsT;
    std::vector<double> energy; // free energies of the basis states

    void build();
    Matrix hamiltonian(double t) const;
};

// U_(0..order)(t2, t1) as matrices. Endpoints may be infinite.
std::vector<Matrix> dyson_U(int order, double t2, double t1, const OracleContext& ctx);

// U_(k)(t2, t1) v and w^T U_(k)(t2, t1) for k = 0..order (order <= 2), for a single panel setting.
std::vector<Vector> dyson_apply(int order, double t2, double t1, const Vector& v, const OracleContext& ctx,
                                bool from_left);

struct SeriesResult {
    std::vector<cplx> value;  // coefficient of g^k
    std::vector<double> err;
};

// Formal power-series division a / b, b[0] != 0.
std::vector<cplx> series_divide(const std::vector<cplx>& a, const std::vector<cplx>& b);

struct OracleRequest {
    std::vector<int> alpha;       // +1 creator field, -1 annihilator field
    std::vector<double> times;    // t_1 ... t_n (operator order, leftmost first)
    std::vector<int> momenta;     // grid indices
    int order = 0;
};

// (Omega, U(inf,t1) phi_1 U(t1,t2) ... phi_n U(tn,-inf) Omega) / (Omega, S Omega) per power of g.
// err is the difference from a run at half the panel count.
SeriesResult correlator_oracle(const OracleRequest& req, const OracleContext& ctx);

}  // namespace nlqft
