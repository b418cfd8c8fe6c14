#pragma once

#include "nlqft/graphs.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace nlqft {

// Momentum variables x = (k_1..k_I, p_1..p_n): one 3-vector per line joining two internal
// vertices, then the external momenta. Stored as (I+n) x 3 matrices, one column per
// spatial component; every linear map below acts identically on each column.
struct MomentumRouting {
    const FeynmanGraph* graph = nullptr;
    int I = 0, n = 0, V = 0;
    int rank = 0;
    std::vector<int> internal_vertices;   // graph vertex index of defect row r
    std::vector<int> line_of_edge;        // column of x carrying edge e (sign in edge_sign)
    std::vector<double> edge_sign;        // momentum along edge e (earlier -> later) = sign * x[col]
    Eigen::MatrixXd D;                    // V x (I+n) defect functionals
    Eigen::MatrixXd Q;                    // (I+n-rank) x (I+n) orthonormal completion
    Eigen::MatrixXd T, Tinv;              // [D; Q] and its inverse (full rank only)
    std::vector<double> singular_values;

    Eigen::MatrixXd to_coords(const Eigen::MatrixXd& x) const;      // rows: kappa_1..kappa_V, q
    Eigen::MatrixXd from_coords(const Eigen::MatrixXd& kq) const;   // inverse map p_Gamma
    std::vector<Vec3> edge_momenta(const Eigen::MatrixXd& x) const; // per graph edge
};

// completion_seed != 0 rotates the orthogonal completion by a seeded random orthogonal matrix.
// Rank deficiency (vacuum components) throws unless allow_rank_deficient is set; the
// resulting routing then has no inverse.
MomentumRouting build_routing(const FeynmanGraph& g, std::uint64_t completion_seed = 0,
                              bool allow_rank_deficient = false);

// Delta_v = sum omega(out lines) - sum omega(in lines), per internal vertex in position order.
std::vector<double> energy_defects(const MomentumRouting& r, const Dispersion& disp, const Eigen::MatrixXd& x);
// Same, starting from (kappa, q) coordinates.
std::vector<double> energy_defects_kq(const MomentumRouting& r, const Dispersion& disp, const Eigen::MatrixXd& kq);

struct OuterDefects {
    std::vector<double> final_;    // Omega^f_m, m = 1..v_0 (latest m slot-0 vertices)
    std::vector<double> initial;   // Omega^i_m, m = 1..v_n (slot-n vertices at or earlier than m)
};
OuterDefects cumulative_outer_defects(const FeynmanGraph& g, const std::vector<double>& defects);

struct MassGapReport {
    bool pass = true;
    double min_margin = 0.0;  // min over samples of Omega - M
    long samples = 0;
    std::string witness;
};
// Samples kappa = 0 points (random and near threshold) and checks Omega^f, Omega^i >= M - 1e-9.
MassGapReport mass_gap_certificate(const FeynmanGraph& g, const MomentumRouting& r, const Dispersion& disp,
                                   long sample_count, std::uint64_t seed);

// Loop chart at kappa = 0 for fixed external momenta: x = x0 + sum_j B[:,j] (x) l_j.
// B has orthonormal columns spanning the loop space; jacobian converts d^3l to the measure
// prod d^3k prod delta^3(kappa) with one overall delta^3(sum p) left over.
struct LoopChart {
    Eigen::MatrixXd x0;
    Eigen::MatrixXd B;
    double jacobian = 1.0;
    int loops() const { return int(B.cols()); }
    Eigen::MatrixXd point(const std::vector<Vec3>& ell) const;
};
LoopChart loop_chart(const MomentumRouting& r, const std::vector<Vec3>& external_p);

bool is_connected(const FeynmanGraph& g);

}  // namespace nlqft
