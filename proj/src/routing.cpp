#include "nlqft/routing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nlqft {

Eigen::MatrixXd MomentumRouting::to_coords(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out(D.rows() + Q.rows(), 3);
    out << D * x, Q * x;
    return out;
}

Eigen::MatrixXd MomentumRouting::from_coords(const Eigen::MatrixXd& kq) const {
    if (Tinv.size() == 0 && I + n > 0) throw std::logic_error("routing has no inverse (rank deficient)");
    return Tinv * kq;
}

std::vector<Vec3> MomentumRouting::edge_momenta(const Eigen::MatrixXd& x) const {
    std::vector<Vec3> out(line_of_edge.size());
    for (std::size_t e = 0; e < line_of_edge.size(); ++e)
        for (int c = 0; c < 3; ++c) out[e][c] = edge_sign[e] * x(line_of_edge[e], c);
    return out;
}

bool is_connected(const FeynmanGraph& g) {
    if (g.size() == 0) return true;
    std::vector<int> parent(g.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (auto& e : g.edges) parent[find(e.first)] = find(e.second);
    for (int i = 1; i < g.size(); ++i)
        if (find(i) != find(0)) return false;
    return true;
}

MomentumRouting build_routing(const FeynmanGraph& g, std::uint64_t completion_seed, bool allow_rank_deficient) {
    MomentumRouting r;
    r.graph = &g;
    r.n = g.n;
    std::vector<int> row_of(g.size(), -1);
    for (int i = 0; i < g.size(); ++i)
        if (!g.vertices[i].external) {
            row_of[i] = int(r.internal_vertices.size());
            r.internal_vertices.push_back(i);
        }
    r.V = int(r.internal_vertices.size());
    for (auto& [a, b] : g.edges)
        if (!g.vertices[a].external && !g.vertices[b].external) ++r.I;
    const int cols = r.I + r.n;
    r.D = Eigen::MatrixXd::Zero(r.V, cols);
    int next = 0;
    for (auto& [a, b] : g.edges) {
        const auto& va = g.vertices[a];
        const auto& vb = g.vertices[b];
        int col;
        double sign = 1.0;
        if (!va.external && !vb.external)
            col = next++;
        else if (va.external)
            col = r.I + va.ext;  // creator field at the earlier end carries p
        else {
            col = r.I + vb.ext;  // annihilator field a_-(-p) at the later end
            sign = -1.0;
        }
        r.line_of_edge.push_back(col);
        r.edge_sign.push_back(sign);
        if (row_of[a] >= 0) r.D(row_of[a], col) += sign;
        if (row_of[b] >= 0) r.D(row_of[b], col) -= sign;
    }

    Eigen::MatrixXd null;
    if (r.V == 0) {
        r.rank = 0;
        null = Eigen::MatrixXd::Identity(cols, cols);
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.D, Eigen::ComputeFullV);
        auto s = svd.singularValues();
        for (int i = 0; i < s.size(); ++i) r.singular_values.push_back(s[i]);
        r.rank = 0;
        for (int i = 0; i < s.size(); ++i) r.rank += s[i] > 1e-10;
        null = svd.matrixV().rightCols(cols - r.rank);
    }
    if (r.rank < r.V && !allow_rank_deficient) {
        std::ostringstream os;
        os << "defect functionals have rank " << r.rank << " < V = " << r.V << " (vacuum component?)";
        throw std::runtime_error(os.str());
    }
    r.Q = null.transpose();
    if (completion_seed != 0 && r.Q.rows() > 0) {
        std::mt19937_64 rng(completion_seed);
        std::normal_distribution<double> nd;
        Eigen::MatrixXd M(r.Q.rows(), r.Q.rows());
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) M(i, j) = nd(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
        Eigen::MatrixXd R = qr.householderQ();
        r.Q = R * r.Q;
    }
    if (r.rank == r.V) {
        r.T.resize(cols, cols);
        r.T << r.D, r.Q;
        r.Tinv = r.T.inverse();
    }
    return r;
}

std::vector<double> energy_defects(const MomentumRouting& r, const Dispersion& disp, const Eigen::MatrixXd& x) {
    const auto& g = *r.graph;
    auto mom = r.edge_momenta(x);
    std::vector<double> delta(g.size(), 0.0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        double w = disp(mom[e]);
        delta[g.edges[e].first] += w;
        delta[g.edges[e].second] -= w;
    }
    std::vector<double> out;
    for (int v : r.internal_vertices) out.push_back(delta[v]);
    return out;
}

std::vector<double> energy_defects_kq(const MomentumRouting& r, const Dispersion& disp, const Eigen::MatrixXd& kq) {
    return energy_defects(r, disp, r.from_coords(kq));
}

OuterDefects cumulative_outer_defects(const FeynmanGraph& g, const std::vector<double>& defects) {
    // defects are listed per internal vertex in position order; slot 0 comes first, slot n last
    OuterDefects o;
    const int v0 = g.v.front(), vn = g.n > 0 ? g.v.back() : 0;
    double s = 0.0;
    for (int m = 0; m < v0; ++m) {
        s -= defects[m];
        o.final_.push_back(s);
    }
    if (g.n > 0) {
        const int V = int(defects.size());
        std::vector<double> suf(vn + 1, 0.0);
        for (int m = vn - 1; m >= 0; --m) suf[m] = suf[m + 1] + defects[V - vn + m];
        for (int m = 0; m < vn; ++m) o.initial.push_back(suf[m]);
    }
    return o;
}

MassGapReport mass_gap_certificate(const FeynmanGraph& g, const MomentumRouting& r, const Dispersion& disp,
                                   long sample_count, std::uint64_t seed) {
    MassGapReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const double scales[] = {1e-4, 0.05, 0.5, 1.0, 3.0};
    const int k = int(r.Q.rows());
    for (long s = 0; s < sample_count; ++s) {
        const double sc = scales[s % 5];
        Eigen::MatrixXd q(k, 3);
        for (int i = 0; i < k; ++i)
            for (int c = 0; c < 3; ++c) q(i, c) = sc * nd(rng);
        Eigen::MatrixXd x = r.Q.transpose() * q;  // kappa = 0
        auto od = cumulative_outer_defects(g, energy_defects(r, disp, x));
        ++rep.samples;
        auto check = [&](const std::vector<double>& om, const char* name) {
            for (std::size_t m = 0; m < om.size(); ++m) {
                double margin = om[m] - disp.mass;
                rep.min_margin = std::min(rep.min_margin, margin);
                if (margin < -1e-9 && rep.pass) {
                    rep.pass = false;
                    std::ostringstream os;
                    os << name << "_" << (m + 1) << " = " << om[m] << " < M at sample " << s << " (scale " << sc << ")";
                    rep.witness = os.str();
                }
            }
        };
        check(od.final_, "Omega^f");
        check(od.initial, "Omega^i");
    }
    if (!std::isfinite(rep.min_margin)) rep.min_margin = 0.0;
    return rep;
}

Eigen::MatrixXd LoopChart::point(const std::vector<Vec3>& ell) const {
    Eigen::MatrixXd x = x0;
    for (int j = 0; j < B.cols(); ++j)
        for (int c = 0; c < 3; ++c) x.col(c) += B.col(j) * ell[j][c];
    return x;
}

LoopChart loop_chart(const MomentumRouting& r, const std::vector<Vec3>& external_p) {
    if (int(external_p.size()) != r.n) throw std::invalid_argument("loop_chart: wrong number of external momenta");
    if (!is_connected(*r.graph)) throw std::invalid_argument("loop_chart: graph is not connected");
    if (r.rank < r.V) throw std::invalid_argument("loop_chart: rank deficient routing");
    const int cols = r.I + r.n;
    LoopChart ch;
    Eigen::MatrixXd P(r.n, 3);
    for (int i = 0; i < r.n; ++i)
        for (int c = 0; c < 3; ++c) P(i, c) = external_p[i][c];
    // x = Q^T q with the external rows pinned to p
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(r.n, cols);
    for (int i = 0; i < r.n; ++i) E(i, r.I + i) = 1.0;
    Eigen::MatrixXd A = E * r.Q.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    Eigen::MatrixXd qstar = svd.solve(P);
    if ((A * qstar - P).norm() > 1e-9 * (1.0 + P.norm()))
        throw std::invalid_argument("loop_chart: external momenta violate momentum conservation");
    const int rk = int(svd.rank());
    Eigen::MatrixXd N = svd.matrixV().rightCols(A.cols() - rk);
    ch.x0 = r.Q.transpose() * qstar;
    ch.B = r.Q.transpose() * N;
    if (r.V >= 2) {
        Eigen::MatrixXd Dk = r.D.topLeftCorner(r.V - 1, r.I);
        ch.jacobian = std::pow((Dk * Dk.transpose()).determinant(), -1.5);
    }
    return ch;
}

}  // namespace nlqft
