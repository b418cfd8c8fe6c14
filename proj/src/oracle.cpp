#include "nlqft/fock.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

namespace nlqft {

void OracleContext::build() {
    if (!space || !spec) throw std::invalid_argument("oracle context needs a space and an interaction");
    K = hamiltonian_matrix(*spec, spatial, 1.0, 0.0, *space);
    Ks = K.sparseView(1e-300, 1.0);
    KsT = Eigen::SparseMatrix<cplx>(K.transpose().sparseView(1e-300, 1.0));
    energy.resize(space->dim());
    for (int i = 0; i < space->dim(); ++i) energy[i] = space->energy(i, spec->dispersion);
}

Matrix OracleContext::hamiltonian(double t) const {
    const int d = space->dim();
    Vector ph(d);
    for (int i = 0; i < d; ++i) ph[i] = std::exp(cplx(0.0, energy[i] * t));
    return temporal(t) * (ph.asDiagonal() * K * ph.conjugate().asDiagonal());
}

namespace {

using GL = boost::math::quadrature::gauss<double, 10>;

// Map u in [0,1] onto the (possibly infinite) interval from a to b.
struct Axis {
    double a, b;
    int kind;
    Axis(double a_, double b_) : a(a_), b(b_) {
        bool ia = std::isinf(a), ib = std::isinf(b);
        if (!ia && !ib)
            kind = 0;
        else if (ia && a < 0 && !ib)
            kind = 1;
        else if (!ia && ib && b > 0)
            kind = 2;
        else if (ia && a < 0 && ib && b > 0)
            kind = 3;
        else
            throw std::invalid_argument("Dyson interval must run from -inf or a finite time up to +inf or a finite time");
    }
    // tau and dtau/du
    std::pair<double, double> map(double u) const {
        switch (kind) {
            case 0: return {a + (b - a) * u, b - a};
            case 1: return {b - (1.0 - u) / u, 1.0 / (u * u)};
            case 2: return {a + u / (1.0 - u), 1.0 / ((1.0 - u) * (1.0 - u))};
            default: {
                double d = u * (1.0 - u);
                return {(u - 0.5) / d, (u * u - u + 0.5) / (d * d)};
            }
        }
    }
};

struct Node {
    double u, w, tau, jac;
};

// GL nodes of the sub-interval [lo, hi] of the u axis.
void panel_nodes(const Axis& ax, double lo, double hi, std::vector<Node>& out) {
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    const double h = 0.5 * (hi - lo), c = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (int s : {-1, 1}) {
            if (s < 0 && xs[i] == 0.0) continue;
            double u = c + s * h * xs[i];
            auto [tau, jac] = ax.map(u);
            out.push_back({u, h * ws[i], tau, jac});
        }
    }
}

class Applier {
public:
    Applier(const OracleContext& ctx, bool left) : ctx_(ctx), left_(left) {}

    // c(tau) * jac * H(tau) v  (or H(tau)^T v from the left)
    Vector h(const Node& nd, const Vector& v) const {
        const int d = int(v.size());
        Vector x(d);
        const double s = left_ ? 1.0 : -1.0;
        for (int i = 0; i < d; ++i) x[i] = v[i] * std::exp(cplx(0.0, s * ctx_.energy[i] * nd.tau));
        Vector y = left_ ? Vector(ctx_.KsT * x) : Vector(ctx_.Ks * x);
        const double pre = ctx_.temporal(nd.tau) * nd.jac;
        for (int i = 0; i < d; ++i) y[i] *= pre * std::exp(cplx(0.0, -s * ctx_.energy[i] * nd.tau));
        return y;
    }

    std::vector<Vector> apply(int order, double t2, double t1, const Vector& v, int panels) const {
        std::vector<Vector> out{v};
        if (order == 0) return out;
        if (order > 2) throw std::invalid_argument("oracle Dyson series implemented up to order 2");
        const int d = int(v.size());
        if (t1 == t2) {
            for (int k = 1; k <= order; ++k) out.push_back(Vector::Zero(d));
            return out;
        }
        Axis ax(t1, t2);
        std::vector<std::vector<Node>> pn(panels);
        for (int p = 0; p < panels; ++p) panel_nodes(ax, double(p) / panels, double(p + 1) / panels, pn[p]);

        // first order
        std::vector<std::vector<Vector>> hv(panels);
        Vector u1 = Vector::Zero(d);
        std::vector<Vector> panel_sum(panels);
        for (int p = 0; p < panels; ++p) {
            panel_sum[p] = Vector::Zero(d);
            for (auto& nd : pn[p]) {
                hv[p].push_back(h(nd, v));
                panel_sum[p] += nd.w * hv[p].back();
            }
            u1 += panel_sum[p];
        }
        out.push_back(cplx(0.0, -1.0) * u1);
        if (order == 1) return out;

        // second order: inner integral runs towards t1 (right action) or towards t2 (left action)
        Vector u2 = Vector::Zero(d);
        std::vector<Vector> before(panels, Vector::Zero(d));
        if (!left_) {
            for (int p = 1; p < panels; ++p) before[p] = before[p - 1] + panel_sum[p - 1];
        } else {
            for (int p = panels - 2; p >= 0; --p) before[p] = before[p + 1] + panel_sum[p + 1];
        }
        std::vector<Node> sub;
        for (int p = 0; p < panels; ++p) {
            const double lo = double(p) / panels, hi = double(p + 1) / panels;
            for (auto& nd : pn[p]) {
                sub.clear();
                if (!left_)
                    panel_nodes(ax, lo, nd.u, sub);
                else
                    panel_nodes(ax, nd.u, hi, sub);
                Vector inner = before[p];
                for (auto& s : sub) inner += s.w * h(s, v);
                u2 += nd.w * h(nd, inner);
            }
        }
        out.push_back(-u2);
        return out;
    }

private:
    const OracleContext& ctx_;
    bool left_;
};

}  // namespace

std::vector<Vector> dyson_apply(int order, double t2, double t1, const Vector& v, const OracleContext& ctx,
                                bool from_left) {
    return Applier(ctx, from_left).apply(order, t2, t1, v, ctx.panels);
}

std::vector<Matrix> dyson_U(int order, double t2, double t1, const OracleContext& ctx) {
    const int d = ctx.space->dim();
    std::vector<Matrix> U(order + 1, Matrix::Zero(d, d));
    Applier ap(ctx, false);
    for (int c = 0; c < d; ++c) {
        Vector e = Vector::Zero(d);
        e[c] = 1.0;
        auto cols = ap.apply(order, t2, t1, e, ctx.panels);
        for (int k = 0; k <= order; ++k) U[k].col(c) = cols[k];
    }
    return U;
}

std::vector<cplx> series_divide(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (b.empty() || b[0] == 0.0) throw std::invalid_argument("series_divide: leading coefficient is zero");
    std::vector<cplx> q(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        cplx s = a[k];
        for (std::size_t j = 1; j <= k && j < b.size(); ++j) s -= b[j] * q[k - j];
        q[k] = s / b[0];
    }
    return q;
}

namespace {

std::vector<cplx> oracle_run(const OracleRequest& req, const OracleContext& ctx, int panels) {
    const FockSpace& sp = *ctx.space;
    const auto& grid = sp.grid();
    const int d = sp.dim();
    const int n = int(req.alpha.size());
    const int N = req.order;
    Applier right(ctx, false), left(ctx, true);

    Vector omega = Vector::Zero(d);
    omega[sp.vacuum()] = 1.0;

    // right-hand chain: series of vectors, index = power of g
    std::vector<Vector> chain = right.apply(N, req.times[n - 1], -kInf, omega, panels);
    for (int i = n - 1; i >= 0; --i) {
        const int k = req.momenta[i];
        const Vec3& p = grid.points[k];
        const double w = ctx.spec->dispersion(p);
        const double norm = 1.0 / std::sqrt(grid.volume_factor * 2.0 * w);
        Matrix field = req.alpha[i] > 0 ? Matrix(creation(sp, k) * (std::exp(cplx(0.0, w * req.times[i])) * norm))
                                        : Matrix(annihilation(sp, grid.negate(k)) *
                                                 (std::exp(cplx(0.0, -w * req.times[i])) * norm));
        for (auto& v : chain) v = field * v;
        if (i == 0) break;
        std::vector<Vector> next(N + 1, Vector::Zero(d));
        for (int a = 0; a <= N; ++a) {
            auto us = right.apply(N - a, req.times[i - 1], req.times[i], chain[a], panels);
            for (int b = 0; a + b <= N; ++b) next[a + b] += us[b];
        }
        chain = std::move(next);
    }
    auto lefts = left.apply(N, kInf, req.times[0], omega, panels);
    std::vector<cplx> num(N + 1, 0.0);
    for (int a = 0; a <= N; ++a)
        for (int b = 0; a + b <= N; ++b) num[a + b] += lefts[a].cwiseProduct(chain[b]).sum();
    auto vac = right.apply(N, kInf, -kInf, omega, panels);
    std::vector<cplx> w0(N + 1);
    for (int k = 0; k <= N; ++k) w0[k] = vac[k][sp.vacuum()];
    return series_divide(num, w0);
}

}  // namespace

SeriesResult correlator_oracle(const OracleRequest& req, const OracleContext& ctx) {
    const int n = int(req.alpha.size());
    if (n == 0 || int(req.times.size()) != n || int(req.momenta.size()) != n)
        throw std::invalid_argument("correlator_oracle: alpha, times and momenta must have equal nonzero length");
    for (int k : req.momenta)
        if (k < 0 || k >= ctx.space->grid().size()) throw std::invalid_argument("correlator_oracle: momentum off the grid");
    SeriesResult r;
    r.value = oracle_run(req, ctx, ctx.panels);
    auto coarse = oracle_run(req, ctx, std::max(2, ctx.panels / 2));
    for (std::size_t k = 0; k < r.value.size(); ++k) r.err.push_back(std::abs(r.value[k] - coarse[k]));
    return r;
}

}  // namespace nlqft
