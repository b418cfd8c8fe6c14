#include "nlqft/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace nlqft {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
using G10 = boost::math::quadrature::gauss<double, 10>;

struct Interval {
    double lo, hi;
    cplx value;
    double err, l1;
    bool operator<(const Interval& o) const { return err < o.err; }
};

// u in (0,1) -> tau, with jacobian. kind 0 finite, 1 (-inf,b], 2 [a,inf), 3 both infinite
struct Map {
    int kind;
    double a, b;
    std::pair<double, double> operator()(double u) const {
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

Interval rule(const std::function<cplx(double)>& g, double lo, double hi, long& evals) {
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G10::weights();
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    cplx k = 0.0, gs = 0.0;
    double l1 = 0.0;
    // 21-point rule: xk[0] = 0, gauss nodes are the odd entries
    for (std::size_t i = 0; i < xk.size(); ++i) {
        if (i == 0) {
            cplx f0 = g(c);
            ++evals;
            k += wk[0] * f0;
            l1 += wk[0] * std::abs(f0);
            continue;
        }
        cplx fp = g(c + h * xk[i]), fm = g(c - h * xk[i]);
        evals += 2;
        k += wk[i] * (fp + fm);
        l1 += wk[i] * (std::abs(fp) + std::abs(fm));
        if (i % 2 == 1) gs += wg[i / 2] * (fp + fm);
    }
    Interval iv{lo, hi, h * k, std::abs(h * (k - gs)), h * l1};
    return iv;
}

}  // namespace

QuadResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b, double rel_tol,
                              double abs_tol, int max_intervals) {
    QuadResult res;
    if (a == b) return res;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    Map m;
    m.a = a;
    m.b = b;
    const bool ia = std::isinf(a), ib = std::isinf(b);
    m.kind = !ia && !ib ? 0 : (ia && !ib ? 1 : (!ia && ib ? 2 : 3));
    auto g = [&](double u) -> cplx {
        auto [t, j] = m(u);
        if (!std::isfinite(t) || !std::isfinite(j)) return 0.0;
        return f(t) * j;
    };
    std::priority_queue<Interval> q;
    cplx tot = 0.0;
    double err = 0.0, l1 = 0.0;
    auto push = [&](Interval iv) {
        tot += iv.value;
        err += iv.err;
        l1 += iv.l1;
        q.push(iv);
    };
    // a few initial panels so that narrow features away from the centre are seen
    const int init = m.kind == 0 ? 2 : 4;
    for (int i = 0; i < init; ++i) push(rule(g, double(i) / init, double(i + 1) / init, res.evals));
    const double eps = std::numeric_limits<double>::epsilon();
    int splits = 0;
    while (true) {
        const double floor = 50.0 * eps * l1;
        if (err <= std::max({abs_tol, rel_tol * std::abs(tot), floor}) || splits >= max_intervals) {
            res.value = sign * tot;
            res.err = std::max(err, floor);
            res.l1 = l1;
            return res;
        }
        Interval worst = q.top();
        q.pop();
        tot -= worst.value;
        err -= worst.err;
        l1 -= worst.l1;
        double mid = 0.5 * (worst.lo + worst.hi);
        push(rule(g, worst.lo, mid, res.evals));
        push(rule(g, mid, worst.hi, res.evals));
        ++splits;
        err = std::max(err, 0.0);
    }
}

namespace {

Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
    const int n = int(diag.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) J(i, i) = diag[i];
    for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = off[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule r;
    for (int i = 0; i < n; ++i) {
        r.x.push_back(es.eigenvalues()[i]);
        double v = es.eigenvectors()(0, i);
        r.w.push_back(mu0 * v * v);
    }
    return r;
}

}  // namespace

Rule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n), o(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) o[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(d, o, 2.0);
}

Rule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n), o(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) o[k - 1] = std::sqrt(0.5 * k);
    Rule r = golub_welsch(d, o, std::sqrt(kPi));
    // symmetrize against round-off so that mirrored nodes are exact negatives
    for (int i = 0; i < n / 2; ++i) {
        double x = 0.5 * (r.x[n - 1 - i] - r.x[i]);
        double w = 0.5 * (r.w[n - 1 - i] + r.w[i]);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

ProductRule hermite_product(int order, int dim, double scale) {
    ProductRule pr;
    if (dim == 0) {
        pr.x.push_back({});
        pr.w.push_back(1.0);
        return pr;
    }
    Rule r = gauss_hermite(order);
    std::vector<int> idx(dim, 0);
    while (true) {
        std::vector<double> x(dim);
        double w = 1.0;
        for (int d = 0; d < dim; ++d) {
            double xi = r.x[idx[d]];
            x[d] = scale * xi;
            w *= scale * r.w[idx[d]] * std::exp(xi * xi);
        }
        pr.x.push_back(std::move(x));
        pr.w.push_back(w);
        int d = 0;
        while (d < dim && ++idx[d] == order) idx[d++] = 0;
        if (d == dim) break;
    }
    return pr;
}

}  // namespace nlqft
