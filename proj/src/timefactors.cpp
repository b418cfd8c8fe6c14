#include "nlqft/timefactors.hpp"

#include "nlqft/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nlqft {

namespace {

// coef * tau^p * exp(i gamma tau)
struct Term {
    cplx coef;
    int p;
    double gamma;
};

void add_term(std::vector<Term>& v, const Term& t, double tol) {
    for (auto& u : v)
        if (u.p == t.p && std::abs(u.gamma - t.gamma) <= tol) {
            u.coef += t.coef;
            return;
        }
    v.push_back(t);
}

cplx eval_terms(const std::vector<Term>& v, double x) {
    cplx s = 0.0;
    for (auto& t : v) s += t.coef * std::pow(x, t.p) * std::exp(cplx(0.0, t.gamma * x));
    return s;
}

}  // namespace

cplx simplex_exp_integral(const std::vector<double>& beta, double a, double b, double zero_tol) {
    if (beta.empty()) return 1.0;
    if (a == b) return 0.0;
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    const double tol = zero_tol / scale;
    std::vector<Term> F{{1.0, 0, 0.0}};
    for (int j = int(beta.size()) - 1; j >= 0; --j) {
        std::vector<Term> G;
        cplx at_a = 0.0;
        for (const auto& t : F) {
            const double g = t.gamma + beta[j];
            if (std::abs(g) < tol) {
                // treat the exponent as zero: tau^{p+1}/(p+1), with exp(i g tau) ~ 1 kept exactly as 1
                Term nt{t.coef / double(t.p + 1), t.p + 1, 0.0};
                add_term(G, nt, tol);
                at_a += nt.coef * std::pow(a, nt.p);
                continue;
            }
            // antiderivative e^{i g s} sum_q (-1)^q p!/(p-q)! s^{p-q} / (i g)^{q+1}
            const cplx ig(0.0, g);
            double ff = 1.0;
            cplx den = ig;
            for (int q = 0; q <= t.p; ++q) {
                if (q > 0) {
                    ff *= (t.p - q + 1);
                    den *= ig;
                }
                Term nt{t.coef * ((q % 2 ? -1.0 : 1.0) * ff) / den, t.p - q, g};
                add_term(G, nt, tol);
                at_a += nt.coef * std::pow(a, nt.p) * std::exp(cplx(0.0, g * a));
            }
        }
        add_term(G, {-at_a, 0, 0.0}, tol);
        F = std::move(G);
    }
    return eval_terms(F, b);
}

cplx outer_limit_final(const std::vector<double>& deltas, double t) {
    cplx v = 1.0;
    double s = 0.0;
    for (double d : deltas) {
        s += d;
        v *= cplx(0.0, 1.0) / s;
    }
    return v * std::exp(cplx(0.0, t * s));
}

cplx outer_limit_initial(const std::vector<double>& deltas, double t) {
    cplx v = 1.0;
    double s = 0.0;
    for (int m = int(deltas.size()) - 1; m >= 0; --m) {
        s += deltas[m];
        v *= cplx(0.0, -1.0) / s;
    }
    return v * std::exp(cplx(0.0, t * s));
}

namespace {

// I_j(u) = int_lo^u c_j(tau) e^{i Delta_j tau} I_{j+1}(tau) dtau
TimeValue nested(const std::vector<double>& deltas, const std::vector<std::function<double(double)>>& c,
                 std::size_t j, double lo, double hi, double rel_tol) {
    if (j == deltas.size()) return {1.0, 0.0};
    double worst_rel = 0.0;
    auto f = [&](double tau) -> cplx {
        double cv = c[j](tau);
        if (cv == 0.0) return 0.0;
        TimeValue in = nested(deltas, c, j + 1, lo, tau, rel_tol);
        if (std::abs(in.value) > 0) worst_rel = std::max(worst_rel, in.err / std::abs(in.value));
        return cv * std::exp(cplx(0.0, deltas[j] * tau)) * in.value;
    };
    QuadResult r = integrate_adaptive(f, lo, hi, rel_tol, 0.0);
    return {r.value, r.err + worst_rel * r.l1};
}

}  // namespace

TimeValue slot_time_integral(const std::vector<double>& deltas, double lo, double hi,
                             const std::function<double(double)>& c, double rel_tol) {
    if (deltas.empty()) return {1.0, 0.0};
    if (lo == hi) return {0.0, 0.0};
    std::vector<std::function<double(double)>> cs(deltas.size(), c);
    return nested(deltas, cs, 0, lo, hi, rel_tol);
}

TimeValue inner_time_factor(const TemporalCutoff& h, const std::vector<double>& deltas,
                            const std::vector<double>& tau_primes, double t, double tp, double rel_tol) {
    if (deltas.size() != tau_primes.size()) throw std::invalid_argument("inner_time_factor: size mismatch");
    if (deltas.empty()) return {1.0, 0.0};
    if (t == tp) return {0.0, 0.0};
    // xi_j = (tau_j - t)/(t' - t) in [0, 1]
    const double len = tp - t;
    std::vector<std::function<double(double)>> cs;
    std::vector<double> d2;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        const double tq = tau_primes[j];
        cs.push_back([&h, t, len, tq](double xi) { return len * h.h(t + len * xi - tq); });
        d2.push_back(deltas[j] * len);
    }
    TimeValue v = nested(d2, cs, 0, 0.0, 1.0, rel_tol);
    double s = 0.0;
    for (double d : deltas) s += d;
    cplx ph = std::exp(cplx(0.0, s * t));
    return {v.value * ph, v.err};
}

SpectralProfile spectral_profile(const TemporalCutoff& h, double tau_prime) {
    SpectralProfile p;
    p.nodes = h.spectral_nodes();
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        p.weights.push_back(h.spectral_weights()[i] * std::exp(cplx(0.0, p.nodes[i] * tau_prime)));
    return p;
}

SpectralProfile spectral_profile(const TemporalCutoff& h, const CutoffProfile& chi) {
    SpectralProfile p;
    p.nodes = h.spectral_nodes();
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        p.weights.push_back(h.spectral_weights()[i] * chi.temporal_ft(p.nodes[i]));
    return p;
}

namespace {

template <class F>
void product_nodes(const std::vector<SpectralProfile>& prof, std::size_t j, std::vector<double>& w, cplx weight,
                   const F& f) {
    if (j == prof.size()) {
        f(w, weight);
        return;
    }
    for (std::size_t i = 0; i < prof[j].nodes.size(); ++i) {
        if (prof[j].weights[i] == 0.0) continue;
        w[j] = prof[j].nodes[i];
        product_nodes(prof, j + 1, w, weight * prof[j].weights[i], f);
    }
}

}  // namespace

OuterTimeResult outer_time_factor_spectral(bool group_final, const std::vector<double>& deltas, double t,
                                           const std::vector<SpectralProfile>& prof) {
    OuterTimeResult res;
    if (deltas.size() != prof.size()) throw std::invalid_argument("outer_time_factor: profile count mismatch");
    if (deltas.empty()) {
        res.value = 1.0;
        return res;
    }
    res.min_denominator = std::numeric_limits<double>::infinity();
    const std::size_t k = deltas.size();
    std::vector<double> w(k), beta(k);
    product_nodes(prof, 0, w, 1.0, [&](const std::vector<double>& ws, cplx weight) {
        for (std::size_t j = 0; j < k; ++j) beta[j] = deltas[j] - ws[j];
        double s = 0.0;
        cplx v = weight;
        if (group_final) {
            for (std::size_t m = 0; m < k; ++m) {
                s += beta[m];
                res.min_denominator = std::min(res.min_denominator, std::abs(s));
                v *= cplx(0.0, 1.0) / s;
            }
        } else {
            for (int m = int(k) - 1; m >= 0; --m) {
                s += beta[m];
                res.min_denominator = std::min(res.min_denominator, std::abs(s));
                v *= cplx(0.0, -1.0) / s;
            }
        }
        res.value += v * std::exp(cplx(0.0, t * s));
    });
    return res;
}

cplx inner_time_factor_spectral(const std::vector<double>& deltas, double t, double tp,
                                const std::vector<SpectralProfile>& prof) {
    if (deltas.size() != prof.size()) throw std::invalid_argument("inner_time_factor: profile count mismatch");
    if (deltas.empty()) return 1.0;
    const std::size_t k = deltas.size();
    std::vector<double> w(k), beta(k);
    cplx acc = 0.0;
    product_nodes(prof, 0, w, 1.0, [&](const std::vector<double>& ws, cplx weight) {
        for (std::size_t j = 0; j < k; ++j) beta[j] = deltas[j] - ws[j];
        acc += weight * simplex_exp_integral(beta, t, tp);
    });
    return acc;
}

OuterTimeResult outer_time_factor(bool group_final, const TemporalCutoff& h, const std::vector<double>& deltas,
                                  const std::vector<double>& tau_primes, double t, int V, double mass) {
    if (h.delta() > mass / (V + 1) * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "outer_time_factor: band limit " << h.delta() << " exceeds M/(V+1) = " << mass / (V + 1);
        throw std::invalid_argument(os.str());
    }
    if (deltas.size() != tau_primes.size()) throw std::invalid_argument("outer_time_factor: size mismatch");
    std::vector<SpectralProfile> prof;
    for (double tq : tau_primes) prof.push_back(spectral_profile(h, tq));
    return outer_time_factor_spectral(group_final, deltas, t, prof);
}

}  // namespace nlqft
