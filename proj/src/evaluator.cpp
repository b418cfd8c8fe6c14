#include "nlqft/evaluator.hpp"

#include "nlqft/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nlqft {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += threads) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!first) first = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

std::vector<std::vector<int>> sign_vectors(int n) {
    std::vector<std::vector<int>> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> a(n);
        for (int i = 0; i < n; ++i) a[i] = (mask >> (n - 1 - i)) & 1 ? 1 : -1;
        out.push_back(a);
    }
    return out;
}

std::vector<std::vector<int>> permutations(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

namespace {

cplx ipow_minus_i(int V) {
    static const cplx tab[4] = {1.0, cplx(0, -1), -1.0, cplx(0, 1)};
    return tab[V % 4];
}

// internal vertices of each slot in position order (latest first)
std::vector<std::vector<int>> slot_members(const FeynmanGraph& g) {
    std::vector<std::vector<int>> s(g.n + 1);
    for (int i = 0; i < g.size(); ++i)
        if (!g.vertices[i].external) s[g.vertices[i].slot].push_back(i);
    return s;
}

struct Incidence {
    std::vector<std::vector<int>> out, in;  // edge indices per vertex
};

Incidence incidence(const FeynmanGraph& g) {
    Incidence inc;
    inc.out.resize(g.size());
    inc.in.resize(g.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        inc.out[g.edges[e].first].push_back(int(e));
        inc.in[g.edges[e].second].push_back(int(e));
    }
    return inc;
}

cplx combine(std::vector<TimeValue>& parts, double& rel) {
    cplx v = 1.0;
    rel = 0.0;
    for (auto& p : parts) {
        v *= p.value;
        if (std::abs(p.value) > 0) rel += p.err / std::abs(p.value);
    }
    return v;
}

}  // namespace

// ------------------------------------------------------------------------------------ grid

TimeValue evaluate_graph_grid(const FeynmanGraph& g, const GridPoint& pt, const GridModel& m) {
    const auto& grid = *m.grid;
    const auto& spec = *m.spec;
    const int n = g.n;
    if (int(pt.alpha.size()) != n || int(pt.times.size()) != n || int(pt.momenta.size()) != n)
        throw std::invalid_argument("evaluate_graph_grid: point does not match the graph");
    for (int i = 0; i < n; ++i)
        if (pt.alpha[i] != g.alpha[i]) throw std::invalid_argument("evaluate_graph_grid: sign vector mismatch");
    const double dv = grid.dv;
    Incidence inc = incidence(g);
    auto slots = slot_members(g);

    // external and fixed edges; free edges are the internal lines
    std::vector<int> edge_grid(g.edges.size(), -1);
    std::vector<int> free_edges;
    cplx pref = ipow_minus_i(g.V()) / double(g.sym_den);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto& va = g.vertices[g.edges[e].first];
        const auto& vb = g.vertices[g.edges[e].second];
        if (!va.external && !vb.external) {
            free_edges.push_back(int(e));
            continue;
        }
        if (va.external && vb.external) {
            // creator p_j must equal minus the annihilated -p_i
            if (pt.momenta[va.ext] != grid.negate(pt.momenta[vb.ext])) return {0.0, 0.0};
            pref /= dv;
            edge_grid[e] = pt.momenta[va.ext];
        } else if (va.external) {
            edge_grid[e] = pt.momenta[va.ext];
        } else {
            edge_grid[e] = grid.negate(pt.momenta[vb.ext]);
        }
    }
    for (int i = 0; i < n; ++i) {
        const Vec3& p = grid.points[pt.momenta[i]];
        const double w = spec.dispersion(p);
        pref *= std::exp(cplx(0.0, pt.alpha[i] * w * pt.times[i])) / std::sqrt(grid.volume_factor * 2.0 * w);
    }
    const int I = int(free_edges.size());
    pref *= std::pow(dv, I);

    std::vector<int> internal;
    for (int i = 0; i < g.size(); ++i)
        if (!g.vertices[i].external) internal.push_back(i);

    TimeValue total;
    std::vector<int> digits(I, 0);
    const int G = grid.size();
    std::vector<double> delta(g.size(), 0.0);
    std::vector<Vec3> po, pi;
    while (true) {
        for (int k = 0; k < I; ++k) edge_grid[free_edges[k]] = digits[k];
        cplx vert = 1.0;
        for (int v : internal) {
            po.clear();
            pi.clear();
            Vec3 kappa{0, 0, 0};
            double d = 0.0;
            for (int e : inc.out[v]) {
                const Vec3& p = grid.points[edge_grid[e]];
                po.push_back(p);
                kappa = kappa + p;
                d += spec.dispersion(p);
            }
            for (int e : inc.in[v]) {
                const Vec3& p = grid.points[edge_grid[e]];
                pi.push_back(p);
                kappa = kappa - p;
                d -= spec.dispersion(p);
            }
            delta[v] = d;
            vert *= spec.kernel(int(po.size()), int(pi.size()), po, pi) * m.spatial(kappa);
            if (vert == 0.0) break;
        }
        if (vert != 0.0) {
            std::vector<TimeValue> parts;
            for (int s = 0; s <= n; ++s) {
                if (slots[s].empty()) continue;
                std::vector<double> ds;
                for (int v : slots[s]) ds.push_back(delta[v]);
                double lo = s == n ? -kInf : pt.times[s];
                double hi = s == 0 ? kInf : pt.times[s - 1];
                parts.push_back(slot_time_integral(ds, lo, hi, m.temporal, m.rel_tol));
            }
            double rel;
            cplx tv = combine(parts, rel);
            cplx c = pref * vert * tv;
            total.value += c;
            total.err += std::abs(c) * rel;
        }
        int k = 0;
        while (k < I && ++digits[k] == G) digits[k++] = 0;
        if (k == I) break;
    }
    total.err += 1e-14 * std::abs(total.value);
    return total;
}

CorrelatorResult correlator_grid(const GridPoint& pt, int max_order, const GridModel& m, bool include_vacuum) {
    CorrelatorResult res;
    res.convention = "grid: delta^3 -> Kronecker/dv, field norm 1/sqrt(w 2 omega), w = " +
                     std::to_string(m.grid->volume_factor);
    const int n = int(pt.alpha.size());
    for (int V = 0; V <= max_order; ++V) {
        std::vector<FeynmanGraph> gs;
        for (auto& v : slot_distributions(n, V))
            for (auto& g : enumerate_graphs(make_query(*m.spec, pt.alpha, v, include_vacuum))) gs.push_back(std::move(g));
        std::vector<TimeValue> vals(gs.size());
        parallel_for(int(gs.size()), m.threads, [&](int i) { vals[i] = evaluate_graph_grid(gs[i], pt, m); });
        cplx s = 0.0;
        double e = 0.0;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            s += vals[i].value;
            e += vals[i].err;
            res.graphs.push_back({V, int(i), topology_key(gs[i]), vals[i].value, vals[i].err});
        }
        res.value.push_back(s);
        res.err.push_back(e);
    }
    return res;
}

VacuumFactorization vacuum_factorization(const GridPoint& pt, int max_order, const GridModel& m) {
    VacuumFactorization f;
    f.full = correlator_grid(pt, max_order, m, true).value;
    f.nonvac = correlator_grid(pt, max_order, m, false).value;
    f.vac = correlator_grid(GridPoint{}, max_order, m, true).value;
    for (int k = 0; k <= max_order; ++k) {
        cplx p = 0.0;
        for (int j = 0; j <= k; ++j) p += f.nonvac[j] * f.vac[k - j];
        f.product.push_back(p);
        double scale = std::max({std::abs(f.full[k]), std::abs(p), 1e-300});
        f.rel_gap.push_back(std::abs(f.full[k] - p) / scale);
    }
    return f;
}

// ------------------------------------------------------------------------------ adiabatic

double AdiabaticModel::scale() const { return gh_scale > 0 ? gh_scale : 1.0 / (ell * std::sqrt(2.0)); }

GraphSet::GraphSet(const InteractionSpec& spec, int n, int V, std::uint64_t completion_seed) : n_(n), V_(V) {
    for (auto& alpha : sign_vectors(n))
        for (auto& v : slot_distributions(n, V))
            for (auto& g : enumerate_graphs(make_query(spec, alpha, v))) {
                if (!is_connected(g))
                    throw std::invalid_argument("adiabatic rules need connected graphs; found a disconnected one at n=" +
                                                std::to_string(n) + ", V=" + std::to_string(V));
                auto e = std::make_unique<Entry>();
                e->graph = g;
                e->alpha = alpha;
                e->routing = build_routing(e->graph, completion_seed);
                entries_.push_back(std::move(e));
            }
}

Kinematics kinematics(const FeynmanGraph& g, const MomentumRouting& r, const Dispersion& disp,
                      const Eigen::MatrixXd& x) {
    Kinematics k;
    k.edge_p = r.edge_momenta(x);
    k.delta.assign(g.size(), 0.0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        double w = disp(k.edge_p[e]);
        k.edge_w.push_back(w);
        k.delta[g.edges[e].first] += w;
        k.delta[g.edges[e].second] -= w;
    }
    for (int i = 0; i < g.size(); ++i)
        if (g.vertices[i].external) k.delta[i] = 0.0;
    return k;
}

namespace {

std::vector<Vec3> loop_vectors(const std::vector<double>& x, int L) {
    std::vector<Vec3> ell(L);
    for (int j = 0; j < L; ++j) ell[j] = {x[3 * j], x[3 * j + 1], x[3 * j + 2]};
    return ell;
}

}  // namespace

cplx evaluate_graph_adiabatic(const GraphSet::Entry& e, const std::vector<Vec3>& p_op, const std::vector<double>& t_op,
                              const AdiabaticModel& m) {
    const auto& g = e.graph;
    const auto& spec = *m.spec;
    const int n = g.n;
    for (int i = 0; i + 1 < n; ++i)
        if (!(t_op[i] > t_op[i + 1])) throw std::invalid_argument("restricted Wightman function needs decreasing times");
    LoopChart ch = loop_chart(e.routing, p_op);
    Incidence inc = incidence(g);
    auto slots = slot_members(g);
    cplx pref = ipow_minus_i(g.V()) / double(g.sym_den) * ch.jacobian;
    for (int i = 0; i < n; ++i) {
        const double w = spec.dispersion(p_op[i]);
        pref *= std::exp(cplx(0.0, g.alpha[i] * w * t_op[i])) / spec.leg_norm(p_op[i]);
    }
    ProductRule rule = hermite_product(m.gh_order, 3 * ch.loops(), m.scale());
    cplx acc = 0.0;
    std::vector<Vec3> po, pi;
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
        Eigen::MatrixXd x = ch.point(loop_vectors(rule.x[q], ch.loops()));
        Kinematics k = kinematics(g, e.routing, spec.dispersion, x);
        cplx val = rule.w[q];
        for (int v = 0; v < g.size() && val != 0.0; ++v) {
            if (g.vertices[v].external) continue;
            po.clear();
            pi.clear();
            for (int ed : inc.out[v]) po.push_back(k.edge_p[ed]);
            for (int ed : inc.in[v]) pi.push_back(k.edge_p[ed]);
            val *= spec.kernel(int(po.size()), int(pi.size()), po, pi);
        }
        if (val == 0.0) continue;
        for (int s = 0; s <= n; ++s) {
            if (slots[s].empty()) continue;
            std::vector<double> ds;
            for (int v : slots[s]) ds.push_back(k.delta[v]);
            if (s == 0)
                val *= outer_limit_final(ds, t_op[0]);
            else if (s == n)
                val *= outer_limit_initial(ds, t_op[n - 1]);
            else
                val *= simplex_exp_integral(ds, t_op[s], t_op[s - 1]);
        }
        acc += val;
    }
    return pref * acc;
}

cplx wightman_restricted(const GraphSet& gs, const std::vector<int>& alpha, const std::vector<Vec3>& p_op,
                         const std::vector<double>& t_op, const AdiabaticModel& m) {
    std::vector<const GraphSet::Entry*> sel;
    for (auto& e : gs.entries())
        if (e->alpha == alpha) sel.push_back(e.get());
    std::vector<cplx> vals(sel.size());
    parallel_for(int(sel.size()), m.threads, [&](int i) { vals[i] = evaluate_graph_adiabatic(*sel[i], p_op, t_op, m); });
    cplx s = 0.0;
    for (auto& v : vals) s += v;
    return s;
}

cplx green_time_sector(const GraphSet& gs, const std::vector<int>& sigma, const std::vector<Vec3>& p,
                       const std::vector<double>& t, const AdiabaticModel& m) {
    const int n = gs.n();
    std::vector<Vec3> p_op(n);
    std::vector<double> t_op(n);
    for (int k = 0; k < n; ++k) {
        p_op[k] = p[sigma[k]];
        t_op[k] = t[sigma[k]];
    }
    const auto& es = gs.entries();
    std::vector<cplx> vals(es.size());
    parallel_for(int(es.size()), m.threads, [&](int i) { vals[i] = evaluate_graph_adiabatic(*es[i], p_op, t_op, m); });
    cplx s = 0.0;
    for (auto& v : vals) s += v;
    return s;
}

cplx green_time_ordered(const GraphSet& gs, const std::vector<Vec3>& p, const std::vector<double>& t,
                        const AdiabaticModel& m) {
    const int n = gs.n();
    if (int(p.size()) != n || int(t.size()) != n) throw std::invalid_argument("green function: wrong number of externals");
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::stable_sort(sigma.begin(), sigma.end(), [&](int a, int b) { return t[a] > t[b]; });
    for (int k = 0; k + 1 < n; ++k)
        if (t[sigma[k]] == t[sigma[k + 1]]) throw std::invalid_argument("green function: coincident external times");
    return green_time_sector(gs, sigma, p, t, m);
}

// ------------------------------------------------------------------- smeared cut-off mode

double SmearedRequest::f(const Vec3& p) const {
    const double s2 = f_width * f_width;
    return std::pow(2.0 * kPi * s2, -1.5) * std::exp(-0.5 * norm2(p - f_center) / s2);
}

namespace {

cplx cutoff_value(const GraphSet::Entry& e, const SmearedRequest& req, const InteractionSpec& spec,
                  const TemporalCutoff& h, const CutoffProfile& prof, int gh_order) {
    const auto& g = e.graph;
    const int n = g.n;
    Vec3 psum{0, 0, 0};
    for (int i = 0; i + 1 < n; ++i) psum = psum + req.momenta[i];
    if (g.V() == 0) {
        if (n != 2) throw std::invalid_argument("cut-off mode: V = 0 needs n = 2");
        Vec3 p2 = -psum;
        const double w = spec.dispersion(p2);
        return req.f(p2) * std::exp(cplx(0.0, (g.alpha[0] * req.times[0] + g.alpha[1] * req.times[1]) * w)) /
               (spec.volume_factor * 2.0 * w) / double(g.sym_den);
    }
    const double M = spec.dispersion.mass;
    int v = -1;
    for (int i = 0; i < g.size(); ++i)
        if (!g.vertices[i].external) v = i;
    const int slot = g.vertices[v].slot;
    if ((slot == 0 || slot == n) && h.delta() > M / 2.0 * (1.0 + 1e-12))
        throw std::invalid_argument("cut-off mode: band limit exceeds M/(V+1)");
    SpectralProfile sp = spectral_profile(h, prof);
    Rule r = gauss_hermite(gh_order);
    const double c = std::sqrt(2.0) * prof.sigma_k / prof.L;
    cplx acc = 0.0;
    std::vector<Vec3> p(n), po, pi;
    for (int a = 0; a < gh_order; ++a)
        for (int b = 0; b < gh_order; ++b)
            for (int cc = 0; cc < gh_order; ++cc) {
                Vec3 kappa{c * r.x[a], c * r.x[b], c * r.x[cc]};
                for (int i = 0; i + 1 < n; ++i) p[i] = req.momenta[i];
                p[n - 1] = -psum - kappa;
                cplx val = r.w[a] * r.w[b] * r.w[cc] * req.f(p[n - 1]);
                po.clear();
                pi.clear();
                double d = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double w = spec.dispersion(p[i]);
                    val *= std::exp(cplx(0.0, g.alpha[i] * w * req.times[i])) / spec.leg_norm(p[i]);
                    if (g.alpha[i] > 0) {
                        pi.push_back(p[i]);
                        d -= w;
                    } else {
                        po.push_back(-p[i]);
                        d += w;
                    }
                }
                val *= cplx(0.0, -1.0) * spec.kernel(int(po.size()), int(pi.size()), po, pi);
                if (slot == 0)
                    val *= outer_time_factor_spectral(true, {d}, req.times[0], {sp}).value;
                else if (slot == n)
                    val *= outer_time_factor_spectral(false, {d}, req.times[n - 1], {sp}).value;
                else
                    val *= inner_time_factor_spectral({d}, req.times[slot], req.times[slot - 1], {sp});
                acc += val;
            }
    return acc * std::pow(kPi, -1.5) / double(g.sym_den);
}

}  // namespace

TimeValue evaluate_graph_cutoff(const GraphSet::Entry& e, const SmearedRequest& req, const InteractionSpec& spec,
                                const TemporalCutoff& h, const CutoffProfile& prof, int gh_order) {
    if (e.graph.V() > 1) throw std::invalid_argument("continuum cut-off mode supports V <= 1");
    if (int(req.momenta.size()) + 1 != e.graph.n || int(req.times.size()) != e.graph.n)
        throw std::invalid_argument("smeared request does not match the graph");
    cplx fine = cutoff_value(e, req, spec, h, prof, gh_order);
    if (e.graph.V() == 0) return {fine, 0.0};
    cplx coarse = cutoff_value(e, req, spec, h, prof, gh_order - 2);
    return {fine, std::abs(fine - coarse) + 1e-14 * std::abs(fine)};
}

cplx smeared_limit(const GraphSet::Entry& e, const SmearedRequest& req, const AdiabaticModel& m) {
    std::vector<Vec3> p(req.momenta);
    Vec3 psum{0, 0, 0};
    for (auto& q : p) psum = psum + q;
    p.push_back(-psum);
    return req.f(p.back()) * evaluate_graph_adiabatic(e, p, req.times, m);
}

ScanResult adiabatic_scan(const GraphSet::Entry& e, const SmearedRequest& req, const InteractionSpec& spec,
                          const TemporalCutoff& h, const CutoffProfile& base, const std::vector<double>& Ls,
                          const AdiabaticModel& m, int gh_order) {
    if (Ls.empty()) throw std::invalid_argument("adiabatic_scan: empty L list");
    for (std::size_t i = 1; i < Ls.size(); ++i)
        if (!(Ls[i] > Ls[i - 1])) throw std::invalid_argument("adiabatic_scan: L values must increase");
    ScanResult res;
    res.limit = smeared_limit(e, req, m);
    for (double L : Ls) {
        TimeValue tv = evaluate_graph_cutoff(e, req, spec, h, base.scaled(L), gh_order);
        res.rows.push_back({L, tv.value, tv.err, std::abs(tv.value - res.limit)});
    }
    // Richardson with 1/L^2 leading behaviour
    std::vector<cplx> R;
    std::vector<double> Rerr;
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        double r2 = std::pow(res.rows[i].L / res.rows[i - 1].L, 2);
        R.push_back((r2 * res.rows[i].value - res.rows[i - 1].value) / (r2 - 1.0));
        Rerr.push_back((r2 * res.rows[i].err + res.rows[i - 1].err) / (r2 - 1.0));
    }
    if (R.empty()) {
        res.extrapolated = res.rows.back().value;
        res.extrapolation_err = res.rows.back().gap;
    } else {
        res.extrapolated = R.back();
        res.extrapolation_err = Rerr.back() + (R.size() > 1 ? std::abs(R.back() - R[R.size() - 2]) : std::abs(R.back() - res.rows.back().value));
    }
    return res;
}

}  // namespace nlqft
