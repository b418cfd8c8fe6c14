#include "nlqft/presentations.hpp"

#include "nlqft/combinatorics.hpp"
#include "nlqft/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nlqft {

namespace {

cplx ipow(int k) {
    static const cplx tab[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    return tab[((k % 4) + 4) % 4];
}

std::vector<Vec3> loop_vectors(const std::vector<double>& x, int L) {
    std::vector<Vec3> ell(L);
    for (int j = 0; j < L; ++j) ell[j] = {x[3 * j], x[3 * j + 1], x[3 * j + 2]};
    return ell;
}

// One acyclic orientation of an undirected graph, relative to the reference edges of rep.
struct Orientation {
    std::vector<int> o;                       // +1 keeps the reference direction
    std::vector<std::vector<int>> out, in;    // per vertex, edges leaving towards later / arriving
    std::vector<int> alpha;                   // per external label
    std::vector<std::vector<std::vector<int>>> slots;  // per linear extension: slot -> vertices, latest first
};

std::vector<Orientation> orientations(const FeynmanGraph& g, const InteractionSpec& spec,
                                      const std::vector<int>* ext_time_order, bool need_extensions) {
    const int E = int(g.edges.size());
    const int P = g.size();
    std::vector<Orientation> res;
    for (long mask = 0; mask < (1L << E); ++mask) {
        Orientation ori;
        ori.o.assign(E, 1);
        ori.out.assign(P, {});
        ori.in.assign(P, {});
        ori.alpha.assign(g.n, 0);
        std::vector<std::pair<std::size_t, std::size_t>> rel;
        for (int e = 0; e < E; ++e) {
            int a = g.edges[e].first, b = g.edges[e].second;
            if (mask >> e & 1) {
                ori.o[e] = -1;
                std::swap(a, b);
            }
            ori.out[a].push_back(e);
            ori.in[b].push_back(e);
            rel.emplace_back(a, b);
        }
        bool ok = true;
        for (int v = 0; v < P && ok; ++v) {
            const auto& gv = g.vertices[v];
            if (gv.external)
                ori.alpha[gv.ext] = ori.out[v].empty() ? -1 : 1;
            else
                ok = spec.has(int(ori.out[v].size()), int(ori.in[v].size()));
        }
        if (!ok) continue;
        if (need_extensions) {
            // external chain, earliest first
            const auto& order = *ext_time_order;
            for (std::size_t k = 0; k + 1 < order.size(); ++k)
                rel.emplace_back(g.external_vertex(order[k]), g.external_vertex(order[k + 1]));
            Poset ps;
            try {
                ps = Poset(P, rel);
            } catch (const std::invalid_argument&) {
                continue;  // directed cycle
            }
            for (auto& ext : linear_extensions(ps)) {
                std::vector<std::vector<int>> slots(g.n + 1);
                int s = 0;
                for (int k = P - 1; k >= 0; --k) {
                    int v = int(ext[k]);
                    if (g.vertices[v].external)
                        ++s;
                    else
                        slots[s].push_back(v);
                }
                ori.slots.push_back(std::move(slots));
            }
        }
        res.push_back(std::move(ori));
    }
    return res;
}

cplx vertex_product(const FeynmanGraph& g, const InteractionSpec& spec, const Orientation& ori,
                    const std::vector<Vec3>& edge_p, std::vector<double>* delta, const std::vector<double>& edge_w) {
    cplx val = 1.0;
    std::vector<Vec3> po, pi;
    for (int v = 0; v < g.size(); ++v) {
        if (g.vertices[v].external) continue;
        po.clear();
        pi.clear();
        double d = 0.0;
        for (int e : ori.out[v]) {
            po.push_back(double(ori.o[e]) * edge_p[e]);
            d += edge_w[e];
        }
        for (int e : ori.in[v]) {
            pi.push_back(double(ori.o[e]) * edge_p[e]);
            d -= edge_w[e];
        }
        if (delta) (*delta)[v] = d;
        val *= spec.kernel(int(po.size()), int(pi.size()), po, pi);
    }
    return val;
}

}  // namespace

// ------------------------------------------------------------------------- undirected set

UndirectedSet::UndirectedSet(const GraphSet& gs) {
    std::map<std::string, const GraphSet::Entry*> reps;
    for (auto& e : gs.entries()) {
        std::string key = topology_key(e->graph);
        if (!reps.count(key)) reps[key] = e.get();
    }
    for (auto& [key, rep] : reps) {
        UndirectedGraph ug;
        ug.rep = rep;
        const auto& g = rep->graph;
        const int P = g.size();
        ug.adjacency.assign(P, std::vector<int>(P, 0));
        for (auto& [a, b] : g.edges) {
            ++ug.adjacency[a][b];
            ++ug.adjacency[b][a];
        }
        for (int a = 0; a < P; ++a)
            for (int b = a + 1; b < P; ++b) ug.mult_den *= long(factorial(unsigned(ug.adjacency[a][b])));
        std::vector<int> internal;
        for (int i = 0; i < P; ++i)
            if (!g.vertices[i].external) internal.push_back(i);
        ug.aut = 0;
        for (auto& perm : permutations(int(internal.size()))) {
            std::vector<int> map(P);
            std::iota(map.begin(), map.end(), 0);
            for (std::size_t k = 0; k < internal.size(); ++k) map[internal[k]] = internal[perm[k]];
            bool same = true;
            for (int a = 0; a < P && same; ++a)
                for (int b = 0; b < P && same; ++b) same = ug.adjacency[a][b] == ug.adjacency[map[a]][map[b]];
            ug.aut += same;
        }
        graphs_.push_back(std::move(ug));
    }
}

// ---------------------------------------------------------------------- time, unordered

cplx green_time_unordered(const UndirectedSet& us, const std::vector<Vec3>& p, const std::vector<double>& t,
                          const AdiabaticModel& m) {
    const auto& spec = *m.spec;
    if (us.graphs().empty()) return 0.0;
    const int n = us.graphs().front().rep->graph.n;
    if (int(p.size()) != n || int(t.size()) != n) throw std::invalid_argument("green function: wrong number of externals");
    std::vector<int> by_time(n);  // earliest first
    std::iota(by_time.begin(), by_time.end(), 0);
    std::stable_sort(by_time.begin(), by_time.end(), [&](int a, int b) { return t[a] < t[b]; });
    for (int k = 0; k + 1 < n; ++k)
        if (t[by_time[k]] == t[by_time[k + 1]]) throw std::invalid_argument("green function: coincident external times");
    std::vector<double> t_desc(n);
    for (int k = 0; k < n; ++k) t_desc[k] = t[by_time[n - 1 - k]];

    std::vector<cplx> vals(us.graphs().size());
    parallel_for(int(us.graphs().size()), m.threads, [&](int gi) {
        const auto& ug = us.graphs()[gi];
        const auto& g = ug.rep->graph;
        auto oris = orientations(g, spec, &by_time, true);
        LoopChart ch = loop_chart(ug.rep->routing, p);
        ProductRule rule = hermite_product(m.gh_order, 3 * ch.loops(), m.scale());
        cplx acc = 0.0;
        std::vector<double> delta(g.size(), 0.0);
        for (std::size_t q = 0; q < rule.w.size(); ++q) {
            Kinematics k = kinematics(g, ug.rep->routing, spec.dispersion, ch.point(loop_vectors(rule.x[q], ch.loops())));
            cplx node = 0.0;
            for (auto& ori : oris) {
                if (ori.slots.empty()) continue;
                cplx val = vertex_product(g, spec, ori, k.edge_p, &delta, k.edge_w);
                if (val == 0.0) continue;
                for (int i = 0; i < n; ++i) {
                    const double w = spec.dispersion(p[i]);
                    val *= std::exp(cplx(0.0, ori.alpha[i] * w * t[i])) / spec.leg_norm(p[i]);
                }
                cplx ext_sum = 0.0;
                for (auto& slots : ori.slots) {
                    cplx tv = 1.0;
                    for (int s = 0; s <= n; ++s) {
                        if (slots[s].empty()) continue;
                        std::vector<double> ds;
                        for (int v : slots[s]) ds.push_back(delta[v]);
                        if (s == 0)
                            tv *= outer_limit_final(ds, t_desc[0]);
                        else if (s == n)
                            tv *= outer_limit_initial(ds, t_desc[n - 1]);
                        else
                            tv *= simplex_exp_integral(ds, t_desc[s], t_desc[s - 1]);
                    }
                    ext_sum += tv;
                }
                node += val * ext_sum;
            }
            acc += rule.w[q] * node;
        }
        vals[gi] = acc * ipow(-g.V()) * ch.jacobian / double(ug.aut * ug.mult_den);
    });
    cplx s = 0.0;
    for (auto& v : vals) s += v;
    return s;
}

// ----------------------------------------------------------------------- energy, ordered

std::vector<cplx> laplace_energies(const std::vector<cplx>& Z) {
    const int n = int(Z.size()) + 1;
    std::vector<cplx> w(n);
    w[0] = Z[0];
    for (int k = 1; k + 1 < n; ++k) w[k] = Z[k] - Z[k - 1];
    w[n - 1] = -Z[n - 2];
    return w;
}

cplx green_energy_ordered(const GraphSet& gs, const std::vector<Vec3>& p, const std::vector<cplx>& w,
                          const AdiabaticModel& m, const std::vector<int>& sigma, double eps_pole) {
    const auto& spec = *m.spec;
    const int n = gs.n();
    if (int(p.size()) != n || int(w.size()) != n) throw std::invalid_argument("green function: wrong number of externals");
    cplx wsum = 0.0;
    double wabs = 0.0;
    bool real = true;
    for (auto& x : w) {
        wsum += x;
        wabs += std::abs(x);
        real = real && x.imag() == 0.0;
    }
    if (std::abs(wsum) > 1e-12 * (1.0 + wabs)) throw std::invalid_argument("energy presentation needs sum of energies = 0");
    std::vector<std::vector<int>> sectors = sigma.empty() ? permutations(n) : std::vector<std::vector<int>>{sigma};
    const double pole_floor = eps_pole * spec.dispersion.mass;
    const auto& es = gs.entries();
    std::vector<cplx> vals(es.size(), 0.0);
    parallel_for(int(es.size()), m.threads, [&](int ei) {
        const auto& e = *es[ei];
        const auto& g = e.graph;
        const int N = g.size();
        for (auto& sg : sectors) {
            std::vector<Vec3> p_op(n);
            std::vector<cplx> w_op(n);
            for (int k = 0; k < n; ++k) {
                p_op[k] = p[sg[k]];
                w_op[k] = w[sg[k]];
            }
            LoopChart ch = loop_chart(e.routing, p_op);
            ProductRule rule = hermite_product(m.gh_order, 3 * ch.loops(), m.scale());
            cplx pref = ipow(-g.V()) / double(g.sym_den) * ch.jacobian;
            std::vector<cplx> ext_omega(n);
            for (int k = 0; k < n; ++k) {
                pref /= spec.leg_norm(p_op[k]);
                ext_omega[k] = double(g.alpha[k]) * spec.dispersion(p_op[k]) + w_op[k];
            }
            cplx acc = 0.0;
            std::vector<Vec3> po, pi;
            for (std::size_t q = 0; q < rule.w.size(); ++q) {
                Kinematics k = kinematics(g, e.routing, spec.dispersion, ch.point(loop_vectors(rule.x[q], ch.loops())));
                cplx val = rule.w[q];
                for (int v = 0; v < N && val != 0.0; ++v) {
                    if (g.vertices[v].external) continue;
                    po.clear();
                    pi.clear();
                    for (std::size_t ed = 0; ed < g.edges.size(); ++ed) {
                        if (g.edges[ed].first == v) po.push_back(k.edge_p[ed]);
                        if (g.edges[ed].second == v) pi.push_back(k.edge_p[ed]);
                    }
                    val *= spec.kernel(int(po.size()), int(pi.size()), po, pi);
                }
                if (val == 0.0) continue;
                cplx A = 0.0;
                for (int j = 0; j + 1 < N; ++j) {
                    const auto& gv = g.vertices[j];
                    A += gv.external ? ext_omega[gv.ext] : cplx(k.delta[j]);
                    if (real && std::abs(A) < pole_floor) {
                        std::ostringstream os;
                        os << "energy denominator " << std::abs(A) << " below " << pole_floor
                           << " at partial sum over the latest " << j + 1 << " vertices";
                        throw std::domain_error(os.str());
                    }
                    val *= cplx(0.0, 1.0) / A;
                }
                acc += val;
            }
            vals[ei] += pref * acc;
        }
    });
    cplx s = 0.0;
    for (auto& v : vals) s += v;
    return s;
}

// --------------------------------------------------------------------- energy, unordered

namespace {

struct Denominator {
    std::vector<double> a;  // coefficients of the loop energies
    double b = 0.0;
    double h = 0.0;         // coefficient of the infinitesimal i eta
};

// sum over upper-half-plane residues, variable by variable; returns sum of residues only
cplx residue_sum(const std::vector<Denominator>& f, int j, int L) {
    if (j == L) {
        cplx v = 1.0;
        for (auto& d : f) {
            double scale = std::max(1.0, std::abs(d.b));
            if (std::abs(d.b) < 1e-11 * scale) throw std::domain_error("energy presentation: pinched denominator");
            v /= d.b;
        }
        return v;
    }
    int dep = 0;
    for (auto& d : f) dep += std::abs(d.a[j]) > 1e-12;
    if (dep < 2) throw std::domain_error("energy presentation: loop energy integral does not converge");
    cplx total = 0.0;
    for (std::size_t f0 = 0; f0 < f.size(); ++f0) {
        const auto& p = f[f0];
        if (std::abs(p.a[j]) <= 1e-12 || !(p.a[j] * p.h < 0.0)) continue;
        std::vector<Denominator> g;
        g.reserve(f.size() - 1);
        for (std::size_t e = 0; e < f.size(); ++e) {
            if (e == f0) continue;
            Denominator d = f[e];
            const double r = std::abs(d.a[j]) > 1e-12 ? d.a[j] / p.a[j] : 0.0;
            for (int c = 0; c < L; ++c) d.a[c] -= r * p.a[c];
            d.a[j] = 0.0;
            d.b -= r * p.b;
            d.h -= r * p.h;
            g.push_back(std::move(d));
        }
        total += residue_sum(g, j + 1, L) / p.a[j];
    }
    return total;
}

}  // namespace

cplx green_energy_unordered(const UndirectedSet& us, const std::vector<Vec3>& p, const std::vector<double>& w,
                            const AdiabaticModel& m, std::uint64_t eta_seed) {
    const auto& spec = *m.spec;
    if (us.graphs().empty()) return 0.0;
    const int n = us.graphs().front().rep->graph.n;
    if (int(p.size()) != n || int(w.size()) != n) throw std::invalid_argument("green function: wrong number of externals");
    double wsum = 0.0, wabs = 0.0;
    for (double x : w) {
        wsum += x;
        wabs += std::abs(x);
    }
    if (std::abs(wsum) > 1e-12 * (1.0 + wabs)) throw std::invalid_argument("energy presentation needs sum of energies = 0");

    std::vector<cplx> vals(us.graphs().size());
    parallel_for(int(us.graphs().size()), m.threads, [&](int gi) {
        const auto& ug = us.graphs()[gi];
        const auto& g = ug.rep->graph;
        const int E = int(g.edges.size());
        auto oris = orientations(g, spec, nullptr, false);

        // energy conservation at internal vertices, reference directions of rep
        std::vector<int> internal, int_edges;
        std::vector<int> row(g.size(), -1), col(E, -1);
        for (int v = 0; v < g.size(); ++v)
            if (!g.vertices[v].external) {
                row[v] = int(internal.size());
                internal.push_back(v);
            }
        std::vector<double> eps0(E, 0.0);
        for (int e = 0; e < E; ++e) {
            auto [a, b] = g.edges[e];
            if (g.vertices[b].external)
                eps0[e] = w[g.vertices[b].ext];
            else if (g.vertices[a].external)
                eps0[e] = -w[g.vertices[a].ext];
            else {
                col[e] = int(int_edges.size());
                int_edges.push_back(e);
            }
        }
        const int V = int(internal.size()), I = int(int_edges.size());
        Eigen::MatrixXd C(I, 0);
        double JE = 1.0;
        if (I > 0) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(V, I);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(V);
            for (int e = 0; e < E; ++e) {
                auto [a, b] = g.edges[e];
                if (col[e] >= 0) {
                    M(row[b], col[e]) += 1.0;
                    M(row[a], col[e]) -= 1.0;
                } else {
                    if (row[b] >= 0) rhs[row[b]] -= eps0[e];
                    if (row[a] >= 0) rhs[row[a]] += eps0[e];
                }
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
            svd.setThreshold(1e-10);
            Eigen::VectorXd x = svd.solve(rhs);
            if ((M * x - rhs).norm() > 1e-9 * (1.0 + rhs.norm()))
                throw std::invalid_argument("energy presentation: inconsistent energy conservation");
            for (int c = 0; c < I; ++c) eps0[int_edges[c]] = x[c];
            const int rk = int(svd.rank());
            C = svd.matrixV().rightCols(I - rk);
            Eigen::MatrixXd Mr = M.topRows(V - 1);
            JE = 1.0 / std::sqrt((Mr * Mr.transpose()).determinant());
        }
        const int L = int(C.cols());
        std::mt19937_64 rng(eta_seed + 1000003ULL * std::uint64_t(gi));
        std::uniform_real_distribution<double> unif(0.5, 1.5);
        std::vector<double> eta(E);
        for (auto& x : eta) x = unif(rng);

        LoopChart ch = loop_chart(ug.rep->routing, p);
        ProductRule rule = hermite_product(m.gh_order, 3 * ch.loops(), m.scale());
        cplx ext_norm = 1.0;
        for (int i = 0; i < n; ++i) ext_norm /= spec.leg_norm(p[i]);
        cplx acc = 0.0;
        std::vector<Denominator> dens(E);
        for (std::size_t q = 0; q < rule.w.size(); ++q) {
            Kinematics k = kinematics(g, ug.rep->routing, spec.dispersion, ch.point(loop_vectors(rule.x[q], ch.loops())));
            cplx node = 0.0;
            for (auto& ori : oris) {
                cplx val = vertex_product(g, spec, ori, k.edge_p, nullptr, k.edge_w);
                if (val == 0.0) continue;
                for (int e = 0; e < E; ++e) {
                    auto& d = dens[e];
                    d.a.assign(L, 0.0);
                    if (col[e] >= 0)
                        for (int c = 0; c < L; ++c) d.a[c] = ori.o[e] * C(col[e], c);
                    d.b = ori.o[e] * eps0[e] - k.edge_w[e];
                    d.h = eta[e];
                }
                node += val * residue_sum(dens, 0, L);
            }
            acc += rule.w[q] * node;
        }
        vals[gi] = acc * ext_norm * ipow(-g.V()) * ipow(E) * ipow(L) * JE * ch.jacobian / double(ug.aut * ug.mult_den);
    });
    cplx s = 0.0;
    for (auto& v : vals) s += v;
    return s;
}

// -------------------------------------------------------------------------------- Laplace

LaplaceResult laplace_sector(const GraphSet& gs, const std::vector<int>& sigma, const std::vector<Vec3>& p,
                             const std::vector<cplx>& Z, const AdiabaticModel& m, double rel_tol) {
    const int n = gs.n();
    if (n < 2 || int(Z.size()) != n - 1 || int(sigma.size()) != n)
        throw std::invalid_argument("laplace_sector: needs n >= 2, n-1 Laplace variables and a sector");
    for (auto& z : Z)
        if (!(z.imag() > 0.0)) throw std::invalid_argument("laplace_sector: Laplace variables need Im Z > 0");
    auto G = [&](const std::vector<double>& s) {
        std::vector<double> t(n, 0.0);
        double acc = 0.0;
        for (int k = n - 2; k >= 0; --k) {
            acc += s[k];
            t[sigma[k]] = acc;
        }
        t[sigma[n - 1]] = 0.0;
        cplx ph = 0.0;
        for (int k = 0; k + 1 < n; ++k) ph += Z[k] * s[k];
        return std::exp(cplx(0.0, 1.0) * ph) * green_time_sector(gs, sigma, p, t, m);
    };
    LaplaceResult res;
    if (n == 2) {
        QuadResult r = integrate_adaptive([&](double s) { return G({s}); }, 0.0, kInf, rel_tol, 0.0, 2000);
        res.value = r.value;
        res.err = r.err;
        return res;
    }
    // tensor Gauss-Legendre on s = u/((1-u) Im Z) at two resolutions
    auto tensor = [&](int order) {
        Rule r = gauss_legendre(order);
        const int d = n - 1;
        std::vector<int> idx(d, 0);
        std::vector<double> s(d);
        cplx acc = 0.0;
        while (true) {
            double wgt = 1.0;
            for (int c = 0; c < d; ++c) {
                double u = 0.5 * (r.x[idx[c]] + 1.0);
                const double sc = 1.0 / Z[c].imag();  // decay length of this axis
                s[c] = sc * u / (1.0 - u);
                wgt *= 0.5 * sc * r.w[idx[c]] / ((1.0 - u) * (1.0 - u));
            }
            acc += wgt * G(s);
            int c = 0;
            while (c < d && ++idx[c] == order) idx[c++] = 0;
            if (c == d) break;
        }
        return acc;
    };
    // convergence in the order is geometric but slow (ratio ~5 per ten nodes), so the
    // coarse rule sits well below the fine one to keep the difference an upper bound
    cplx fine = tensor(60), coarse = tensor(40);
    res.value = fine;
    res.err = std::abs(fine - coarse);
    return res;
}

}  // namespace nlqft
