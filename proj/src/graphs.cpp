#include "nlqft/graphs.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nlqft {

int FeynmanGraph::V() const {
    int c = 0;
    for (auto& x : vertices) c += !x.external;
    return c;
}

int FeynmanGraph::external_vertex(int label) const {
    for (int i = 0; i < size(); ++i)
        if (vertices[i].external && vertices[i].ext == label) return i;
    return -1;
}

std::vector<std::pair<std::pair<int, int>, int>> FeynmanGraph::edge_multiplicities() const {
    std::map<std::pair<int, int>, int> m;
    for (auto& e : edges) ++m[e];
    return {m.begin(), m.end()};
}

Poset FeynmanGraph::order() const {
    std::vector<std::pair<std::size_t, std::size_t>> rel;
    const int P = size();
    if (total) {
        for (int i = 0; i + 1 < P; ++i) rel.emplace_back(i + 1, i);
    } else {
        for (auto& e : edges) rel.emplace_back(e.first, e.second);
        for (int k = 0; k + 1 < n; ++k) rel.emplace_back(external_vertex(k + 1), external_vertex(k));
        for (int i = 0; i < P; ++i) {
            const auto& x = vertices[i];
            if (x.external) continue;
            if (x.slot >= 1) rel.emplace_back(i, external_vertex(x.slot - 1));
            if (x.slot <= n - 1) rel.emplace_back(external_vertex(x.slot), i);
        }
    }
    return Poset(P, rel);
}

GraphClassQuery make_query(const InteractionSpec& spec, const std::vector<int>& alpha, const std::vector<int>& v,
                           bool allow_vacuum, bool total) {
    GraphClassQuery q;
    q.n = int(alpha.size());
    q.alpha = alpha;
    q.v = v;
    for (auto& [key, f] : spec.kernels) q.supported.insert(key);
    q.allow_vacuum_components = allow_vacuum;
    q.require_total_order = total;
    return q;
}

std::vector<std::vector<int>> slot_distributions(int n, int V) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(n + 1, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (int k = left; k >= 0; --k) {
            cur[i] = k;
            rec(i + 1, left - k);
        }
    };
    rec(0, V);
    return out;
}

namespace {

std::vector<GraphVertex> layout(int n, const std::vector<int>& alpha, const std::vector<int>& v) {
    std::vector<GraphVertex> vs;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j < v[i]; ++j) {
            GraphVertex x;
            x.slot = i;
            vs.push_back(x);
        }
        if (i < n) {
            GraphVertex e;
            e.external = true;
            e.ext = i;
            e.alpha = alpha[i];
            (alpha[i] > 0 ? e.lp : e.l) = 1;
            vs.push_back(e);
        }
    }
    return vs;
}

long edge_perm_count(const FeynmanGraph& g) {
    long c = 1;
    for (auto& [e, m] : g.edge_multiplicities())
        for (int k = 2; k <= m; ++k) c *= k;
    return c;
}

std::vector<std::vector<int>> components(const FeynmanGraph& g) {
    std::vector<int> parent(g.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (auto& e : g.edges) parent[find(e.first)] = find(e.second);
    std::map<int, std::vector<int>> comp;
    for (int i = 0; i < g.size(); ++i) comp[find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& [r, c] : comp) out.push_back(c);
    return out;
}

// slot groups of internal vertex indices
std::vector<std::vector<int>> slot_groups(const FeynmanGraph& g) {
    std::vector<std::vector<int>> groups(g.n + 1);
    for (int i = 0; i < g.size(); ++i)
        if (!g.vertices[i].external) groups[g.vertices[i].slot].push_back(i);
    return groups;
}

// Calls f(perm) for every permutation of the vertices that only permutes within slots.
void for_each_slot_permutation(const FeynmanGraph& g, const std::function<void(const std::vector<int>&)>& f) {
    auto groups = slot_groups(g);
    std::vector<int> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> images = groups;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == groups.size()) {
            f(perm);
            return;
        }
        std::vector<int> img = groups[k];
        do {
            for (std::size_t j = 0; j < img.size(); ++j) perm[groups[k][j]] = img[j];
            rec(k + 1);
        } while (std::next_permutation(img.begin(), img.end()));
    };
    rec(0);
}

std::vector<std::pair<int, int>> mapped_edges(const FeynmanGraph& g, const std::vector<int>& perm) {
    std::vector<std::pair<int, int>> e;
    for (auto& [a, b] : g.edges) e.emplace_back(perm[a], perm[b]);
    std::sort(e.begin(), e.end());
    return e;
}

void recompute_degrees(FeynmanGraph& g) {
    for (auto& x : g.vertices)
        if (!x.external) x.lp = x.l = 0;
    for (auto& [a, b] : g.edges) {
        if (!g.vertices[a].external) ++g.vertices[a].lp;
        if (!g.vertices[b].external) ++g.vertices[b].l;
    }
}

}  // namespace

long automorphism_count(const FeynmanGraph& g) {
    long va = 0;
    if (g.total) {
        va = 1;
    } else {
        for_each_slot_permutation(g, [&](const std::vector<int>& perm) { va += mapped_edges(g, perm) == g.edges; });
    }
    return va * edge_perm_count(g);
}

double symmetry_factor(const FeynmanGraph& g) { return 1.0 / double(automorphism_count(g)); }

std::vector<std::vector<int>> vacuum_components(const FeynmanGraph& g) {
    std::vector<std::vector<int>> out;
    for (auto& c : components(g)) {
        bool ext = false;
        for (int i : c) ext |= g.vertices[i].external;
        if (!ext) out.push_back(c);
    }
    return out;
}

std::vector<FeynmanGraph> enumerate_graphs(const GraphClassQuery& q) {
    if (int(q.alpha.size()) != q.n || int(q.v.size()) != q.n + 1)
        throw std::invalid_argument("graph query: alpha needs n entries and v needs n+1");
    for (int a : q.alpha)
        if (a != 1 && a != -1) throw std::invalid_argument("graph query: alpha entries must be +1 or -1");
    const auto base = layout(q.n, q.alpha, q.v);
    const int P = int(base.size());
    std::set<int> valences;
    for (auto& [lp, l] : q.supported) valences.insert(lp + l);

    std::vector<int> internals;
    for (int i = 0; i < P; ++i)
        if (!base[i].external) internals.push_back(i);

    std::vector<FeynmanGraph> out;
    std::set<std::string> seen;
    std::vector<int> deg(P, 1);
    std::vector<std::vector<int>> m(P, std::vector<int>(P, 0));
    std::vector<int> rem;

    auto emit = [&]() {
        FeynmanGraph g;
        g.n = q.n;
        g.alpha = q.alpha;
        g.v = q.v;
        g.vertices = base;
        for (int i = 0; i < P; ++i)
            for (int j = i + 1; j < P; ++j)
                for (int k = 0; k < m[i][j]; ++k) g.edges.emplace_back(j, i);
        std::sort(g.edges.begin(), g.edges.end());
        // orientation of externals and supported splits
        std::vector<int> out_deg(P, 0), in_deg(P, 0);
        for (auto& [a, b] : g.edges) {
            ++out_deg[a];
            ++in_deg[b];
        }
        for (int i = 0; i < P; ++i) {
            auto& x = g.vertices[i];
            if (x.external) {
                if ((x.alpha > 0 && out_deg[i] != 1) || (x.alpha < 0 && in_deg[i] != 1)) return;
            } else {
                x.lp = out_deg[i];
                x.l = in_deg[i];
                if (!q.supported.count({x.lp, x.l})) return;
            }
        }
        if (!q.allow_vacuum_components && !vacuum_components(g).empty()) return;
        if (q.require_total_order) {
            g.sym_den = automorphism_count(g);
            out.push_back(std::move(g));
            return;
        }
        // quotient by within-slot relabelings: keep the lexicographically smallest image
        std::vector<std::pair<int, int>> best;
        std::vector<int> best_perm;
        g.total = false;
        for_each_slot_permutation(g, [&](const std::vector<int>& perm) {
            auto e = mapped_edges(g, perm);
            if (best_perm.empty() || e < best) {
                best = e;
                best_perm = perm;
            }
        });
        g.edges = best;
        recompute_degrees(g);
        std::string key = serialize(g);
        if (!seen.insert(key).second) return;
        g.sym_den = automorphism_count(g);
        out.push_back(std::move(g));
    };

    // fill the multiplicity matrix row by row
    std::function<void(int, int)> fill = [&](int i, int j) {
        if (i == P) {
            emit();
            return;
        }
        if (j == P) {
            if (rem[i] != 0) return;
            fill(i + 1, i + 2);
            return;
        }
        const int hi = std::min(rem[i], rem[j]);
        // the last partner must absorb everything that is left
        const int lo = (j == P - 1) ? rem[i] : 0;
        for (int k = lo; k <= hi; ++k) {
            m[i][j] = k;
            rem[i] -= k;
            rem[j] -= k;
            fill(i, j + 1);
            rem[i] += k;
            rem[j] += k;
        }
        m[i][j] = 0;
    };

    std::vector<int> vals(valences.begin(), valences.end());
    std::function<void(std::size_t)> choose = [&](std::size_t k) {
        if (k == internals.size()) {
            rem = deg;
            int total = std::accumulate(rem.begin(), rem.end(), 0);
            if (total % 2) return;
            if (P == 0) {
                emit();
                return;
            }
            fill(0, 1);
            return;
        }
        for (int d : vals) {
            deg[internals[k]] = d;
            choose(k + 1);
        }
    };
    if (!internals.empty() && vals.empty()) return out;
    choose(0);
    return out;
}

std::vector<std::vector<std::size_t>> total_orderings(const FeynmanGraph& g) { return linear_extensions(g.order()); }

FeynmanGraph with_total_order(const FeynmanGraph& g, const std::vector<std::size_t>& earliest_first) {
    const int P = g.size();
    if (int(earliest_first.size()) != P) throw std::invalid_argument("with_total_order: wrong order length");
    std::vector<int> pos(P);
    FeynmanGraph t = g;
    for (int k = 0; k < P; ++k) {
        int old = int(earliest_first[P - 1 - k]);
        pos[old] = k;
        t.vertices[k] = g.vertices[old];
    }
    t.edges.clear();
    for (auto& [a, b] : g.edges) t.edges.emplace_back(pos[a], pos[b]);
    std::sort(t.edges.begin(), t.edges.end());
    t.total = true;
    if (!validate(t).empty()) throw std::invalid_argument("with_total_order: order is not a linear extension");
    t.sym_den = automorphism_count(t);
    return t;
}

std::string topology_key(const FeynmanGraph& g, const std::vector<int>& ext_labels) {
    std::vector<int> ext_vertex(g.n, -1), ints;
    for (int i = 0; i < g.size(); ++i) {
        const auto& x = g.vertices[i];
        if (x.external)
            ext_vertex[ext_labels.empty() ? x.ext : ext_labels[x.ext]] = i;
        else
            ints.push_back(i);
    }
    const int P = g.size();
    std::vector<std::vector<int>> adj(P, std::vector<int>(P, 0));
    for (auto& [a, b] : g.edges) {
        ++adj[a][b];
        ++adj[b][a];
    }
    std::sort(ints.begin(), ints.end());
    std::string best;
    do {
        std::vector<int> ordv = ext_vertex;
        ordv.insert(ordv.end(), ints.begin(), ints.end());
        std::string s;
        for (int i = 0; i < P; ++i)
            for (int j = i + 1; j < P; ++j) s += char('0' + adj[ordv[i]][ordv[j]]);
        if (best.empty() || s < best) best = s;
    } while (std::next_permutation(ints.begin(), ints.end()));
    return "n" + std::to_string(g.n) + "V" + std::to_string(g.V()) + ":" + best;
}

std::string validate(const FeynmanGraph& g, const std::set<std::pair<int, int>>& supported) {
    const int P = g.size();
    if (int(g.alpha.size()) != g.n || int(g.v.size()) != g.n + 1) return "alpha/slot vector sizes";
    std::vector<int> out_deg(P, 0), in_deg(P, 0);
    for (auto& [a, b] : g.edges) {
        if (a < 0 || b < 0 || a >= P || b >= P) return "edge endpoint out of range";
        if (a == b) return "self-loop";
        ++out_deg[a];
        ++in_deg[b];
        if (g.total && !(a > b)) return "edge does not point from an earlier to a later position";
    }
    for (int i = 0; i < P; ++i) {
        const auto& x = g.vertices[i];
        if (x.external) {
            if (out_deg[i] + in_deg[i] != 1) return "external vertex degree is not 1";
            if ((x.alpha > 0) != (out_deg[i] == 1)) return "external orientation contradicts alpha";
        } else {
            if (x.lp != out_deg[i] || x.l != in_deg[i]) return "internal degree bookkeeping";
            if (!supported.empty() && !supported.count({x.lp, x.l})) return "unsupported vertex split";
        }
    }
    // slot layout
    int idx = 0;
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j < g.v[i]; ++j, ++idx)
            if (idx >= P || g.vertices[idx].external || g.vertices[idx].slot != i) return "slot layout";
        if (i < g.n) {
            if (idx >= P || !g.vertices[idx].external || g.vertices[idx].ext != i) return "external layout";
            ++idx;
        }
    }
    if (idx != P) return "slot layout";
    try {
        Poset p = g.order();
        for (auto& [a, b] : g.edges)
            if (!p.less(a, b)) return "edge orientation not in the order";
    } catch (const std::invalid_argument&) {
        return "order relations contain a cycle";
    }
    return "";
}

std::string serialize(const FeynmanGraph& g) {
    std::ostringstream os;
    os << "graph n=" << g.n << " V=" << g.V() << " order=" << (g.total ? "total" : "partial") << " sym=1/" << g.sym_den
       << "\n";
    os << "alpha";
    for (int a : g.alpha) os << ' ' << (a > 0 ? '+' : '-');
    os << "\nslots";
    for (int x : g.v) os << ' ' << x;
    os << "\nvertices";
    for (auto& x : g.vertices) {
        if (x.external)
            os << " E" << x.ext << (x.alpha > 0 ? '+' : '-');
        else
            os << " I" << x.slot << ':' << x.lp << ',' << x.l;
    }
    os << "\nedges";
    for (auto& [a, b] : g.edges) os << ' ' << a << '>' << b;
    os << "\nend\n";
    return os.str();
}

FeynmanGraph parse_graph(const std::string& text) {
    std::istringstream is(text);
    std::string line, tok;
    FeynmanGraph g;
    auto fail = [](const std::string& why) { throw std::invalid_argument("parse_graph: " + why); };
    if (!std::getline(is, line)) fail("empty input");
    {
        std::istringstream ls(line);
        ls >> tok;
        if (tok != "graph") fail("missing header");
        int V = 0;
        while (ls >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) fail("bad header field " + tok);
            std::string k = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (k == "n")
                g.n = std::stoi(val);
            else if (k == "V")
                V = std::stoi(val);
            else if (k == "order")
                g.total = val == "total";
            else if (k == "sym")
                g.sym_den = std::stol(val.substr(val.find('/') + 1));
        }
        (void)V;
    }
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        ls >> tok;
        if (tok == "end") break;
        if (tok == "alpha") {
            while (ls >> tok) g.alpha.push_back(tok == "+" ? 1 : -1);
        } else if (tok == "slots") {
            int x;
            while (ls >> x) g.v.push_back(x);
        } else if (tok == "vertices") {
            while (ls >> tok) {
                GraphVertex x;
                if (tok[0] == 'E') {
                    x.external = true;
                    x.ext = std::stoi(tok.substr(1, tok.size() - 2));
                    x.alpha = tok.back() == '+' ? 1 : -1;
                    (x.alpha > 0 ? x.lp : x.l) = 1;
                } else if (tok[0] == 'I') {
                    auto c = tok.find(':'), k = tok.find(',');
                    x.slot = std::stoi(tok.substr(1, c - 1));
                    x.lp = std::stoi(tok.substr(c + 1, k - c - 1));
                    x.l = std::stoi(tok.substr(k + 1));
                } else {
                    fail("bad vertex token " + tok);
                }
                g.vertices.push_back(x);
            }
        } else if (tok == "edges") {
            while (ls >> tok) {
                auto gt = tok.find('>');
                if (gt == std::string::npos) fail("bad edge token " + tok);
                g.edges.emplace_back(std::stoi(tok.substr(0, gt)), std::stoi(tok.substr(gt + 1)));
            }
        } else {
            fail("unknown line " + tok);
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

}  // namespace nlqft
