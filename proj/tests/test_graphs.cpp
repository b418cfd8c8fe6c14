#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlqft/graphs.hpp"
#include "support.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

using namespace nlqft;

namespace {

std::vector<std::vector<int>> all_signs(int n) {
    std::vector<std::vector<int>> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> a(n);
        for (int i = 0; i < n; ++i) a[i] = (mask >> (n - 1 - i)) & 1 ? -1 : 1;
        out.push_back(a);
    }
    return out;
}

std::vector<FeynmanGraph> all_graphs(const InteractionSpec& s, int n, int V, bool total = true) {
    std::vector<FeynmanGraph> out;
    for (auto& a : all_signs(n))
        for (auto& v : slot_distributions(n, V))
            for (auto& g : enumerate_graphs(make_query(s, a, v, false, total))) out.push_back(g);
    return out;
}

// Undirected multigraphs on n degree-1 externals and V internal vertices of degree k, no
// self-loops and no component free of externals, counted up to permutations of the internals.
// Written independently of the enumerator: fills the upper triangle of the adjacency matrix.
long brute_force_topologies(int n, int V, int k) {
    const int N = n + V;
    std::vector<int> deg(N, 1);
    for (int i = n; i < N; ++i) deg[i] = k;
    std::vector<std::vector<int>> A(N, std::vector<int>(N, 0));
    std::set<std::vector<int>> classes;
    auto canonical = [&] {
        std::vector<int> perm(V);
        for (int i = 0; i < V; ++i) perm[i] = i;
        std::vector<int> best;
        do {
            std::vector<int> map(N);
            for (int i = 0; i < n; ++i) map[i] = i;
            for (int i = 0; i < V; ++i) map[n + i] = n + perm[i];
            std::vector<int> flat;
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) flat.push_back(A[map[i]][map[j]]);
            if (best.empty() || flat < best) best = flat;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    };
    auto no_vacuum = [&] {
        std::vector<int> seen(N, 0), stack;
        for (int i = 0; i < n; ++i) {
            seen[i] = 1;
            stack.push_back(i);
        }
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w = 0; w < N; ++w)
                if (A[u][w] && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        return std::all_of(seen.begin(), seen.end(), [](int s) { return s; });
    };
    std::vector<int> left = deg;
    std::function<void(int, int)> fill = [&](int i, int j) {
        if (i == N) {
            if (no_vacuum()) classes.insert(canonical());
            return;
        }
        if (j == N) {
            if (left[i] == 0) fill(i + 1, i + 2);
            return;
        }
        for (int m = 0; m <= std::min(left[i], left[j]); ++m) {
            A[i][j] = A[j][i] = m;
            left[i] -= m;
            left[j] -= m;
            fill(i, j + 1);
            left[i] += m;
            left[j] += m;
        }
        A[i][j] = A[j][i] = 0;
    };
    fill(0, 1);
    return long(classes.size());
}

}  // namespace

TEST_CASE("enumeration examples") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto free = enumerate_graphs(make_query(phi3, {-1, 1}, {0, 0, 0}));
    REQUIRE(free.size() == 1);
    CHECK(free[0].edges.size() == 1);
    CHECK(symmetry_factor(free[0]) == 1.0);
    CHECK(vacuum_components(free[0]).empty());
    CHECK(all_graphs(phi3, 2, 1).empty());

    auto sunset = all_graphs(phi3, 2, 2);
    std::set<std::string> keys;
    for (auto& g : sunset) keys.insert(topology_key(g));
    CHECK(keys.size() == 1);
    CHECK(long(keys.size()) == brute_force_topologies(2, 2, 3));
    for (auto& g : sunset) {
        CHECK(symmetry_factor(g) == 0.5);
        CHECK(vacuum_components(g).empty());
    }
}

TEST_CASE("topology counts against brute force") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto phi4 = preset_interaction("gaussian-phi4", {});
    struct Case {
        const InteractionSpec* s;
        int k, n, V;
    };
    for (Case c : {Case{&phi3, 3, 2, 2}, {&phi3, 3, 4, 2}, {&phi3, 3, 2, 4}, {&phi4, 4, 2, 1}, {&phi4, 4, 4, 1},
                   {&phi4, 4, 2, 2}, {&phi4, 4, 4, 2}}) {
        std::set<std::string> keys;
        for (auto& g : all_graphs(*c.s, c.n, c.V)) keys.insert(topology_key(g));
        CAPTURE(c.n);
        CAPTURE(c.V);
        CHECK(long(keys.size()) == brute_force_topologies(c.n, c.V, c.k));
    }
}

TEST_CASE("symmetry factors and vacuum components") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    // two phi^3 vertices joined by three lines: a pure vacuum graph
    auto vac = enumerate_graphs(make_query(phi3, {}, {2}, true));
    REQUIRE(vac.size() == 1);
    CHECK(symmetry_factor(vac[0]) == doctest::Approx(1.0 / 6.0));
    CHECK(automorphism_count(vac[0]) == 6);
    auto comps = vacuum_components(vac[0]);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].size() == 2);

    // free line plus that vacuum bubble
    int with_vac = 0;
    for (auto& v : slot_distributions(2, 2))
        for (auto& g : enumerate_graphs(make_query(phi3, {-1, 1}, v, true)))
            if (!vacuum_components(g).empty()) {
                ++with_vac;
                CHECK(vacuum_components(g)[0].size() == 2);
            }
    CHECK(with_vac > 0);
    for (auto& v : slot_distributions(2, 2))
        for (auto& g : enumerate_graphs(make_query(phi3, {-1, 1}, v, false))) CHECK(vacuum_components(g).empty());
}

TEST_CASE("invariants, serialization and orderings") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto phi4 = preset_interaction("gaussian-phi4", {});
    PresetParams pp;
    pp.legs = 2;
    auto phi2 = preset_interaction("quantum-wick-product", pp);
    for (auto* s : {&phi3, &phi4, &phi2})
        for (int n : {2, 4})
            for (int V = 0; V <= 2; ++V) {
                std::set<std::pair<int, int>> sup;
                for (auto& [key, f] : s->kernels) sup.insert(key);
                double total_weight = 0.0, partial_weight = 0.0;
                for (auto& g : all_graphs(*s, n, V)) {
                    CHECK(validate(g, sup) == "");
                    CHECK(parse_graph(serialize(g)) == g);
                    CHECK(total_orderings(g).size() == 1);
                    total_weight += symmetry_factor(g);
                }
                for (auto& g : all_graphs(*s, n, V, false)) {
                    CHECK(validate(g, sup) == "");
                    CHECK(parse_graph(serialize(g)) == g);
                    auto ords = total_orderings(g);
                    CHECK(long(ords.size()) == testing::brute_force_extensions(g.order()));
                    partial_weight += symmetry_factor(g) * double(ords.size());
                    for (auto& o : ords) CHECK(validate(with_total_order(g, o), sup) == "");
                }
                // summing partial orders over their extensions gives the totally ordered sum
                CHECK(partial_weight == doctest::Approx(total_weight));
            }

    // two incomparable vertices sharing a slot: e0 - u - e3 and e1 - w - e2 in slot 2
    bool found = false;
    for (auto& g : enumerate_graphs(make_query(phi2, {-1, -1, 1, 1}, {0, 0, 2, 0, 0}, false, false)))
        if (total_orderings(g).size() == 2) found = true;
    CHECK(found);
}

TEST_CASE("validation catches broken graphs") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto g = all_graphs(phi3, 2, 2)[0];
    auto loop = g;
    loop.edges.push_back({1, 1});
    CHECK(validate(loop) != "");
    auto reversed = g;
    for (auto& e : reversed.edges) std::swap(e.first, e.second);
    CHECK(validate(reversed) != "");
    auto extra = g;
    extra.edges.push_back({extra.edges.back().first, extra.external_vertex(0)});
    std::sort(extra.edges.begin(), extra.edges.end());
    CHECK(validate(extra) != "");
}

TEST_CASE("time reversal covariance of counts") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto phi4 = preset_interaction("gaussian-phi4", {});
    for (auto* s : {&phi3, &phi4})
        for (int n : {2, 3, 4})
            for (int V = 0; V <= 2; ++V)
                for (auto& a : all_signs(n))
                    for (auto& v : slot_distributions(n, V)) {
                        std::vector<int> ra(a.rbegin(), a.rend()), rv(v.rbegin(), v.rend());
                        for (auto& x : ra) x = -x;
                        CHECK(enumerate_graphs(make_query(*s, a, v)).size() ==
                              enumerate_graphs(make_query(*s, ra, rv)).size());
                    }
}
