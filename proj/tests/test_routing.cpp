#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlqft/routing.hpp"

#include <random>
#include <stdexcept>

using namespace nlqft;

namespace {

Eigen::MatrixXd random_x(std::mt19937_64& rng, int rows) {
    std::normal_distribution<double> N;
    Eigen::MatrixXd x(rows, 3);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < 3; ++c) x(i, c) = N(rng);
    return x;
}

std::vector<FeynmanGraph> graphs_of(const InteractionSpec& s, int n, int V, bool vac = false) {
    std::vector<FeynmanGraph> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> a(n);
        for (int i = 0; i < n; ++i) a[i] = (mask >> i) & 1 ? 1 : -1;
        for (auto& v : slot_distributions(n, V))
            for (auto& g : enumerate_graphs(make_query(s, a, v, vac))) out.push_back(g);
    }
    return out;
}

// Delta per internal vertex straight from the edge list.
std::vector<double> hand_defects(const FeynmanGraph& g, const std::vector<Vec3>& mom, const Dispersion& d) {
    std::vector<double> out;
    for (int v = 0; v < g.size(); ++v) {
        if (g.vertices[v].external) continue;
        double s = 0;
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            if (g.edges[e].first == v) s += d(mom[e]);
            if (g.edges[e].second == v) s -= d(mom[e]);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("free graph routing") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto g = enumerate_graphs(make_query(phi3, {-1, 1}, {0, 0, 0}))[0];
    auto r = build_routing(g);
    CHECK(r.V == 0);
    CHECK(r.I == 0);
    CHECK((r.T - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
    CHECK(mass_gap_certificate(g, r, phi3.dispersion, 100, 1).pass);
}

TEST_CASE("sunset routing") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    std::mt19937_64 rng(8);
    for (auto& g : graphs_of(phi3, 2, 2)) {
        auto r = build_routing(g);
        CHECK(r.rank == 2);
        CHECK(r.D.rows() == 2);
        int nonzero = 0;
        for (double s : r.singular_values) nonzero += s > 1e-10;
        CHECK(nonzero == 2);
        Eigen::MatrixXd x = random_x(rng, r.I + r.n);
        CHECK((r.from_coords(r.to_coords(x)) - x).norm() < 1e-12);

        auto d1 = energy_defects(r, phi3.dispersion, x);
        auto d2 = energy_defects_kq(r, phi3.dispersion, r.to_coords(x));
        auto d3 = hand_defects(g, r.edge_momenta(x), phi3.dispersion);
        for (std::size_t k = 0; k < d1.size(); ++k) {
            CHECK(std::abs(d1[k] - d2[k]) < 1e-12);
            CHECK(std::abs(d1[k] - d3[k]) < 1e-12);
        }

        auto rep = mass_gap_certificate(g, r, phi3.dispersion, 10000, 2);
        CHECK(rep.pass);
        CHECK(rep.min_margin >= -1e-9);

        // kappa = 0 conserves the external momenta
        Eigen::MatrixXd kq = r.to_coords(x);
        kq.topRows(r.V).setZero();
        Eigen::MatrixXd x0 = r.from_coords(kq);
        CHECK(x0.bottomRows(r.n).colwise().sum().norm() < 1e-12);
    }
}

TEST_CASE("one two-leg vertex") {
    PresetParams pp;
    pp.legs = 2;
    auto phi2 = preset_interaction("quantum-wick-product", pp);
    std::mt19937_64 rng(1);
    for (auto& g : graphs_of(phi2, 2, 1)) {
        auto r = build_routing(g);
        REQUIRE(r.I == 0);
        Eigen::MatrixXd x = random_x(rng, 2);
        auto mom = r.edge_momenta(x);
        // kappa_u = outgoing minus incoming line momentum
        int u = r.internal_vertices[0];
        Vec3 want{0, 0, 0};
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            if (g.edges[e].first == u) want = want + mom[e];
            if (g.edges[e].second == u) want = want - mom[e];
        }
        Eigen::MatrixXd kq = r.to_coords(x);
        for (int c = 0; c < 3; ++c) CHECK(kq(0, c) == doctest::Approx(want[c]).epsilon(1e-12));
        kq.row(0).setZero();
        Eigen::MatrixXd x0 = r.from_coords(kq);
        CHECK((x0.row(0) + x0.row(1)).norm() < 1e-12);
        // equal momentum in and out of a through-going line: no energy defect
        if (g.v[1] == 1) CHECK(std::abs(energy_defects(r, phi2.dispersion, x0)[0]) < 1e-12);
    }
}

TEST_CASE("outer defects") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    const double M = phi3.dispersion.mass;
    // creation-only vertex with three lines leaving at rest
    bool saw_creation = false;
    for (auto& g : graphs_of(phi3, 2, 2)) {
        auto r = build_routing(g);
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(r.I + r.n, 3);
        auto d = energy_defects(r, phi3.dispersion, x);
        for (std::size_t k = 0; k < d.size(); ++k) {
            const auto& vx = g.vertices[r.internal_vertices[k]];
            if (vx.lp == 3) {
                saw_creation = true;
                CHECK(d[k] == doctest::Approx(3 * M));
            }
        }
        auto od = cumulative_outer_defects(g, d);
        if (g.v.front() == 0) CHECK(od.final_.empty());
        if (g.v.back() == 0) CHECK(od.initial.empty());
    }
    CHECK(saw_creation);

    // both sunset vertices after every external
    std::mt19937_64 rng(4);
    int seen = 0;
    for (auto& g : graphs_of(phi3, 2, 2)) {
        if (g.v.front() != 2) continue;
        ++seen;
        auto r = build_routing(g);
        for (int s = 0; s < 5; ++s) {
            Eigen::MatrixXd x = random_x(rng, r.I + r.n);
            auto mom = r.edge_momenta(x);
            auto d = hand_defects(g, mom, phi3.dispersion);
            auto od = cumulative_outer_defects(g, energy_defects(r, phi3.dispersion, x));
            REQUIRE(od.final_.size() == 2);
            CHECK(od.final_[0] == doctest::Approx(-d[0]).epsilon(1e-12));
            CHECK(od.final_[1] == doctest::Approx(-d[0] - d[1]).epsilon(1e-12));
            // the latest vertex only absorbs lines
            double absorbed = 0;
            for (std::size_t e = 0; e < g.edges.size(); ++e)
                if (g.edges[e].second == r.internal_vertices[0]) absorbed += phi3.dispersion(mom[e]);
            CHECK(od.final_[0] == doctest::Approx(absorbed).epsilon(1e-12));
        }
    }
    CHECK(seen > 0);
}

TEST_CASE("completion choice does not matter") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    std::vector<Vec3> p2{{0.1, 0, 0.2}, {-0.1, 0, -0.2}};
    for (auto& g : graphs_of(phi3, 2, 2)) {
        auto a = build_routing(g), b = build_routing(g, 99);
        CHECK((a.Q - b.Q).norm() > 1e-6);
        auto ca = loop_chart(a, p2), cb = loop_chart(b, p2);
        CHECK(ca.loops() == 1);
        CHECK((ca.x0 - cb.x0).norm() < 1e-12);
        CHECK((ca.B * ca.B.transpose() - cb.B * cb.B.transpose()).norm() < 1e-12);
        CHECK(ca.jacobian == doctest::Approx(cb.jacobian));
    }
    std::vector<Vec3> bad{{0.1, 0, 0}, {0.2, 0, 0}};
    auto g = graphs_of(phi3, 2, 2)[0];
    CHECK_THROWS_AS(loop_chart(build_routing(g), bad), std::invalid_argument);
}

TEST_CASE("rank and mass gap for small graphs") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto phi4 = preset_interaction("gaussian-phi4", {});
    long total = 0;
    for (auto* s : {&phi3, &phi4})
        for (int n = 1; n <= 4; ++n)
            for (int V = 0; V <= 2; ++V)
                for (auto& g : graphs_of(*s, n, V)) {
                    auto r = build_routing(g);
                    CHECK(r.rank == V);
                    ++total;
                    CHECK(mass_gap_certificate(g, r, s->dispersion, 200, 3).pass);
                }
    CHECK(total > 0);
}

TEST_CASE("vacuum component negative control") {
    auto phi3 = preset_interaction("gaussian-phi3", {});
    bool failed = false;
    for (auto& g : enumerate_graphs(make_query(phi3, {-1, 1}, {2, 0, 0}, true))) {
        if (vacuum_components(g).empty()) continue;
        CHECK_THROWS_AS(build_routing(g), std::runtime_error);
        auto r = build_routing(g, 0, true);
        CHECK(r.rank < r.V);
        auto rep = mass_gap_certificate(g, r, phi3.dispersion, 100, 5);
        if (!rep.pass) {
            failed = true;
            CHECK(rep.witness.find("Omega^f") != std::string::npos);
        }
    }
    CHECK(failed);
}
