#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlqft/evaluator.hpp"
#include "nlqft/presentations.hpp"
#include "nlqft/quadrature.hpp"

#include <cmath>
#include <stdexcept>

using namespace nlqft;

TEST_CASE("simplex and slot integrals") {
    std::vector<double> b{0.7, -1.3, 0.6};
    auto one = [](double) { return 1.0; };
    cplx ex = simplex_exp_integral(b, -0.4, 1.1);
    auto nu = slot_time_integral(b, -0.4, 1.1, one, 1e-12);
    CHECK(std::abs(ex - nu.value) < 1e-10);
    // a vanishing partial sum takes the polynomial branch
    std::vector<double> b0{0.7, -0.7, 0.0};
    CHECK(std::abs(simplex_exp_integral(b0, -0.4, 1.1) - slot_time_integral(b0, -0.4, 1.1, one, 1e-12).value) < 1e-10);
    CHECK(simplex_exp_integral({}, 0.0, 1.0) == cplx(1.0));
    CHECK(std::abs(simplex_exp_integral({0.0, 0.0}, 0.0, 2.0) - 2.0) < 1e-14);  // area of the triangle

    // adiabatic outer factors against a slowly switched-off numerical integral
    std::vector<double> d{-2.0, -1.5};
    auto slow = [](double t) { return std::exp(-1e-4 * t * t); };
    CHECK(std::abs(outer_limit_final(d, 0.3) - slot_time_integral(d, 0.3, kInf, slow, 1e-10).value) < 1e-4);
    std::vector<double> di{1.5, 2.0};
    CHECK(std::abs(outer_limit_initial(di, 0.3) - slot_time_integral(di, -kInf, 0.3, slow, 1e-10).value) < 1e-4);
}

TEST_CASE("band-limited time factors") {
    TemporalCutoff h(0.45);
    CHECK(inner_time_factor(h, {}, {}, -0.5, 1.2).value == cplx(1.0));
    CHECK(std::abs(inner_time_factor(h, {0.8}, {0.1}, 0.7, 0.7).value) == 0.0);
    auto in = inner_time_factor(h, {0.8}, {0.1}, -0.5, 1.2, 1e-12);
    auto ref = integrate_adaptive([&](double s) { return std::exp(cplx(0, 0.8 * s)) * h.h(s - 0.1); }, -0.5, 1.2, 1e-13);
    CHECK(std::abs(in.value - ref.value) < 1e-8);
    CHECK(std::abs(inner_time_factor_spectral({0.8}, -0.5, 1.2, {spectral_profile(h, 0.1)}) - ref.value) < 1e-8);

    CHECK(outer_time_factor(true, h, {}, {}, 0.5, 1, 1.0).value == cplx(1.0));
    auto o = outer_time_factor(true, h, {-2.0}, {0.2}, 0.5, 1, 1.0);
    auto td = integrate_adaptive([&](double s) { return std::exp(cplx(0, -2.0 * s)) * h.h(s - 0.2); }, 0.5, kInf, 1e-12);
    CHECK(std::abs(o.value - td.value) < 1e-6);
    auto oi = outer_time_factor(false, h, {1.7}, {-0.3}, -0.1, 1, 1.0);
    auto tdi = integrate_adaptive([&](double s) { return std::exp(cplx(0, 1.7 * s)) * h.h(s + 0.3); }, -kInf, -0.1, 1e-12);
    CHECK(std::abs(oi.value - tdi.value) < 1e-6);

    // denominators stay above M/(V+1) for partial sums that respect the mass gap
    const double M = 1.0;
    const int V = 2;
    TemporalCutoff h3(M / (V + 1));
    auto f2 = outer_time_factor(true, h3, {-1.2, -0.3}, {0.0, 0.4}, 0.2, V, M);
    CHECK(f2.min_denominator >= M / (V + 1) - 1e-9);
    auto i2 = outer_time_factor(false, h3, {0.3, 1.1}, {0.0, -0.4}, 0.2, V, M);
    CHECK(i2.min_denominator >= M / (V + 1) - 1e-9);
    CHECK_THROWS_AS(outer_time_factor(true, TemporalCutoff(0.6), {-2.0}, {0.0}, 0.0, 1, 1.0), std::invalid_argument);
}

namespace {

struct GridSetup {
    InteractionSpec spec;
    MomentumGrid grid = make_line_grid(1, 0.7);
    FockSpace space{grid, 4};
    OracleContext ctx;
    GridModel gm;
    explicit GridSetup(const std::string& preset) : spec(preset_interaction(preset, {})) {
        auto spatial = [](const Vec3& k) { return std::exp(-0.5 * norm2(k)); };
        auto temporal = [](double t) { return std::exp(-0.5 * t * t / 4.0); };
        ctx.space = &space;
        ctx.spec = &spec;
        ctx.spatial = spatial;
        ctx.temporal = temporal;
        ctx.panels = 32;
        ctx.build();
        gm.spec = &spec;
        gm.grid = &grid;
        gm.spatial = spatial;
        gm.temporal = temporal;
        gm.rel_tol = 1e-9;
    }
};

}  // namespace

TEST_CASE("grid engine against the oracle, sunset order") {
    GridSetup s("gaussian-phi3");
    GridPoint pt{{-1, 1}, {0.4, -0.3}, {2, 0}};
    auto cg = correlator_grid(pt, 2, s.gm);
    auto orc = correlator_oracle({pt.alpha, pt.times, pt.momenta, 2}, s.ctx);
    for (int k = 0; k <= 2; ++k) {
        CAPTURE(k);
        double gap = std::abs(cg.value[k] - orc.value[k]);
        CHECK(gap <= 3 * (cg.err[k] + orc.err[k]) + 1e-12 * std::abs(orc.value[k]));
        CHECK(gap <= 1e-6 * std::abs(orc.value[k]) + 1e-300);
    }
    CHECK(cg.value[1] == cplx(0.0));
    // per-graph breakdown adds up
    cplx sum2 = 0.0;
    for (auto& gc : cg.graphs)
        if (gc.order == 2) sum2 += gc.value;
    CHECK(std::abs(sum2 - cg.value[2]) < 1e-12 * std::abs(cg.value[2]));

    auto vf = vacuum_factorization(pt, 2, s.gm);
    for (int k = 0; k <= 2; ++k) CHECK(vf.rel_gap[k] < 1e-8);
    CHECK(std::abs(vf.vac[2]) > 0.0);
}

TEST_CASE("parity zeros") {
    GridSetup s4("gaussian-phi4");
    auto odd = correlator_grid({{-1, 1, 1}, {0.5, 0.1, -0.2}, {2, 1, 1}}, 1, s4.gm);
    for (auto v : odd.value) CHECK(v == cplx(0.0));
    GridSetup s3("gaussian-phi3");
    auto two = correlator_grid({{-1, 1}, {0.5, -0.2}, {1, 1}}, 1, s3.gm);
    CHECK(two.value[1] == cplx(0.0));
}

TEST_CASE("adiabatic free two-point function and Green assembly") {
    PresetParams pp;
    pp.volume_factor = 1.0;
    auto spec = preset_interaction("gaussian-phi3", pp);
    GraphSet gs(spec, 2, 0);
    AdiabaticModel m;
    m.spec = &spec;
    Vec3 p{0.3, -0.1, 0.2};
    const double w = spec.dispersion(p);
    const double t1 = 0.7, t2 = -0.4;
    // p_k flows into the graph: the annihilator field at t1 sees -p, the creator field p
    cplx wm = wightman_restricted(gs, {-1, 1}, {-p, p}, {t1, t2}, m);
    cplx want = std::exp(cplx(0, -w * (t1 - t2))) / (2.0 * w);
    CHECK(std::abs(wm - want) < 1e-14);
    CHECK(wightman_restricted(gs, {1, -1}, {-p, p}, {t1, t2}, m) == cplx(0.0));

    // time-ordered value is the Wightman value of the sorted sector
    cplx g12 = green_time_ordered(gs, {-p, p}, {t1, t2}, m);
    cplx g21 = green_time_ordered(gs, {-p, p}, {t2, t1}, m);
    CHECK(std::abs(g12 - wm) < 1e-14);
    CHECK(std::abs(g21 - wightman_restricted(gs, {-1, 1}, {p, -p}, {t1, t2}, m)) < 1e-14);
    CHECK_THROWS_AS(green_time_ordered(gs, {-p, p}, {t1, t1}, m), std::invalid_argument);
}

TEST_CASE("disconnected classes are refused") {
    auto spec = preset_interaction("gaussian-phi4", {});
    CHECK_THROWS(GraphSet(spec, 4, 0));
}

TEST_CASE("presentations on the sunset") {
    PresetParams pp;
    pp.volume_factor = 1.0;
    auto spec = preset_interaction("gaussian-phi3", pp);
    GraphSet gs(spec, 2, 2);
    UndirectedSet us(gs);
    REQUIRE(us.graphs().size() == 1);
    CHECK(us.graphs()[0].mult_den == 2);
    AdiabaticModel m;
    m.spec = &spec;
    m.gh_order = 12;
    std::vector<Vec3> p{{0.3, 0.1, -0.2}, {-0.3, -0.1, 0.2}};
    std::vector<double> t{0.3, -0.5};
    cplx T2 = green_time_ordered(gs, p, t, m);
    cplx T4 = green_time_unordered(us, p, t, m);
    CHECK(std::abs(T2 - T4) < 1e-10 * std::abs(T2));
    std::vector<double> w{0.2, -0.2};
    cplx T3 = green_energy_ordered(gs, p, {w[0], w[1]}, m);
    cplx T5 = green_energy_unordered(us, p, w, m);
    CHECK(std::abs(T3 - T5) < 1e-10 * std::abs(T3));

    std::vector<int> sigma{1, 0};
    std::vector<cplx> Z{cplx(0.3, 1.2)};
    auto wop = laplace_energies(Z);
    std::vector<cplx> wl(2);
    for (int k = 0; k < 2; ++k) wl[sigma[k]] = wop[k];
    auto L = laplace_sector(gs, sigma, p, Z, m);
    cplx T3s = green_energy_ordered(gs, p, wl, m, sigma);
    CHECK(std::abs(L.value - T3s) <= 3 * L.err + 1e-9 * std::abs(T3s));
    CHECK(std::abs(L.value - T3s) < 1e-6 * std::abs(T3s));

    // results do not depend on the orthogonal completion
    GraphSet rotated(spec, 2, 2, 12345);
    CHECK(std::abs(green_time_ordered(rotated, p, t, m) - T2) < 1e-10 * std::abs(T2));
}

TEST_CASE("energy presentation refuses on-shell poles") {
    PresetParams pp;
    pp.volume_factor = 1.0;
    auto spec = preset_interaction("gaussian-phi3", pp);
    GraphSet gs(spec, 2, 0);
    AdiabaticModel m;
    m.spec = &spec;
    Vec3 p{0.3, 0, 0};
    const double w = spec.dispersion(p);
    // the free line has its pole at the on-shell energy
    CHECK_THROWS(green_energy_ordered(gs, {p, -p}, {cplx(w), cplx(-w)}, m));
    CHECK_NOTHROW(green_energy_ordered(gs, {p, -p}, {cplx(0.2), cplx(-0.2)}, m));
}

TEST_CASE("smeared cut-off mode") {
    PresetParams pp;
    pp.volume_factor = 1.0;
    auto spec = preset_interaction("gaussian-phi3", pp);
    GraphSet gs(spec, 2, 0);
    AdiabaticModel m;
    m.spec = &spec;
    TemporalCutoff h(0.5);
    SmearedRequest req;
    req.times = {0.6, -0.2};
    req.momenta = {{0.2, 0.0, -0.1}};
    req.f_center = {-0.1, 0.05, 0.1};
    req.f_width = 0.3;
    const auto& e = *gs.entries()[0];
    // closed form: the smeared momentum is pinned to -p1 by the delta function
    Vec3 p2 = -req.momenta[0];
    double s2 = req.f_width * req.f_width;
    double fval = std::pow(2 * kPi * s2, -1.5) * std::exp(-0.5 * norm2(p2 - req.f_center) / s2);
    double w = spec.dispersion(p2);
    int a0 = e.alpha[0];
    cplx want = fval * std::exp(cplx(0, a0 * w * (req.times[0] - req.times[1]))) / (2 * w);
    auto got = evaluate_graph_cutoff(e, req, spec, h, gaussian_profile(0.3, 3.0));
    CHECK(std::abs(got.value - want) < 1e-6 * std::abs(want));
    auto scan = adiabatic_scan(e, req, spec, h, gaussian_profile(0.3, 3.0), {1, 2, 4}, m);
    for (auto& r : scan.rows) CHECK(r.gap <= 1e-14 * std::abs(scan.limit));

    CHECK_THROWS_AS(adiabatic_scan(e, req, spec, h, gaussian_profile(0.3, 3.0), {2, 1}, m), std::invalid_argument);
}

TEST_CASE("adiabatic scan on the four-point contact tree") {
    PresetParams pp;
    pp.volume_factor = 1.0;
    auto spec = preset_interaction("gaussian-phi4", pp);
    GraphSet gs(spec, 4, 1);
    AdiabaticModel m;
    m.spec = &spec;
    TemporalCutoff h(0.5);
    const GraphSet::Entry* pick = nullptr;
    for (auto& e : gs.entries())
        if (e->alpha == std::vector<int>{1, 1, 1, 1}) pick = e.get();
    REQUIRE(pick != nullptr);
    SmearedRequest req;
    req.times = {0.9, 0.4, -0.2, -0.7};
    req.momenta = {{0.2, 0, 0.1}, {-0.1, 0.3, 0}, {0.0, -0.2, 0.15}};
    req.f_center = {-0.1, -0.1, -0.25};
    auto sr = adiabatic_scan(*pick, req, spec, h, gaussian_profile(0.3, 3.0), {1, 2, 4, 8}, m);
    for (std::size_t i = 1; i < sr.rows.size(); ++i) CHECK(sr.rows[i].gap < sr.rows[i - 1].gap);
    CHECK(std::abs(sr.extrapolated - sr.limit) <= 3 * sr.extrapolation_err);
    // band limit above M/(V+1) is refused
    CHECK_THROWS_AS(evaluate_graph_cutoff(*pick, req, spec, TemporalCutoff(0.6), gaussian_profile(0.3, 3.0)),
                    std::invalid_argument);
}
