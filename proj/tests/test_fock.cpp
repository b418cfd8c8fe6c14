#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlqft/combinatorics.hpp"
#include "nlqft/fock.hpp"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace nlqft;

namespace {

KernelOperator random_kernel(std::mt19937_64& rng, int lp, int l, int G) {
    std::normal_distribution<double> N;
    KernelOperator A(lp, l, G);
    for (auto& a : A.amp) a = cplx(N(rng), N(rng));
    return A;
}

MomentumGrid two_point_grid() {
    MomentumGrid g;
    g.points = {Vec3{-0.6, 0, 0}, Vec3{0.6, 0, 0}};
    g.dv = 0.6 * 0.6 * 0.6;
    return g;
}

}  // namespace

TEST_CASE("grid and basis") {
    auto grid = make_line_grid(2, 0.5);
    CHECK(grid.size() == 5);
    CHECK(grid.dv == doctest::Approx(0.125));
    for (int i = 0; i < grid.size(); ++i) {
        int j = grid.negate(i);
        CHECK(grid.points[j][0] == -grid.points[i][0]);
    }
    CHECK(grid.index_of(Vec3{0.25, 0, 0}) == -1);

    FockSpace sp(grid, 3);
    long want = 0;
    for (int k = 0; k <= 3; ++k) want += long(binomial(5 + k - 1, k));
    CHECK(sp.dim() == want);
    std::set<std::vector<int>> seen;
    for (int i = 0; i < sp.dim(); ++i) {
        CHECK(seen.insert(sp.state(i)).second);
        CHECK(sp.index(sp.state(i)) == i);
    }
    CHECK(sp.state(sp.vacuum()).empty());
}

TEST_CASE("second quantization examples") {
    auto grid = make_line_grid(1, 0.7);
    FockSpace sp(grid, 3);
    const int G = grid.size();

    KernelOperator id(1, 1, G);
    for (int k = 0; k < G; ++k) id.at({k}, {k}) = 1.0 / grid.dv;
    Matrix N = second_quantize(id, sp);
    Matrix want = Matrix::Zero(sp.dim(), sp.dim());
    for (int i = 0; i < sp.dim(); ++i) want(i, i) = sp.particles(i);
    CHECK((N - want).norm() < 1e-12);

    std::mt19937_64 rng(3);
    KernelOperator f = random_kernel(rng, 1, 0, G);
    Vector v = second_quantize(f, sp).col(sp.vacuum());
    for (int k = 0; k < G; ++k) CHECK(std::abs(v[sp.index({k})] - std::sqrt(grid.dv) * f.at({k}, {})) < 1e-12);
    CHECK(std::abs(v.norm() - std::sqrt(grid.dv) * std::sqrt([&] {
        double s = 0;
        for (auto a : f.amp) s += std::norm(a);
        return s;
    }())) < 1e-12);

    for (auto [lp, l] : {std::pair{1, 0}, {1, 2}, {2, 2}, {0, 3}}) {
        KernelOperator A = random_kernel(rng, lp, l, G);
        Matrix M = second_quantize(A, sp);
        CHECK((second_quantize(adjoint(A), sp) - M.adjoint()).norm() < 1e-12 * (1 + M.norm()));
        CHECK((second_quantize_ladder(A, sp) - M).norm() < 1e-12 * (1 + M.norm()));
    }
    CHECK_THROWS_AS(second_quantize(KernelOperator(4, 0, G), sp), std::invalid_argument);
    CHECK_THROWS_AS(second_quantize(KernelOperator(1, 0, G + 1), sp), std::invalid_argument);
}

TEST_CASE("injectivity on symmetrized kernels") {
    auto grid = make_line_grid(1, 0.7);
    FockSpace sp(grid, 3);
    std::mt19937_64 rng(4);
    for (int it = 0; it < 10; ++it) {
        KernelOperator A = random_kernel(rng, 2, 1, grid.size()), B = random_kernel(rng, 2, 1, grid.size());
        KernelOperator SA = symmetrize(A), SB = symmetrize(B);
        // only the symmetric part is seen
        CHECK((second_quantize(A, sp) - second_quantize(SA, sp)).norm() < 1e-12);
        double kd = 0;
        for (std::size_t i = 0; i < SA.amp.size(); ++i) kd += std::norm(SA.amp[i] - SB.amp[i]);
        CHECK(kd > 0);
        CHECK((second_quantize(SA, sp) - second_quantize(SB, sp)).norm() > 1e-6);
    }
}

TEST_CASE("CCR through the Wick product") {
    auto grid = make_line_grid(1, 0.7);
    const int G = grid.size();
    FockSpace sp(grid, 3);
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            KernelOperator am(0, 1, G), ap(1, 0, G);
            am.at({}, {i}) = 1.0 / grid.dv;
            ap.at({j}, {}) = 1.0 / grid.dv;
            auto terms = wick_product(am, ap, grid);
            REQUIRE(terms.size() == 2);
            CHECK(terms[0].r == 0);
            CHECK(terms[0].kernel.at({j}, {i}) == 1.0 / (grid.dv * grid.dv));
            CHECK(terms[1].r == 1);
            CHECK(terms[1].factor == 1.0);
            CHECK(terms[1].kernel.at({}, {}) == (i == j ? 1.0 / grid.dv : 0.0));

            // same statement with the ladder matrices below the truncation edge
            Matrix comm = annihilation(sp, i) * creation(sp, j) - creation(sp, j) * annihilation(sp, i);
            for (int c = 0; c < sp.dim(); ++c) {
                if (sp.particles(c) >= sp.nmax()) continue;
                Vector col = comm.col(c);
                Vector want = Vector::Zero(sp.dim());
                if (i == j) want[c] = 1.0 / grid.dv;
                CHECK((col - want).norm() < 1e-12);
            }
        }
    KernelOperator a0(0, 2, G);
    CHECK(wick_product(a0, KernelOperator(1, 1, G), grid).size() == 2);
    // no annihilators on the left: nothing to contract
    KernelOperator c0(2, 0, G);
    CHECK(wick_product(c0, KernelOperator(1, 1, G), grid).size() == 1);
    CHECK_THROWS_AS(wick_product(a0, KernelOperator(1, 1, G + 2), grid), std::invalid_argument);
}

TEST_CASE("Wick matrix identity, random kernels") {
    auto grid = make_line_grid(1, 0.7);
    const int G = grid.size();
    const int nmax = 3;
    FockSpace sp(grid, nmax);
    std::mt19937_64 rng(17);
    for (int it = 0; it < 15; ++it) {
        int la = int(rng() % 3), lpa = int(rng() % 3), lb = int(rng() % 3), lpb = int(rng() % 3);
        KernelOperator A = random_kernel(rng, lpa, la, G), B = random_kernel(rng, lpb, lb, G);
        Matrix prod = second_quantize(A, sp) * second_quantize(B, sp);
        Matrix sum = Matrix::Zero(sp.dim(), sp.dim());
        for (auto& t : wick_product(A, B, grid))
            if (t.kernel.lp <= nmax && t.kernel.l <= nmax) sum += t.factor * second_quantize(t.kernel, sp);
        // B's output sector must stay inside the truncated space for the identity to hold
        for (int c = 0; c < sp.dim(); ++c) {
            if (sp.particles(c) - lb + lpb > nmax) continue;
            CHECK((prod.col(c) - sum.col(c)).norm() <= 1e-12 * (1 + prod.norm()));
        }
    }
}

TEST_CASE("interaction Hamiltonian") {
    auto grid = make_line_grid(1, 0.7);
    FockSpace sp(grid, 3);
    auto spatial = [](const Vec3& k) { return std::exp(-0.5 * norm2(k)); };
    auto phi3 = preset_interaction("gaussian-phi3", {});
    for (double t : {0.0, 0.8, -2.1}) {
        Matrix H = hamiltonian_matrix(phi3, spatial, 0.9, t, sp);
        CHECK((H - H.adjoint()).norm() < 1e-12 * H.norm());
    }
    auto free = empty_interaction(1.0);
    CHECK(hamiltonian_matrix(free, spatial, 1.0, 0.3, sp).norm() == 0.0);

    // one grid point, a single (1,1) kernel
    MomentumGrid one;
    one.points = {Vec3{0, 0, 0}};
    one.dv = 0.3;
    FockSpace s1(one, 2);
    InteractionSpec s = empty_interaction(1.0);
    const cplx c(0.4, 0.0);
    s.kernels[{1, 1}] = [c](const std::vector<Vec3>&, const std::vector<Vec3>&) { return c; };
    s.max_legs = 2;
    Matrix H = hamiltonian_matrix(s, spatial, 0.7, 0.0, s1);
    int p1 = s1.index({0});
    CHECK(std::abs(H(p1, p1) - one.dv * c * spatial(Vec3{0, 0, 0}) * 0.7) < 1e-15);
    int p2 = s1.index({0, 0});
    CHECK(std::abs(H(p2, p2) - 2.0 * one.dv * c * 0.7) < 1e-15);

    FockSpace small(grid, 2);
    CHECK_THROWS_AS(hamiltonian_matrix(preset_interaction("gaussian-phi4", {}), spatial, 1.0, 0.0, small),
                    std::invalid_argument);
}

TEST_CASE("Dyson series on a two-point grid") {
    auto grid = two_point_grid();
    FockSpace sp(grid, 4);
    auto phi3 = preset_interaction("gaussian-phi3", {});
    OracleContext ctx;
    ctx.space = &sp;
    ctx.spec = &phi3;
    ctx.spatial = [](const Vec3& k) { return std::exp(-0.5 * norm2(k)); };
    ctx.temporal = [](double t) { return std::exp(-t * t / 8.0); };
    ctx.build();
    const Matrix I = Matrix::Identity(sp.dim(), sp.dim());

    auto same = dyson_U(2, 0.4, 0.4, ctx);
    CHECK((same[0] - I).norm() < 1e-14);
    CHECK(same[1].norm() < 1e-14);
    CHECK(same[2].norm() < 1e-14);

    const double t0 = -1.3, t1 = 0.2, t2 = 1.5;
    auto U20 = dyson_U(2, t2, t0, ctx), U21 = dyson_U(2, t2, t1, ctx), U10 = dyson_U(2, t1, t0, ctx);
    for (int n = 0; n <= 2; ++n) {
        Matrix comp = Matrix::Zero(sp.dim(), sp.dim()), unit = Matrix::Zero(sp.dim(), sp.dim());
        for (int k = 0; k <= n; ++k) {
            comp += U21[k] * U10[n - k];
            unit += U20[k] * U20[n - k].adjoint();
        }
        CHECK((comp - U20[n]).norm() < 1e-6);
        CHECK((unit - (n == 0 ? I : Matrix::Zero(sp.dim(), sp.dim()))).norm() < 1e-6);
    }
    // infinite endpoints
    auto S = dyson_U(2, kInf, -kInf, ctx);
    Matrix unit = S[0] * S[2].adjoint() + S[1] * S[1].adjoint() + S[2] * S[0].adjoint();
    CHECK(unit.norm() < 1e-6);
}

TEST_CASE("oracle correlators") {
    auto spec = empty_interaction(1.0);
    FockSpace s2(make_line_grid(2, 0.5), 2);
    OracleContext ctx;
    ctx.space = &s2;
    ctx.spec = &spec;
    ctx.spatial = [](const Vec3&) { return 1.0; };
    ctx.temporal = [](double t) { return std::exp(-t * t / 2); };
    ctx.build();
    const double t1 = 0.3, t2 = -0.4;
    auto res = correlator_oracle({{-1, 1}, {t1, t2}, {1, 3}, 0}, ctx);
    // annihilator field carries p = -p' of the creator
    double w = std::sqrt(1 + 0.25);
    cplx want = std::exp(cplx(0, -w * (t1 - t2))) / (s2.grid().dv * 2 * w * kTwoPiCubed);
    CHECK(std::abs(res.value[0] - want) < 1e-12 * std::abs(want));
    CHECK(std::abs(correlator_oracle({{-1, 1}, {t1, t2}, {1, 2}, 0}, ctx).value[0]) == 0.0);
    CHECK(std::abs(correlator_oracle({{1, -1}, {t1, t2}, {1, 3}, 0}, ctx).value[0]) == 0.0);
    CHECK(std::abs(correlator_oracle({{-1}, {t1}, {2}, 0}, ctx).value[0]) == 0.0);
    CHECK_THROWS_AS(correlator_oracle({{-1, 1}, {t1, t2}, {1, 9}, 0}, ctx), std::invalid_argument);

    // interacting: no order-g term for two fields, Hermitian symmetry under reversal
    auto phi3 = preset_interaction("gaussian-phi3", {});
    auto grid = make_line_grid(1, 0.7);
    FockSpace sp(grid, 4);
    OracleContext c3 = ctx;
    c3.space = &sp;
    c3.spec = &phi3;
    c3.spatial = [](const Vec3& k) { return std::exp(-0.5 * norm2(k)); };
    c3.temporal = [](double t) { return std::exp(-t * t / 8.0); };
    c3.panels = 24;
    c3.build();
    auto a = correlator_oracle({{-1, 1}, {0.4, -0.3}, {2, 0}, 2}, c3);
    CHECK(std::abs(a.value[1]) < 1e-12);
    CHECK(std::abs(a.value[2]) > 100 * a.err[2]);
    auto b = correlator_oracle({{-1, 1}, {-0.3, 0.4}, {0, 2}, 2}, c3);
    for (int k = 0; k <= 2; ++k) CHECK(std::abs(b.value[k] - std::conj(a.value[k])) <= 1e-9 * std::abs(a.value[k]) + 3 * (a.err[k] + b.err[k]));
}

TEST_CASE("series division") {
    std::vector<cplx> b{2.0, cplx(0.5, 1.0), -1.0};
    std::vector<cplx> q{1.0, cplx(0, 2), 3.0};
    std::vector<cplx> a(3, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; i + j < 3; ++j) a[i + j] += q[i] * b[j];
    auto got = series_divide(a, b);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(got[k] - q[k]) < 1e-14);
}
