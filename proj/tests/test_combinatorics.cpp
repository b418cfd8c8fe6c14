#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlqft/combinatorics.hpp"
#include "support.hpp"

#include <random>
#include <stdexcept>

using namespace nlqft;

TEST_CASE("indicator on small chains and antichains") {
    Poset chain(2, {{0, 1}});
    CHECK(ordering_indicator(chain, {{0.0, 1.0}, 1}) == 1);
    CHECK(ordering_indicator(chain, {{1.0, 0.0}, 1}) == 0);
    CHECK(ordering_indicator(chain, {{1.0, 0.0}, -1}) == 1);
    // ties never satisfy a strict relation
    CHECK(ordering_indicator(chain, {{0.5, 0.5}, 1}) == 0);

    Poset anti(2, {});
    for (int eta : {1, -1}) {
        CHECK(ordering_indicator(anti, {{0.0, 1.0}, eta}) == 1);
        CHECK(ordering_indicator(anti, {{3.0, -2.0}, eta}) == 1);
    }
    CHECK_THROWS_AS(ordering_indicator(chain, {{0.0}, 1}), std::invalid_argument);
}

TEST_CASE("poset construction") {
    CHECK_THROWS_AS(Poset(3, {{0, 1}, {1, 2}, {2, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Poset(2, {{0, 2}}), std::invalid_argument);
    Poset p(3, {{0, 1}, {1, 2}});
    CHECK(p.less(0, 2));  // closure
    CHECK_FALSE(p.less(2, 0));
}

TEST_CASE("linear extension counts") {
    CHECK(linear_extensions(Poset(3, {{0, 1}, {1, 2}})).size() == 1);
    CHECK(linear_extensions(Poset(3, {})).size() == 6);
    Poset N(4, {{0, 2}, {1, 2}, {1, 3}});  // a<c, b<c, b<d
    auto ext = linear_extensions(N);
    CHECK(long(ext.size()) == testing::brute_force_extensions(N));
    CHECK(ext.size() == 5);
    for (auto& e : ext) CHECK(ordering_indicator(N, {[&] {
        std::vector<double> tau(4);
        for (std::size_t k = 0; k < e.size(); ++k) tau[e[k]] = double(k);
        return tau;
    }(), 1}) == 1);
}

TEST_CASE("random posets: factorization and extension sums") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 6), tie(0, 3);
    std::uniform_real_distribution<double> dens(0.0, 0.8), u(-1.0, 1.0);
    for (int it = 0; it < 200; ++it) {
        std::size_t n1 = size(rng) / 2 + 1, n2 = size(rng) / 2 + 1;
        Poset a = testing::random_poset(rng, n1, dens(rng)), b = testing::random_poset(rng, n2, dens(rng));
        Poset ab = a.disjoint_union(b);
        std::vector<double> t1(n1), t2(n2);
        for (auto& x : t1) x = tie(rng);  // coarse values so ties occur
        for (auto& x : t2) x = tie(rng);
        std::vector<double> t12 = t1;
        t12.insert(t12.end(), t2.begin(), t2.end());
        for (int eta : {1, -1})
            CHECK(ordering_indicator(ab, {t12, eta}) ==
                  ordering_indicator(a, {t1, eta}) * ordering_indicator(b, {t2, eta}));

        std::size_t n = size(rng);
        Poset p = testing::random_poset(rng, n, dens(rng));
        auto ext = linear_extensions(p);
        CHECK(long(ext.size()) == testing::brute_force_extensions(p));
        std::vector<double> tau(n);
        for (auto& x : tau) x = u(rng);
        for (int eta : {1, -1}) {
            int sum = 0;
            for (auto& e : ext) sum += ordering_indicator(chain_poset(e, n), {tau, eta});
            CHECK(sum == ordering_indicator(p, {tau, eta}));
        }
    }
}

TEST_CASE("contraction factor") {
    CHECK(contraction_factor(1, 1, 1) == 1);
    CHECK(contraction_factor(2, 1, 3) == 6);
    for (unsigned la = 0; la < 5; ++la)
        for (unsigned lb = 0; lb < 5; ++lb) CHECK(contraction_factor(la, 0, lb) == 1);
    CHECK_THROWS_AS(contraction_factor(1, 2, 3), std::invalid_argument);
}

TEST_CASE("permutation class counts") {
    CHECK(permutation_class_count(2, 1, 1, 1, 1) == 1);
    CHECK(permutation_class_count(2, 1, 1, 1, 0) == 1);
    std::uint64_t total = 0;
    for (unsigned r = 0; r <= 2; ++r) total += permutation_class_count(4, 2, 1, 2, r);
    CHECK(total == factorial(5));

    for (unsigned n = 0; n <= 5; ++n)
        for (unsigned lA = 0; lA <= 3; ++lA)
            for (unsigned lB = 0; lB <= std::min(n, 3u); ++lB)
                for (unsigned lBp = 0; lBp <= 3; ++lBp) {
                    unsigned N = n - lB + lBp;
                    if (lA > N) {
                        CHECK_THROWS_AS(permutation_class_count(n, lA, lB, lBp, 0), std::invalid_argument);
                        continue;
                    }
                    for (unsigned r = 0; r <= 3; ++r) {
                        auto brute = testing::brute_force_class_count(N, lA, lBp, r);
                        std::uint64_t got = 0;
                        try {
                            got = permutation_class_count(n, lA, lB, lBp, r);
                        } catch (const std::invalid_argument&) {
                            got = 0;  // outside the admissible range the class is empty
                        }
                        CHECK(got == brute);
                    }
                }
    CHECK_THROWS_AS(permutation_class_count(1, 0, 2, 0, 0), std::invalid_argument);
}
