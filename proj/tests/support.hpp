#pragma once

#include "nlqft/combinatorics.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace nlqft::testing {

// Random strict partial order: relations only go forward along a hidden random labeling,
// so the result is acyclic by construction.
inline Poset random_poset(std::mt19937_64& rng, std::size_t n, double density) {
    std::vector<std::size_t> hidden(n);
    std::iota(hidden.begin(), hidden.end(), 0);
    std::shuffle(hidden.begin(), hidden.end(), rng);
    std::bernoulli_distribution coin(density);
    std::vector<std::pair<std::size_t, std::size_t>> rel;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coin(rng)) rel.emplace_back(hidden[i], hidden[j]);
    return Poset(n, rel);
}

// Order-preserving bijections by filtering all n! permutations.
inline long brute_force_extensions(const Poset& p) {
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), 0);
    long count = 0;
    do {
        std::vector<std::size_t> pos(p.size());
        for (std::size_t k = 0; k < perm.size(); ++k) pos[perm[k]] = k;
        bool ok = true;
        for (auto [a, b] : p.relations())
            if (pos[a] >= pos[b]) ok = false;
        count += ok;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

// Permutations of N labels with exactly r of the first lBp positions landing in the first lA labels.
inline std::uint64_t brute_force_class_count(unsigned N, unsigned lA, unsigned lBp, unsigned r) {
    std::vector<unsigned> perm(N);
    std::iota(perm.begin(), perm.end(), 0u);
    std::uint64_t count = 0;
    do {
        unsigned R = 0;
        for (unsigned i = 0; i < lBp && i < N; ++i) R += perm[i] < lA;
        count += R == r;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

}  // namespace nlqft::testing
