#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace nlqft {

// Finite strict partial order on the elements 0..size()-1.
// The relation set is stored transitively closed; less(a, b) means a precedes b.
class Poset {
public:
    Poset() = default;
    // Throws std::invalid_argument on out-of-range ids or when the relations contain a cycle.
    Poset(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& relations);

    std::size_t size() const { return n_; }
    bool less(std::size_t a, std::size_t b) const { return rel_[a * n_ + b] != 0; }
    // Closed relation set, lexicographically sorted.
    std::vector<std::pair<std::size_t, std::size_t>> relations() const;

    // Disjoint union; elements of `other` are shifted by size().
    Poset disjoint_union(const Poset& other) const;
    // Sub-poset induced on the given elements (renumbered in the given order).
    Poset restrict_to(const std::vector<std::size_t>& elems) const;

    bool operator==(const Poset& o) const { return n_ == o.n_ && rel_ == o.rel_; }

private:
    std::size_t n_ = 0;
    std::vector<char> rel_;
};

struct OrderingAssignment {
    std::vector<double> tau;
    int eta = 1;
};

// 1 iff eta*(tau_a - tau_b) < 0 for every relation a < b.
int ordering_indicator(const Poset& poset, const OrderingAssignment& assign);

// Every total order extending the poset, as sequences listing the earliest element first.
std::vector<std::vector<std::size_t>> linear_extensions(const Poset& poset);

// Poset of a chain given as a sequence (earliest first).
Poset chain_poset(const std::vector<std::size_t>& order, std::size_t n);

std::uint64_t factorial(unsigned n);
std::uint64_t binomial(unsigned n, unsigned k);

// r! * C(lA, r) * C(lBp, r).
std::uint64_t contraction_factor(unsigned lA, unsigned r, unsigned lBp);

// Number of permutations of n - lB + lBp labels with exactly r of the first lBp
// positions mapped into the first lA labels.
std::uint64_t permutation_class_count(unsigned n, unsigned lA, unsigned lB, unsigned lBp, unsigned r);

}  // namespace nlqft
