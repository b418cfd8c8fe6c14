#include "nlqft/combinatorics.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace nlqft {

Poset::Poset(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& relations)
    : n_(n), rel_(n * n, 0) {
    for (auto [a, b] : relations) {
        if (a >= n || b >= n) throw std::invalid_argument("poset relation refers to unknown element");
        if (a == b) throw std::invalid_argument("poset relation is reflexive");
        rel_[a * n + b] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (rel_[i * n + k])
                for (std::size_t j = 0; j < n; ++j)
                    if (rel_[k * n + j]) rel_[i * n + j] = 1;
    for (std::size_t i = 0; i < n; ++i)
        if (rel_[i * n + i])
            throw std::invalid_argument("poset relations contain a cycle through element " + std::to_string(i));
}

std::vector<std::pair<std::size_t, std::size_t>> Poset::relations() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = 0; b < n_; ++b)
            if (rel_[a * n_ + b]) out.emplace_back(a, b);
    return out;
}

Poset Poset::disjoint_union(const Poset& other) const {
    auto rels = relations();
    for (auto [a, b] : other.relations()) rels.emplace_back(a + n_, b + n_);
    return Poset(n_ + other.n_, rels);
}

Poset Poset::restrict_to(const std::vector<std::size_t>& elems) const {
    std::vector<std::pair<std::size_t, std::size_t>> rels;
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (std::size_t j = 0; j < elems.size(); ++j)
            if (less(elems[i], elems[j])) rels.emplace_back(i, j);
    return Poset(elems.size(), rels);
}

int ordering_indicator(const Poset& poset, const OrderingAssignment& assign) {
    if (assign.tau.size() < poset.size()) throw std::invalid_argument("ordering_indicator: missing timestamp");
    const std::size_t n = poset.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (poset.less(a, b) && !(assign.eta * (assign.tau[a] - assign.tau[b]) < 0.0)) return 0;
    return 1;
}

namespace {
void extend(const Poset& p, std::vector<char>& used, std::vector<std::size_t>& cur,
            std::vector<std::vector<std::size_t>>& out) {
    const std::size_t n = p.size();
    if (cur.size() == n) {
        out.push_back(cur);
        return;
    }
    for (std::size_t e = 0; e < n; ++e) {
        if (used[e]) continue;
        bool minimal = true;
        for (std::size_t f = 0; f < n && minimal; ++f)
            if (!used[f] && p.less(f, e)) minimal = false;
        if (!minimal) continue;
        used[e] = 1;
        cur.push_back(e);
        extend(p, used, cur, out);
        cur.pop_back();
        used[e] = 0;
    }
}
}  // namespace

std::vector<std::vector<std::size_t>> linear_extensions(const Poset& poset) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<char> used(poset.size(), 0);
    std::vector<std::size_t> cur;
    extend(poset, used, cur, out);
    return out;
}

Poset chain_poset(const std::vector<std::size_t>& order, std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> rels;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) rels.emplace_back(order[i], order[i + 1]);
    return Poset(n, rels);
}

std::uint64_t factorial(unsigned n) {
    if (n > 20) throw std::overflow_error("factorial overflows 64 bits");
    std::uint64_t f = 1;
    for (unsigned k = 2; k <= n; ++k) f *= k;
    return f;
}

std::uint64_t binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

std::uint64_t contraction_factor(unsigned lA, unsigned r, unsigned lBp) {
    if (r > std::min(lA, lBp)) throw std::invalid_argument("contraction_factor: r out of range");
    return factorial(r) * binomial(lA, r) * binomial(lBp, r);
}

std::uint64_t permutation_class_count(unsigned n, unsigned lA, unsigned lB, unsigned lBp, unsigned r) {
    if (lB > n) throw std::invalid_argument("permutation_class_count: lB exceeds n");
    if (lA > n - lB + lBp) throw std::invalid_argument("permutation_class_count: lA exceeds the intermediate sector");
    const unsigned lo = lA + lB > n ? lA + lB - n : 0;
    if (r < lo || r > std::min(lA, lBp)) throw std::invalid_argument("permutation_class_count: r out of range");
    return binomial(lBp, r) * binomial(lA, r) * factorial(r) * factorial(n + lBp - lB - lA) * factorial(n - lB) /
           factorial(n - lB - lA + r);
}

}  // namespace nlqft
