#pragma once

#include "nlqft/combinatorics.hpp"
#include "nlqft/interaction.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace nlqft {

struct GraphVertex {
    bool external = false;
    int ext = -1;    // external label, 0-based in operator order (0 = leftmost / latest)
    int alpha = 0;   // +1 creator field, -1 annihilator field (externals only)
    int slot = -1;   // internal vertices: slot 0..n; slot i sits between external i-1 and i
    int lp = 0, l = 0;  // out-degree (lines to later vertices), in-degree

    bool operator==(const GraphVertex& o) const {
        return external == o.external && ext == o.ext && alpha == o.alpha && slot == o.slot && lp == o.lp && l == o.l;
    }
};

// Vertices are stored in position order, latest first:
// slot 0, external 0, slot 1, external 1, ..., external n-1, slot n.
// Edges are (earlier, later) pairs of vertex indices, sorted, repeated for parallel lines.
// For a totally ordered graph the position order is the time order; for a partial-order
// class only edges and the slot relations order the vertices.
struct FeynmanGraph {
    int n = 0;
    std::vector<int> alpha;
    std::vector<int> v;  // slot occupancies v_0..v_n
    std::vector<GraphVertex> vertices;
    std::vector<std::pair<int, int>> edges;
    bool total = true;
    long sym_den = 1;  // symmetry factor is 1/sym_den

    int V() const;
    int size() const { return int(vertices.size()); }
    int external_vertex(int label) const;
    // multiplicities of directed vertex pairs
    std::vector<std::pair<std::pair<int, int>, int>> edge_multiplicities() const;
    // a < b in the poset means a is earlier than b
    Poset order() const;

    bool operator==(const FeynmanGraph& o) const {
        return n == o.n && alpha == o.alpha && v == o.v && vertices == o.vertices && edges == o.edges &&
               total == o.total && sym_den == o.sym_den;
    }
};

struct GraphClassQuery {
    int n = 0;
    std::vector<int> alpha;
    std::vector<int> v;                           // slot occupancies, size n+1
    std::set<std::pair<int, int>> supported;      // allowed (l', l) of internal vertices
    bool allow_vacuum_components = false;
    bool require_total_order = true;
};

GraphClassQuery make_query(const InteractionSpec& spec, const std::vector<int>& alpha, const std::vector<int>& v,
                           bool allow_vacuum = false, bool total = true);

// All ways to distribute V internal vertices over n+1 slots.
std::vector<std::vector<int>> slot_distributions(int n, int V);

std::vector<FeynmanGraph> enumerate_graphs(const GraphClassQuery& q);

// 1/|Aut|, automorphisms fix externals and slots, preserve the order and permute parallel lines.
long automorphism_count(const FeynmanGraph& g);
double symmetry_factor(const FeynmanGraph& g);

// Connected components without an external vertex (vertex index lists).
std::vector<std::vector<int>> vacuum_components(const FeynmanGraph& g);

// Linear extensions of the graph order, earliest vertex first.
std::vector<std::vector<std::size_t>> total_orderings(const FeynmanGraph& g);

// Totally ordered graph obtained by placing the vertices in the given order (earliest first).
FeynmanGraph with_total_order(const FeynmanGraph& g, const std::vector<std::size_t>& earliest_first);

// Unoriented, unordered canonical form with labeled externals. ext_labels[k] relabels
// external k (defaults to k).
std::string topology_key(const FeynmanGraph& g, const std::vector<int>& ext_labels = {});

// Empty string when all invariants hold, else the first violation.
std::string validate(const FeynmanGraph& g, const std::set<std::pair<int, int>>& supported = {});

std::string serialize(const FeynmanGraph& g);
FeynmanGraph parse_graph(const std::string& text);

}  // namespace nlqft
