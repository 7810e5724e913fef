#pragma once

// Contradiction resolution over a preference graph.
//
// The kept graph G' starts as a maximum spanning forest. Each round then
//   - walks the remaining edges by ascending weight and convicts every edge
//     whose head already reaches its tail in G' (adding it would close a
//     directed cycle); the path that closes the cycle becomes heuristic;
//   - walks the remaining edges by descending weight, discarding edges G'
//     already implies, and adds the first edge that orders two previously
//     unordered nodes. At most one edge is added per round.
// Rounds repeat until no remaining edges are left.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "contrasolver/error.hpp"
#include "contrasolver/graph.hpp"

namespace contrasolver {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns false when a and b were already joined.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

struct SpanningForest {
    EdgeList tree;       // in selection order
    EdgeList remaining;  // in graph order
};

/// Kruskal over the undirected projection of the graph, keeping the stored
/// direction of every selected edge. Disconnected graphs give one tree per
/// component.
inline SpanningForest kruskal_max_spanning_forest(const PreferenceGraph& graph) {
    EdgeList order(graph.edges().begin(), graph.edges().end());
    std::sort(order.begin(), order.end(), WeightDescending{});
    DisjointSets components(graph.node_count());
    SpanningForest forest;
    std::set<std::pair<std::size_t, std::size_t>> chosen;
    for (const auto& e : order) {
        if (components.unite(e.src.value, e.dst.value)) {
            forest.tree.push_back(e);
            chosen.insert(ByNodePair::key(e));
        }
    }
    for (const auto& e : graph.edges()) {
        if (!chosen.contains(ByNodePair::key(e))) forest.remaining.push_back(e);
    }
    return forest;
}

// Reflexive transitive closure of a growing edge set, one bit row per node.
class ReachabilityIndex {
public:
    explicit ReachabilityIndex(std::size_t node_count)
        : n_(node_count), words_((node_count + 63) / 64), bits_(n_ * words_, 0) {
        for (std::size_t v = 0; v < n_; ++v) set(v, v);
    }

    bool reaches(NodeId from, NodeId to) const {
        return (row(from.value)[to.value / 64] >> (to.value % 64)) & 1u;
    }

    void add_edge(NodeId src, NodeId dst) {
        if (reaches(src, dst)) return;
        // Everything that reaches src now reaches everything dst reaches.
        const std::vector<std::uint64_t> gained(row(dst.value), row(dst.value) + words_);
        for (std::size_t x = 0; x < n_; ++x) {
            if (!reaches(NodeId{x}, src)) continue;
            auto* r = row(x);
            for (std::size_t w = 0; w < words_; ++w) r[w] |= gained[w];
        }
    }

private:
    std::uint64_t* row(std::size_t v) { return bits_.data() + v * words_; }
    const std::uint64_t* row(std::size_t v) const { return bits_.data() + v * words_; }
    void set(std::size_t from, std::size_t to) { row(from)[to / 64] |= std::uint64_t{1} << (to % 64); }

    std::size_t n_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

/// A convicted edge and the kept path from its head back to its tail.
struct ContradictionWitness {
    PreferenceEdge contradictory_edge;
    EdgeList cycle_path;

    friend bool operator==(const ContradictionWitness&, const ContradictionWitness&) = default;
};

class SolverState;
void reverse_loop(SolverState& state);
bool forward_loop(SolverState& state);

/// Working sets of one solve. Kept, contradictory and omitted edges are
/// disjoint and never overlap the remaining edges; heuristic edges are a
/// subset of the kept edges; the kept graph stays acyclic.
class SolverState {
public:
    SolverState(std::size_t node_count, EdgeList kept, EdgeList remaining)
        : node_count_(node_count), remaining_(std::move(remaining)), closure_(node_count) {
        if (!is_dag(kept, node_count)) throw ValidationError("initial kept edge set has a cycle");
        for (const auto& e : remaining_) {
            detail::check_node(e.src, node_count, "remaining edge source");
            detail::check_node(e.dst, node_count, "remaining edge destination");
        }
        for (const auto& e : kept) keep(e);
    }

    explicit SolverState(const PreferenceGraph& graph)
        : SolverState(graph.node_count(), {}, {}) {
        auto forest = kruskal_max_spanning_forest(graph);
        for (const auto& e : forest.tree) keep(e);
        remaining_ = std::move(forest.remaining);
    }

    std::size_t node_count() const noexcept { return node_count_; }
    const EdgeList& kept() const noexcept { return kept_; }
    const EdgeList& remaining() const noexcept { return remaining_; }
    const EdgeList& contradictory() const noexcept { return contradictory_; }
    // Deduplicated, in order of first conviction.
    const EdgeList& heuristic() const noexcept { return heuristic_; }
    const EdgeList& omitted() const noexcept { return omitted_; }
    const std::vector<ContradictionWitness>& witnesses() const noexcept { return witnesses_; }

    bool kept_reaches(NodeId from, NodeId to) const { return closure_.reaches(from, to); }

private:
    friend void reverse_loop(SolverState&);
    friend bool forward_loop(SolverState&);

    void keep(const PreferenceEdge& e) {
        kept_.push_back(e);
        closure_.add_edge(e.src, e.dst);
    }

    void mark_heuristic(const PreferenceEdge& e) {
        if (heuristic_keys_.insert(ByNodePair::key(e)).second) heuristic_.push_back(e);
    }

    std::size_t node_count_;
    EdgeList kept_;
    EdgeList remaining_;
    EdgeList contradictory_;
    EdgeList heuristic_;
    std::set<std::pair<std::size_t, std::size_t>> heuristic_keys_;
    EdgeList omitted_;
    std::vector<ContradictionWitness> witnesses_;
    ReachabilityIndex closure_;
};

/// Convicts every remaining edge that would close a directed cycle in the
/// kept graph. The kept graph itself is not modified.
inline void reverse_loop(SolverState& state) {
    EdgeList ascending = state.remaining_;
    std::sort(ascending.begin(), ascending.end(), WeightAscending{});
    EdgeList survivors;
    for (const auto& e : ascending) {
        if (!state.closure_.reaches(e.dst, e.src)) {
            survivors.push_back(e);
            continue;
        }
        auto path = find_path(state.kept_, state.node_count_, e.dst, e.src);
        if (!path) throw InvariantError("closure and kept edges disagree on reachability");
        for (const auto& h : *path) state.mark_heuristic(h);
        state.contradictory_.push_back(e);
        state.witnesses_.push_back({e, std::move(*path)});
    }
    if (survivors.size() == state.remaining_.size()) return;
    // Keep the surviving edges in their original order.
    std::set<std::pair<std::size_t, std::size_t>> alive;
    for (const auto& e : survivors) alive.insert(ByNodePair::key(e));
    std::erase_if(state.remaining_, [&](const auto& e) { return !alive.contains(ByNodePair::key(e)); });
}

/// Visits remaining edges by descending weight, removing each one. Edges the
/// kept graph already implies are omitted; the first edge between unordered
/// nodes is kept and the pass stops. Returns whether an edge was kept.
inline bool forward_loop(SolverState& state) {
    EdgeList descending = state.remaining_;
    std::sort(descending.begin(), descending.end(), WeightDescending{});
    std::size_t visited = 0;
    bool added = false;
    for (const auto& e : descending) {
        ++visited;
        if (state.closure_.reaches(e.dst, e.src)) {
            throw InvariantError("forward pass met an edge closing a cycle from node " +
                                 std::to_string(e.src.value) + " to " +
                                 std::to_string(e.dst.value));
        }
        if (!state.closure_.reaches(e.src, e.dst)) {
            state.keep(e);
            added = true;
            break;
        }
        state.omitted_.push_back(e);
    }
    state.remaining_.assign(descending.begin() + static_cast<std::ptrdiff_t>(visited),
                            descending.end());
    return added;
}

struct SolverResult {
    std::size_t node_count = 0;
    EdgeList kept;
    EdgeList contradictory;
    EdgeList heuristic;
    EdgeList omitted;
    std::vector<ContradictionWitness> witnesses;
    std::size_t iteration_count = 0;

    friend bool operator==(const SolverResult&, const SolverResult&) = default;
};

inline SolverResult solve(const PreferenceGraph& graph) {
    SolverState state(graph);
    std::size_t iterations = 0;
    while (!state.remaining().empty()) {
        ++iterations;
        reverse_loop(state);
        forward_loop(state);
    }
    return SolverResult{graph.node_count(), state.kept(),      state.contradictory(),
                        state.heuristic(),  state.omitted(),   state.witnesses(),
                        iterations};
}

} // namespace contrasolver
