#pragma once

// Preference graph model: one directed weighted graph per prompt whose nodes
// are candidate responses and whose edge i->j says response i is preferred
// over response j with probability equal to the edge weight.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "contrasolver/error.hpp"

namespace contrasolver {

inline constexpr double kDefaultDelta = 0.51;

struct NodeId {
    std::size_t value = 0;

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

struct ResponseId {
    std::string prompt_key;
    NodeId index;

    friend auto operator<=>(const ResponseId&, const ResponseId&) = default;
};

struct JudgmentRecord {
    std::string prompt_key;
    NodeId first;
    NodeId second;
    double confidence_forward = 0.5;
    // Confidence for the same direction (first > second) read back with the
    // two labels swapped. Absent when the annotator did not swap.
    std::optional<double> confidence_reverse;
};

// Everything known about one prompt: its responses and the raw judgments.
struct PromptJudgments {
    std::string prompt_key;
    std::string prompt;
    std::vector<std::string> responses;
    std::vector<JudgmentRecord> judgments;
};

struct PreferenceEdge {
    NodeId src;
    NodeId dst;
    double weight = 1.0;

    friend bool operator==(const PreferenceEdge&, const PreferenceEdge&) = default;
};

using EdgeList = std::vector<PreferenceEdge>;

/// Total order used wherever edges are visited by weight: weight first, then
/// smaller source index, then smaller destination index.
struct WeightAscending {
    bool operator()(const PreferenceEdge& a, const PreferenceEdge& b) const {
        if (a.weight != b.weight) return a.weight < b.weight;
        if (a.src != b.src) return a.src < b.src;
        return a.dst < b.dst;
    }
};

struct WeightDescending {
    bool operator()(const PreferenceEdge& a, const PreferenceEdge& b) const {
        if (a.weight != b.weight) return a.weight > b.weight;
        if (a.src != b.src) return a.src < b.src;
        return a.dst < b.dst;
    }
};

// Orders edges by their unordered node pair; a graph holds at most one edge
// per pair, so this is a total order on any graph's edge set.
struct ByNodePair {
    static std::pair<std::size_t, std::size_t> key(const PreferenceEdge& e) {
        return std::minmax(e.src.value, e.dst.value);
    }
    bool operator()(const PreferenceEdge& a, const PreferenceEdge& b) const {
        return key(a) < key(b);
    }
};

namespace detail {

inline void check_probability(double p, const char* field) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError(std::string(field) + " must be a probability in [0,1], got " +
                              std::to_string(p));
    }
}

inline void check_node(NodeId n, std::size_t node_count, const char* field) {
    if (n.value >= node_count) {
        throw ValidationError(std::string(field) + " references unknown node " +
                              std::to_string(n.value) + " (node count " +
                              std::to_string(node_count) + ")");
    }
}

// Adjacency lists with neighbours sorted by destination index. Each entry
// carries the position of the edge in the source list.
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>>
sorted_adjacency(std::span<const PreferenceEdge> edges, std::size_t node_count) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(node_count);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        check_node(edges[k].src, node_count, "edge source");
        check_node(edges[k].dst, node_count, "edge destination");
        adj[edges[k].src.value].emplace_back(edges[k].dst.value, k);
    }
    for (auto& out : adj) std::sort(out.begin(), out.end());
    return adj;
}

} // namespace detail

/// Average of the forward reading and the label-swapped reading of the same
/// preference, at probability level.
inline double debias_confidence(double p_forward, double p_reverse) {
    detail::check_probability(p_forward, "confidence_forward");
    detail::check_probability(p_reverse, "confidence_reverse");
    return (p_forward + p_reverse) / 2.0;
}

inline double debias_confidence(double p_forward, std::optional<double> p_reverse) {
    if (!p_reverse) {
        detail::check_probability(p_forward, "confidence_forward");
        return p_forward;
    }
    return debias_confidence(p_forward, *p_reverse);
}

/// True iff `to` is reachable from `from`. Every node reaches itself.
inline bool reachable(std::span<const PreferenceEdge> edges, std::size_t node_count, NodeId from,
                      NodeId to) {
    detail::check_node(from, node_count, "from");
    detail::check_node(to, node_count, "to");
    if (from == to) return true;
    auto adj = detail::sorted_adjacency(edges, node_count);
    std::vector<bool> seen(node_count, false);
    std::vector<std::size_t> stack{from.value};
    seen[from.value] = true;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto [v, k] : adj[u]) {
            if (v == to.value) return true;
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return false;
}

/// One shortest directed path from `from` to `to`, as its edges. Breadth-first
/// search expanding neighbours by ascending index, so among equally short
/// paths the one taking smaller indices first wins. Empty when from == to.
inline std::optional<EdgeList> find_path(std::span<const PreferenceEdge> edges,
                                         std::size_t node_count, NodeId from, NodeId to) {
    detail::check_node(from, node_count, "from");
    detail::check_node(to, node_count, "to");
    if (from == to) return EdgeList{};
    auto adj = detail::sorted_adjacency(edges, node_count);
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> via(node_count, none);  // edge index that discovered the node
    std::vector<bool> seen(node_count, false);
    std::deque<std::size_t> queue{from.value};
    seen[from.value] = true;
    while (!queue.empty() && !seen[to.value]) {
        auto u = queue.front();
        queue.pop_front();
        for (auto [v, k] : adj[u]) {
            if (seen[v]) continue;
            seen[v] = true;
            via[v] = k;
            queue.push_back(v);
        }
    }
    if (!seen[to.value]) return std::nullopt;
    EdgeList path;
    for (auto v = to.value; v != from.value; v = edges[via[v]].src.value) {
        path.push_back(edges[via[v]]);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

/// Kahn's algorithm; acyclic iff every node gets a topological position.
inline bool is_dag(std::span<const PreferenceEdge> edges, std::size_t node_count) {
    std::vector<std::size_t> in_degree(node_count, 0);
    std::vector<std::vector<std::size_t>> out(node_count);
    for (const auto& e : edges) {
        detail::check_node(e.src, node_count, "edge source");
        detail::check_node(e.dst, node_count, "edge destination");
        out[e.src.value].push_back(e.dst.value);
        ++in_degree[e.dst.value];
    }
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < node_count; ++v) {
        if (in_degree[v] == 0) ready.push_back(v);
    }
    std::size_t ordered = 0;
    while (!ready.empty()) {
        auto u = ready.back();
        ready.pop_back();
        ++ordered;
        for (auto v : out[u]) {
            if (--in_degree[v] == 0) ready.push_back(v);
        }
    }
    return ordered == node_count;
}

/// Some directed cycle as a closed edge sequence, or nullopt for a DAG.
inline std::optional<EdgeList> find_cycle(std::span<const PreferenceEdge> edges,
                                          std::size_t node_count) {
    auto adj = detail::sorted_adjacency(edges, node_count);
    enum class Mark { white, grey, black };
    std::vector<Mark> mark(node_count, Mark::white);
    std::vector<std::size_t> via(node_count);
    // iterative DFS: (node, next neighbour position)
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t root = 0; root < node_count; ++root) {
        if (mark[root] != Mark::white) continue;
        stack.emplace_back(root, 0);
        mark[root] = Mark::grey;
        while (!stack.empty()) {
            auto& [u, pos] = stack.back();
            if (pos == adj[u].size()) {
                mark[u] = Mark::black;
                stack.pop_back();
                continue;
            }
            auto [v, k] = adj[u][pos++];
            if (mark[v] == Mark::grey) {
                EdgeList cycle{edges[k]};
                for (auto w = u; w != v; w = edges[via[w]].src.value) {
                    cycle.push_back(edges[via[w]]);
                }
                std::reverse(cycle.begin() + 1, cycle.end());
                std::rotate(cycle.begin(), cycle.begin() + 1, cycle.end());
                return cycle;
            }
            if (mark[v] == Mark::white) {
                mark[v] = Mark::grey;
                via[v] = k;
                stack.emplace_back(v, 0);
            }
        }
    }
    return std::nullopt;
}

class PreferenceGraph {
public:
    PreferenceGraph() = default;

    /// Validates the graph invariants: at least one node, no self-loops, at
    /// most one edge per node pair and every weight in (max(0.5, delta), 1].
    PreferenceGraph(std::string prompt_key, std::string prompt, std::vector<std::string> responses,
                    EdgeList edges, double delta = 0.5)
        : prompt_key_(std::move(prompt_key)),
          prompt_(std::move(prompt)),
          responses_(std::move(responses)),
          edges_(std::move(edges)) {
        if (responses_.empty()) throw ValidationError("preference graph needs at least one node");
        const double floor = std::max(0.5, delta);
        for (const auto& e : edges_) {
            detail::check_node(e.src, responses_.size(), "edge source");
            detail::check_node(e.dst, responses_.size(), "edge destination");
            if (e.src == e.dst) {
                throw ValidationError("self-loop on node " + std::to_string(e.src.value));
            }
            if (!(e.weight > floor && e.weight <= 1.0)) {
                throw ValidationError("edge weight " + std::to_string(e.weight) +
                                      " outside (" + std::to_string(floor) + ", 1]");
            }
        }
        std::sort(edges_.begin(), edges_.end(), ByNodePair{});
        auto dup = std::adjacent_find(edges_.begin(), edges_.end(), [](const auto& a, const auto& b) {
            return ByNodePair::key(a) == ByNodePair::key(b);
        });
        if (dup != edges_.end()) {
            throw ValidationError("more than one edge between nodes " +
                                  std::to_string(dup->src.value) + " and " +
                                  std::to_string(dup->dst.value));
        }
    }

    const std::string& prompt_key() const noexcept { return prompt_key_; }
    const std::string& prompt() const noexcept { return prompt_; }
    std::size_t node_count() const noexcept { return responses_.size(); }
    const std::vector<std::string>& responses() const noexcept { return responses_; }
    const std::string& response(NodeId n) const { return responses_.at(n.value); }

    /// Edges ordered by unordered node pair.
    std::span<const PreferenceEdge> edges() const noexcept { return edges_; }

    std::optional<PreferenceEdge> edge_between(NodeId a, NodeId b) const {
        PreferenceEdge probe{a, b, 0.0};
        auto it = std::lower_bound(edges_.begin(), edges_.end(), probe, ByNodePair{});
        if (it != edges_.end() && ByNodePair::key(*it) == ByNodePair::key(probe)) return *it;
        return std::nullopt;
    }

private:
    std::string prompt_key_;
    std::string prompt_;
    std::vector<std::string> responses_;
    EdgeList edges_;
};

struct BuildDiagnostics {
    // Node pairs judged more than once with opposite debiased directions.
    std::size_t inconsistent_duplicates = 0;
};

/// Builds the preference graph for one prompt. Each judgment's debiased
/// confidence c yields edge first->second with weight c when c > max(0.5, delta),
/// edge second->first with weight 1-c when 1-c > max(0.5, delta), and nothing
/// otherwise. Repeated judgments of one pair keep the strongest reading.
inline PreferenceGraph build_graph(const PromptJudgments& input, double delta = kDefaultDelta,
                                   BuildDiagnostics* diagnostics = nullptr) {
    if (!(delta >= 0.5 && delta <= 1.0)) {
        throw ValidationError("delta must lie in [0.5, 1], got " + std::to_string(delta));
    }
    const auto n = input.responses.size();
    if (n == 0) throw ValidationError("prompt " + input.prompt_key + " has no responses");

    // Strongest directional reading per unordered pair, before thresholding.
    struct Reading {
        PreferenceEdge edge;
        bool saw_forward = false;  // a reading pointed low -> high index
        bool saw_backward = false;
    };
    std::map<std::pair<std::size_t, std::size_t>, Reading> best;
    for (const auto& j : input.judgments) {
        if (j.prompt_key != input.prompt_key) {
            throw ValidationError("judgment for prompt " + j.prompt_key + " mixed into prompt " +
                                  input.prompt_key);
        }
        detail::check_node(j.first, n, "first");
        detail::check_node(j.second, n, "second");
        if (j.first == j.second) {
            throw ValidationError("self-pair judgment on response " +
                                  std::to_string(j.first.value));
        }
        const double c = debias_confidence(j.confidence_forward, j.confidence_reverse);
        if (c == 0.5) continue;
        PreferenceEdge e = c > 0.5 ? PreferenceEdge{j.first, j.second, c}
                                   : PreferenceEdge{j.second, j.first, 1.0 - c};
        auto key = ByNodePair::key(e);
        auto [it, fresh] = best.try_emplace(key, Reading{e});
        if (!fresh && e.weight > it->second.edge.weight) it->second.edge = e;
        (e.src.value < e.dst.value ? it->second.saw_forward : it->second.saw_backward) = true;
    }

    const double floor = std::max(0.5, delta);
    EdgeList edges;
    std::size_t inconsistent = 0;
    for (const auto& [key, reading] : best) {
        if (reading.saw_forward && reading.saw_backward) ++inconsistent;
        if (reading.edge.weight > floor) edges.push_back(reading.edge);
    }
    if (diagnostics) diagnostics->inconsistent_duplicates = inconsistent;
    return PreferenceGraph(input.prompt_key, input.prompt, input.responses, std::move(edges), delta);
}

} // namespace contrasolver
