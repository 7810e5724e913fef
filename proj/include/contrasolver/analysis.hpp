#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "contrasolver/error.hpp"
#include "contrasolver/graph.hpp"
#include "contrasolver/solver.hpp"

namespace contrasolver {

inline constexpr std::size_t kHistogramBins = 10;

// Right-closed bins (0.5,0.55], (0.55,0.6], ..., (0.95,1].
inline constexpr std::array<double, kHistogramBins> kHistogramUpperEdges{
    0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0};

inline std::size_t histogram_bin(double weight) {
    auto it = std::lower_bound(kHistogramUpperEdges.begin(), kHistogramUpperEdges.end(), weight);
    if (it == kHistogramUpperEdges.end()) return kHistogramBins - 1;
    return static_cast<std::size_t>(it - kHistogramUpperEdges.begin());
}

struct ClassCounts {
    std::size_t kept = 0;
    std::size_t contradictory = 0;
    std::size_t omitted = 0;
    // Both are subsets of kept.
    std::size_t heuristic = 0;
    std::size_t definite = 0;
};

struct GraphStats {
    std::string prompt_key;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    bool has_cycle = false;
    std::optional<ClassCounts> classes;  // present once the graph is solved
    std::array<std::size_t, kHistogramBins> weight_histogram{};
};

/// Kept edges that sit on no witness path.
inline EdgeList definite_edges(const SolverResult& result) {
    std::set<std::pair<std::size_t, std::size_t>> on_cycle;
    for (const auto& w : result.witnesses) {
        for (const auto& e : w.cycle_path) on_cycle.insert(ByNodePair::key(e));
    }
    EdgeList out;
    for (const auto& e : result.kept) {
        if (!on_cycle.contains(ByNodePair::key(e))) out.push_back(e);
    }
    return out;
}

inline GraphStats compute_stats(const PreferenceGraph& graph,
                                const SolverResult* result = nullptr) {
    GraphStats s;
    s.prompt_key = graph.prompt_key();
    s.node_count = graph.node_count();
    s.edge_count = graph.edges().size();
    s.has_cycle = !is_dag(graph.edges(), graph.node_count());
    for (const auto& e : graph.edges()) ++s.weight_histogram[histogram_bin(e.weight)];
    if (result) {
        s.classes = ClassCounts{result->kept.size(), result->contradictory.size(),
                                result->omitted.size(), result->heuristic.size(),
                                definite_edges(*result).size()};
    }
    return s;
}

/// Fraction of graphs containing at least one directed cycle.
inline double contradiction_rate(std::span<const PreferenceGraph> graphs) {
    if (graphs.empty()) throw ValidationError("contradiction rate of an empty collection");
    std::size_t cyclic = 0;
    for (const auto& g : graphs) {
        if (!is_dag(g.edges(), g.node_count())) ++cyclic;
    }
    return static_cast<double>(cyclic) / static_cast<double>(graphs.size());
}

inline EdgeList reversed(std::span<const PreferenceEdge> edges) {
    EdgeList out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.push_back({e.dst, e.src, e.weight});
    return out;
}

/// Kept edges plus every contradictory edge pointing the other way.
inline EdgeList aligned_edges(const SolverResult& result) {
    EdgeList out = result.kept;
    auto flipped = reversed(result.contradictory);
    out.insert(out.end(), flipped.begin(), flipped.end());
    return out;
}

struct VerificationReport {
    bool kept_acyclic = true;
    bool aligned_acyclic = true;    // kept plus reversed contradictory edges
    bool local_optimality = true;   // every witness lighter than its path
    bool partition_total = true;    // each input edge in exactly one class
    std::optional<std::string> counterexample;
    EdgeList counterexample_edges;

    bool ok() const { return kept_acyclic && aligned_acyclic && local_optimality && partition_total; }
};

namespace detail {

inline std::string describe(std::span<const PreferenceEdge> edges) {
    std::string out;
    for (const auto& e : edges) {
        if (!out.empty()) out += ", ";
        out += std::to_string(e.src.value) + "->" + std::to_string(e.dst.value) + " (" +
               std::to_string(e.weight) + ")";
    }
    return out;
}

} // namespace detail

/// Checks the guarantees a solve must satisfy. Failures are reported, not
/// thrown; only the first counterexample is kept.
inline VerificationReport verify_properties(const SolverResult& result, const PreferenceGraph& graph) {
    VerificationReport report;
    auto fail = [&](bool& flag, std::string what, EdgeList edges) {
        flag = false;
        if (!report.counterexample) {
            report.counterexample = std::move(what);
            report.counterexample_edges = std::move(edges);
        }
    };
    const auto n = graph.node_count();

    if (auto cycle = find_cycle(result.kept, n)) {
        fail(report.kept_acyclic, "kept graph has cycle " + detail::describe(*cycle), *cycle);
    }
    if (auto cycle = find_cycle(aligned_edges(result), n)) {
        fail(report.aligned_acyclic,
             "kept graph with reversed contradictory edges has cycle " + detail::describe(*cycle),
             *cycle);
    }

    std::set<double> distinct;
    for (const auto& e : graph.edges()) distinct.insert(e.weight);
    const bool weights_distinct = distinct.size() == graph.edges().size();
    for (const auto& w : result.witnesses) {
        const auto& c = w.contradictory_edge;
        bool linked = !w.cycle_path.empty() && w.cycle_path.front().src == c.dst &&
                      w.cycle_path.back().dst == c.src;
        for (std::size_t k = 1; linked && k < w.cycle_path.size(); ++k) {
            linked = w.cycle_path[k - 1].dst == w.cycle_path[k].src;
        }
        double lightest = 2.0;
        for (const auto& e : w.cycle_path) lightest = std::min(lightest, e.weight);
        const bool holds = weights_distinct ? c.weight < lightest : c.weight <= lightest;
        if (!linked || !holds) {
            EdgeList edges{c};
            edges.insert(edges.end(), w.cycle_path.begin(), w.cycle_path.end());
            fail(report.local_optimality,
                 std::string(linked ? "contradictory edge not lighter than its path: "
                                    : "witness path does not close the cycle: ") +
                     detail::describe(edges),
                 edges);
        }
    }

    std::set<std::pair<std::size_t, std::size_t>> seen;
    bool partition = true;
    for (const auto* set : {&result.kept, &result.contradictory, &result.omitted}) {
        for (const auto& e : *set) {
            auto stored = graph.edge_between(e.src, e.dst);
            partition = partition && stored && *stored == e && seen.insert(ByNodePair::key(e)).second;
        }
    }
    partition = partition && seen.size() == graph.edges().size();
    for (const auto& e : result.heuristic) {
        const auto key = ByNodePair::key(e);
        const bool in_kept = std::any_of(result.kept.begin(), result.kept.end(),
                                         [&](const auto& k) { return ByNodePair::key(k) == key; });
        partition = partition && in_kept;
    }
    if (!partition) {
        fail(report.partition_total, "edge classes do not partition the graph's edges", {});
    }
    return report;
}

/// Contradiction rate after replacing each graph's edges by its kept edges
/// plus reversed contradictory edges.
inline double post_alignment_rate(std::span<const PreferenceGraph> graphs,
                                  std::span<const SolverResult> results) {
    if (graphs.size() != results.size()) {
        throw ValidationError("post-alignment rate needs one result per graph (" +
                              std::to_string(graphs.size()) + " graphs, " +
                              std::to_string(results.size()) + " results)");
    }
    if (graphs.empty()) throw ValidationError("contradiction rate of an empty collection");
    std::size_t cyclic = 0;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        if (!is_dag(aligned_edges(results[k]), graphs[k].node_count())) ++cyclic;
    }
    return static_cast<double>(cyclic) / static_cast<double>(graphs.size());
}

} // namespace contrasolver
