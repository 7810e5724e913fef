#pragma once

// Brute-force references for the unit and acceptance suites. Nothing here
// reuses the library's graph algorithms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "contrasolver/graph.hpp"

namespace contrasolver::oracle {

using Matrix = std::vector<std::vector<bool>>;

inline Matrix adjacency(std::span<const PreferenceEdge> edges, std::size_t n) {
    Matrix a(n, std::vector<bool>(n, false));
    for (const auto& e : edges) a[e.src.value][e.dst.value] = true;
    return a;
}

// Reflexive transitive closure by repeated boolean matrix squaring.
inline Matrix closure_by_squaring(std::span<const PreferenceEdge> edges, std::size_t n) {
    Matrix r = adjacency(edges, n);
    for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
    for (;;) {
        Matrix next(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (r[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (r[k][j]) next[i][j] = true;
        if (next == r) return r;
        r = std::move(next);
    }
}

// Enumerates every simple path from each start node and reports whether any
// of them closes back to the start.
inline bool has_cycle_by_enumeration(std::span<const PreferenceEdge> edges, std::size_t n) {
    const Matrix a = adjacency(edges, n);
    std::vector<bool> on_path(n, false);
    std::function<bool(std::size_t, std::size_t)> extend = [&](std::size_t start, std::size_t at) {
        for (std::size_t next = 0; next < n; ++next) {
            if (!a[at][next]) continue;
            if (next == start) return true;
            if (on_path[next] || next < start) continue;  // each cycle found from its smallest node
            on_path[next] = true;
            if (extend(start, next)) return true;
            on_path[next] = false;
        }
        return false;
    };
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(on_path.begin(), on_path.end(), false);
        on_path[s] = true;
        if (extend(s, s)) return true;
    }
    return false;
}

// Sum in descending order so equal edge sets give bit-identical totals.
inline double canonical_sum(std::vector<double> weights) {
    std::sort(weights.begin(), weights.end(), std::greater<>());
    double total = 0.0;
    for (double w : weights) total += w;
    return total;
}

inline std::size_t undirected_components(std::span<const PreferenceEdge> edges, std::size_t n) {
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), std::size_t{0});
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& e : edges) {
            auto lo = std::min(label[e.src.value], label[e.dst.value]);
            if (label[e.src.value] != lo || label[e.dst.value] != lo) {
                label[e.src.value] = label[e.dst.value] = lo;
                changed = true;
            }
        }
    }
    std::sort(label.begin(), label.end());
    return static_cast<std::size_t>(std::unique(label.begin(), label.end()) - label.begin());
}

// Maximum total weight over all spanning forests, by trying every edge subset
// of the right size and keeping the ones without an undirected cycle.
inline double max_spanning_forest_weight(std::span<const PreferenceEdge> edges, std::size_t n) {
    const std::size_t m = edges.size();
    const std::size_t forest_size = n - undirected_components(edges, n);
    double best = 0.0;
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(forest_size), true);
    do {
        EdgeList subset;
        std::vector<double> weights;
        for (std::size_t k = 0; k < m; ++k) {
            if (pick[k]) {
                subset.push_back(edges[k]);
                weights.push_back(edges[k].weight);
            }
        }
        // forest_size edges without a cycle leave exactly n - forest_size components
        if (undirected_components(subset, n) != n - forest_size) continue;
        best = std::max(best, canonical_sum(weights));
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

// Complete tournament with random directions and weights uniform on (0.5, 1].
template <class Rng>
EdgeList random_tournament(std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> gap(0.0, 0.5);
    std::bernoulli_distribution coin(0.5);
    EdgeList edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = 1.0 - gap(rng);
            if (coin(rng)) edges.push_back({NodeId{i}, NodeId{j}, w});
            else edges.push_back({NodeId{j}, NodeId{i}, w});
        }
    }
    return edges;
}

// Random orientation of a random subset of node pairs.
template <class Rng>
EdgeList random_sparse(std::size_t n, double density, Rng& rng) {
    std::bernoulli_distribution keep(density);
    EdgeList all = random_tournament(n, rng);
    EdgeList out;
    for (const auto& e : all) {
        if (keep(rng)) out.push_back(e);
    }
    return out;
}

// Nudges tied weights down by one ulp at a time until all are distinct.
inline void make_distinct(EdgeList& edges) {
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return edges[a].weight > edges[b].weight; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto prev = edges[order[k - 1]].weight;
        auto& cur = edges[order[k]].weight;
        if (cur >= prev) cur = std::nextafter(prev, 0.0);
    }
}

inline std::vector<std::string> labels(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back("r" + std::to_string(k));
    return out;
}

inline PreferenceGraph make_graph(EdgeList edges, std::size_t n, std::string key = "g") {
    return PreferenceGraph(key, "prompt " + key, labels(n), std::move(edges));
}

} // namespace contrasolver::oracle
