#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "contrasolver/error.hpp"
#include "contrasolver/graph.hpp"
#include "contrasolver/solver.hpp"

namespace contrasolver {

struct TrainingPair {
    std::string prompt;
    std::string chosen;
    std::string rejected;
    double weight = 1.0;

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

enum class Strategy { contrasolver, random, max_confidence };

inline std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::contrasolver: return "contrasolver";
    case Strategy::random: return "random";
    case Strategy::max_confidence: return "max-confidence";
    }
    return "unknown";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
    if (name == "contrasolver") return Strategy::contrasolver;
    if (name == "random") return Strategy::random;
    if (name == "max-confidence") return Strategy::max_confidence;
    return std::nullopt;
}

inline TrainingPair to_pair(const PreferenceGraph& graph, const PreferenceEdge& e) {
    return {graph.prompt(), graph.response(e.src), graph.response(e.dst), e.weight};
}

/// Pairs for the heuristic edges of a solved graph, strongest first.
inline std::vector<TrainingPair> select_contrasolver(const SolverResult& result,
                                                     const PreferenceGraph& graph) {
    const auto partitioned =
        result.kept.size() + result.contradictory.size() + result.omitted.size();
    if (result.node_count != graph.node_count() || partitioned != graph.edges().size()) {
        throw ValidationError("solver result does not belong to graph " + graph.prompt_key());
    }
    EdgeList edges = result.heuristic;
    for (const auto& e : edges) {
        auto stored = graph.edge_between(e.src, e.dst);
        if (!stored || !(*stored == e)) {
            throw ValidationError("heuristic edge " + std::to_string(e.src.value) + "->" +
                                  std::to_string(e.dst.value) + " is not an edge of graph " +
                                  graph.prompt_key());
        }
    }
    std::sort(edges.begin(), edges.end(), WeightDescending{});
    std::vector<TrainingPair> pairs;
    pairs.reserve(edges.size());
    for (const auto& e : edges) pairs.push_back(to_pair(graph, e));
    return pairs;
}

/// Uniform sample of min(n, |E|) edges without replacement, in shuffled order.
inline std::vector<TrainingPair> select_random(const PreferenceGraph& graph, std::size_t n,
                                               std::uint64_t seed) {
    EdgeList edges(graph.edges().begin(), graph.edges().end());
    std::mt19937_64 rng(seed);
    std::shuffle(edges.begin(), edges.end(), rng);
    edges.resize(std::min(n, edges.size()));
    std::vector<TrainingPair> pairs;
    for (const auto& e : edges) pairs.push_back(to_pair(graph, e));
    return pairs;
}

inline std::vector<TrainingPair> select_max_confidence(const PreferenceGraph& graph, std::size_t n) {
    EdgeList edges(graph.edges().begin(), graph.edges().end());
    std::sort(edges.begin(), edges.end(), WeightDescending{});
    edges.resize(std::min(n, edges.size()));
    std::vector<TrainingPair> pairs;
    for (const auto& e : edges) pairs.push_back(to_pair(graph, e));
    return pairs;
}

inline nlohmann::ordered_json to_json(const TrainingPair& p) {
    return {{"prompt", p.prompt}, {"chosen", p.chosen}, {"rejected", p.rejected}, {"weight", p.weight}};
}

/// Writes one JSON object per line. Throws IoError carrying the number of
/// records written before the sink failed.
inline std::size_t export_pairs(std::span<const TrainingPair> pairs, std::ostream& sink) {
    std::size_t written = 0;
    for (const auto& p : pairs) {
        sink << to_json(p).dump() << '\n';
        if (!sink) throw IoError("failed writing training pair record", written);
        ++written;
    }
    sink.flush();
    if (!sink) throw IoError("failed flushing training pairs", written);
    return written;
}

inline std::vector<TrainingPair> read_pairs(std::istream& source) {
    std::vector<TrainingPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            pairs.push_back({j.at("prompt").get<std::string>(), j.at("chosen").get<std::string>(),
                             j.at("rejected").get<std::string>(), j.at("weight").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return pairs;
}

} // namespace contrasolver
