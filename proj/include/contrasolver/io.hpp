#pragma once

// Line-delimited JSON formats: judgments files in, solver reports out.

#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "contrasolver/analysis.hpp"
#include "contrasolver/error.hpp"
#include "contrasolver/graph.hpp"
#include "contrasolver/solver.hpp"

namespace contrasolver {

using ordered_json = nlohmann::ordered_json;

struct DatasetRecord {
    PromptJudgments judgments;
    std::optional<std::vector<double>> rewards;  // synthetic ground truth
    std::size_t line = 0;
};

namespace detail {

inline double confidence_field(const nlohmann::json& j, const char* key, std::size_t line) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(line, std::string(key) + " must be a number");
    const double p = v.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ParseError(line, std::string(key) + " must be a probability in [0,1], got " +
                                   std::to_string(p));
    }
    return p;
}

inline std::size_t index_field(const nlohmann::json& j, const char* key, std::size_t n,
                               std::size_t line) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ParseError(line, std::string(key) + " must be a non-negative integer");
    }
    const auto idx = v.get<std::size_t>();
    if (idx >= n) {
        throw ParseError(line, std::string(key) + " = " + std::to_string(idx) +
                                   " is out of range for " + std::to_string(n) + " responses");
    }
    return idx;
}

} // namespace detail

/// Parses and validates one judgments record.
inline DatasetRecord parse_judgments_line(const std::string& text, std::size_t line) {
    DatasetRecord rec;
    rec.line = line;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    try {
        if (!j.is_object()) throw ParseError(line, "record must be a JSON object");
        auto& pj = rec.judgments;
        pj.prompt_key = j.at("prompt_key").get<std::string>();
        pj.prompt = j.at("prompt").get<std::string>();
        pj.responses = j.at("responses").get<std::vector<std::string>>();
        if (pj.responses.empty()) throw ParseError(line, "responses must not be empty");
        const auto n = pj.responses.size();
        for (const auto& jr : j.at("judgments")) {
            JudgmentRecord r;
            r.prompt_key = pj.prompt_key;
            r.first = NodeId{detail::index_field(jr, "i", n, line)};
            r.second = NodeId{detail::index_field(jr, "j", n, line)};
            if (r.first == r.second) {
                throw ParseError(line, "judgment compares response " +
                                           std::to_string(r.first.value) + " with itself");
            }
            r.confidence_forward = detail::confidence_field(jr, "conf_fwd", line);
            if (jr.contains("conf_rev") && !jr.at("conf_rev").is_null()) {
                r.confidence_reverse = detail::confidence_field(jr, "conf_rev", line);
            }
            pj.judgments.push_back(std::move(r));
        }
        if (j.contains("rewards") && !j.at("rewards").is_null()) {
            auto rewards = j.at("rewards").get<std::vector<double>>();
            if (rewards.size() != n) throw ParseError(line, "rewards must have one value per response");
            for (double r : rewards) {
                if (!std::isfinite(r)) throw ParseError(line, "rewards must be finite");
            }
            rec.rewards = std::move(rewards);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line, e.what());
    }
    return rec;
}

/// Reads a whole judgments file. Blank lines are skipped; a prompt_key may
/// appear only once.
inline std::vector<DatasetRecord> read_judgments(std::istream& in) {
    std::vector<DatasetRecord> records;
    std::map<std::string, std::size_t> first_seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto rec = parse_judgments_line(text, line);
        auto [it, fresh] = first_seen.emplace(rec.judgments.prompt_key, line);
        if (!fresh) {
            throw ParseError(line, "prompt_key \"" + rec.judgments.prompt_key +
                                       "\" already defined on line " + std::to_string(it->second));
        }
        records.push_back(std::move(rec));
    }
    if (in.bad()) throw IoError("failed reading judgments input");
    return records;
}

inline ordered_json to_json(const PromptJudgments& pj,
                            const std::optional<std::vector<double>>& rewards = std::nullopt) {
    ordered_json judgments = ordered_json::array();
    for (const auto& r : pj.judgments) {
        judgments.push_back({{"i", r.first.value},
                             {"j", r.second.value},
                             {"conf_fwd", r.confidence_forward},
                             {"conf_rev", r.confidence_reverse ? ordered_json(*r.confidence_reverse)
                                                               : ordered_json(nullptr)}});
    }
    ordered_json j{{"prompt_key", pj.prompt_key},
                   {"prompt", pj.prompt},
                   {"responses", pj.responses},
                   {"judgments", std::move(judgments)}};
    if (rewards) j["rewards"] = *rewards;
    return j;
}

inline void write_judgments_line(std::ostream& out, const PromptJudgments& pj,
                                 const std::optional<std::vector<double>>& rewards = std::nullopt) {
    out << to_json(pj, rewards).dump() << '\n';
    if (!out) throw IoError("failed writing judgments record");
}

inline ordered_json edge_ref(const PreferenceEdge& e) { return {e.src.value, e.dst.value}; }

inline ordered_json edge_refs(std::span<const PreferenceEdge> edges) {
    ordered_json out = ordered_json::array();
    for (const auto& e : edges) out.push_back(edge_ref(e));
    return out;
}

/// Stable report of one solve: per-edge classification in graph order, each
/// class in solver order, witnesses as node paths.
inline ordered_json to_json(const SolverResult& result, const PreferenceGraph& graph) {
    std::map<std::pair<std::size_t, std::size_t>, const char*> cls;
    for (const auto& e : result.kept) cls[ByNodePair::key(e)] = "kept";
    for (const auto& e : result.contradictory) cls[ByNodePair::key(e)] = "contradictory";
    for (const auto& e : result.omitted) cls[ByNodePair::key(e)] = "omitted";
    std::set<std::pair<std::size_t, std::size_t>> heuristic;
    for (const auto& e : result.heuristic) heuristic.insert(ByNodePair::key(e));

    ordered_json edges = ordered_json::array();
    for (const auto& e : graph.edges()) {
        auto it = cls.find(ByNodePair::key(e));
        edges.push_back({{"src", e.src.value},
                         {"dst", e.dst.value},
                         {"weight", e.weight},
                         {"class", it == cls.end() ? "unclassified" : it->second},
                         {"heuristic", heuristic.contains(ByNodePair::key(e))}});
    }
    ordered_json witnesses = ordered_json::array();
    for (const auto& w : result.witnesses) {
        ordered_json path = ordered_json::array();
        if (!w.cycle_path.empty()) path.push_back(w.cycle_path.front().src.value);
        for (const auto& e : w.cycle_path) path.push_back(e.dst.value);
        witnesses.push_back({{"edge", edge_ref(w.contradictory_edge)}, {"path", std::move(path)}});
    }
    return {{"prompt_key", graph.prompt_key()},
            {"node_count", result.node_count},
            {"iterations", result.iteration_count},
            {"edges", std::move(edges)},
            {"kept", edge_refs(result.kept)},
            {"contradictory", edge_refs(result.contradictory)},
            {"heuristic", edge_refs(result.heuristic)},
            {"omitted", edge_refs(result.omitted)},
            {"witnesses", std::move(witnesses)}};
}

inline ordered_json to_json(const GraphStats& s) {
    ordered_json j{{"prompt_key", s.prompt_key},
                   {"node_count", s.node_count},
                   {"edge_count", s.edge_count},
                   {"has_cycle", s.has_cycle}};
    if (s.classes) {
        j["classes"] = {{"kept", s.classes->kept},
                        {"contradictory", s.classes->contradictory},
                        {"omitted", s.classes->omitted},
                        {"heuristic", s.classes->heuristic},
                        {"definite", s.classes->definite}};
    }
    j["weight_histogram"] = s.weight_histogram;
    return j;
}

inline ordered_json to_json(const VerificationReport& r) {
    ordered_json j{{"kept_acyclic", r.kept_acyclic},
                   {"aligned_acyclic", r.aligned_acyclic},
                   {"local_optimality", r.local_optimality},
                   {"partition_total", r.partition_total}};
    j["counterexample"] = r.counterexample ? ordered_json(*r.counterexample) : ordered_json(nullptr);
    return j;
}

} // namespace contrasolver
