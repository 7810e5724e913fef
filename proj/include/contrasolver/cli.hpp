#pragma once

// Batch commands behind the contrasolver executable. Each command returns a
// process exit status; output order is fixed by prompt_key so results do not
// depend on the degree of parallelism.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "contrasolver/analysis.hpp"
#include "contrasolver/error.hpp"
#include "contrasolver/graph.hpp"
#include "contrasolver/io.hpp"
#include "contrasolver/selection.hpp"
#include "contrasolver/solver.hpp"
#include "contrasolver/synth.hpp"

namespace contrasolver::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kBadInput = 2,       // unreadable input or invalid parameters
    kMalformed = 3,      // malformed record; message names the line
    kVerification = 4,   // a solved graph violated its guarantees
};

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::string report;
    double delta = kDefaultDelta;
    Strategy strategy = Strategy::contrasolver;
    std::optional<std::size_t> budget;  // per prompt; default matches |E_h|
    std::uint64_t seed = 0;
    unsigned parallel = 1;

    // synth only
    std::size_t instances = 100;
    SynthParams synth;
    std::string dataset;  // optional judgments file of the generated instances
};

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_level_from_env() {
    const char* raw = std::getenv("CONTRASOLVER_LOG");
    if (!raw) return LogLevel::warn;
    std::string_view v(raw);
    if (v == "error") return LogLevel::error;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

class Log {
public:
    explicit Log(std::ostream& sink = std::cerr, LogLevel level = log_level_from_env())
        : sink_(sink), level_(level) {}

    void error(const std::string& msg) const { write(LogLevel::error, "error", msg); }
    void warn(const std::string& msg) const { write(LogLevel::warn, "warn", msg); }
    void info(const std::string& msg) const { write(LogLevel::info, "info", msg); }
    void debug(const std::string& msg) const { write(LogLevel::debug, "debug", msg); }

private:
    void write(LogLevel at, const char* tag, const std::string& msg) const {
        if (at <= level_) sink_ << "[contrasolver " << tag << "] " << msg << '\n';
    }

    std::ostream& sink_;
    LogLevel level_;
};

/// Runs fn(k) for k in [0, count) on up to `workers` threads.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (auto k = next++; k < count; k = next++) fn(k);
        });
    }
}

// FNV-1a; gives each prompt its own seed regardless of processing order.
inline std::uint64_t prompt_seed(std::uint64_t seed, std::string_view key) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h ^ (seed * 0x9e3779b97f4a7c15ull);
}

inline std::vector<TrainingPair> select(Strategy strategy, const PreferenceGraph& graph,
                                        const SolverResult& result,
                                        std::optional<std::size_t> budget, std::uint64_t seed) {
    const auto n = budget.value_or(result.heuristic.size());
    switch (strategy) {
    case Strategy::contrasolver: return select_contrasolver(result, graph);
    case Strategy::random: return select_random(graph, n, prompt_seed(seed, graph.prompt_key()));
    case Strategy::max_confidence: return select_max_confidence(graph, n);
    }
    return {};
}

namespace detail {

inline std::optional<std::vector<DatasetRecord>> load(const RunConfig& cfg, const Log& log,
                                                      int& status) {
    std::ifstream in(cfg.input);
    if (!in) {
        log.error("cannot open input file '" + cfg.input + "'");
        status = kBadInput;
        return std::nullopt;
    }
    try {
        auto records = read_judgments(in);
        std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
            return a.judgments.prompt_key < b.judgments.prompt_key;
        });
        return records;
    } catch (const ParseError& e) {
        log.error(std::string("malformed record at ") + e.what());
        status = kMalformed;
    } catch (const IoError& e) {
        log.error(e.what());
        status = kBadInput;
    }
    return std::nullopt;
}

inline bool check_common(const RunConfig& cfg, const Log& log) {
    if (!(cfg.delta >= 0.5 && cfg.delta < 1.0)) {
        log.error("--delta must lie in [0.5, 1)");
        return false;
    }
    if (cfg.parallel < 1) {
        log.error("--parallel must be at least 1");
        return false;
    }
    return true;
}

// Writes `body` to `path`, or to `fallback` when path is empty.
inline bool write_text(const std::string& path, const std::string& body, std::ostream& fallback,
                       const Log& log) {
    if (path.empty()) {
        fallback << body;
        return static_cast<bool>(fallback);
    }
    std::ofstream out(path, std::ios::binary);
    out << body;
    out.flush();
    if (!out) {
        log.error("cannot write '" + path + "'");
        return false;
    }
    return true;
}

inline ordered_json nullable(std::optional<double> v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

} // namespace detail

/// Builds, solves and verifies every prompt, then exports pairs for the
/// configured strategy. Pairs go to --output (stdout when unset); the JSON
/// report with per-graph results goes to --report when set.
inline int cmd_solve(const RunConfig& cfg, std::ostream& out = std::cout, const Log& log = Log()) {
    if (!detail::check_common(cfg, log)) return kBadInput;
    int status = kOk;
    auto records = detail::load(cfg, log, status);
    if (!records) return status;

    struct Outcome {
        PreferenceGraph graph;
        SolverResult result;
        VerificationReport verification;
        std::vector<TrainingPair> pairs;
        std::size_t inconsistent_duplicates = 0;
        std::exception_ptr error;
    };
    std::vector<Outcome> outcomes(records->size());
    parallel_for(records->size(), cfg.parallel, [&](std::size_t k) {
        auto& o = outcomes[k];
        try {
            BuildDiagnostics diag;
            o.graph = build_graph((*records)[k].judgments, cfg.delta, &diag);
            o.inconsistent_duplicates = diag.inconsistent_duplicates;
            o.result = solve(o.graph);
            o.verification = verify_properties(o.result, o.graph);
            o.pairs = select(cfg.strategy, o.graph, o.result, cfg.budget, cfg.seed);
        } catch (...) {
            o.error = std::current_exception();
        }
    });

    std::vector<TrainingPair> pairs;
    std::vector<PreferenceGraph> graphs;
    std::vector<SolverResult> results;
    ordered_json per_graph = ordered_json::array();
    ClassCounts totals;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        auto& o = outcomes[k];
        const auto line = (*records)[k].line;
        if (o.error) {
            try {
                std::rethrow_exception(o.error);
            } catch (const ValidationError& e) {
                log.error("malformed record at line " + std::to_string(line) + ": " + e.what());
                return kMalformed;
            } catch (const std::exception& e) {
                log.error("prompt on line " + std::to_string(line) + " failed: " + e.what());
                return kVerification;
            }
        }
        if (!o.verification.ok()) {
            log.error("verification failed for prompt '" + o.graph.prompt_key() +
                      "': " + o.verification.counterexample.value_or("unknown"));
            return kVerification;
        }
        if (o.inconsistent_duplicates > 0) {
            log.warn("prompt '" + o.graph.prompt_key() + "': " +
                     std::to_string(o.inconsistent_duplicates) +
                     " node pair(s) judged in both directions; kept the stronger reading");
        }
        auto stats = compute_stats(o.graph, &o.result);
        totals.kept += stats.classes->kept;
        totals.contradictory += stats.classes->contradictory;
        totals.omitted += stats.classes->omitted;
        totals.heuristic += stats.classes->heuristic;
        totals.definite += stats.classes->definite;
        per_graph.push_back({{"stats", to_json(stats)},
                             {"inconsistent_duplicates", o.inconsistent_duplicates},
                             {"verification", to_json(o.verification)},
                             {"pairs", o.pairs.size()},
                             {"result", to_json(o.result, o.graph)}});
        pairs.insert(pairs.end(), o.pairs.begin(), o.pairs.end());
        graphs.push_back(std::move(o.graph));
        results.push_back(std::move(o.result));
    }

    std::ostringstream pair_text;
    export_pairs(pairs, pair_text);
    if (!detail::write_text(cfg.output, pair_text.str(), out, log)) return kBadInput;

    if (!cfg.report.empty()) {
        ordered_json report{
            {"command", "solve"},
            {"strategy", std::string(to_string(cfg.strategy))},
            {"delta", cfg.delta},
            {"prompts", graphs.size()},
            {"pairs", pairs.size()},
            {"contradiction_rate",
             graphs.empty() ? ordered_json(nullptr) : ordered_json(contradiction_rate(graphs))},
            {"post_alignment_rate", graphs.empty() ? ordered_json(nullptr)
                                                   : ordered_json(post_alignment_rate(graphs, results))},
            {"totals",
             {{"kept", totals.kept},
              {"contradictory", totals.contradictory},
              {"omitted", totals.omitted},
              {"heuristic", totals.heuristic},
              {"definite", totals.definite}}},
            {"graphs", std::move(per_graph)}};
        if (!detail::write_text(cfg.report, report.dump(2) + "\n", out, log)) return kBadInput;
    }
    log.info("solved " + std::to_string(graphs.size()) + " prompt(s), exported " +
             std::to_string(pairs.size()) + " pair(s)");
    return kOk;
}

/// Per-graph statistics and the dataset contradiction rate, without solving.
inline int cmd_stats(const RunConfig& cfg, std::ostream& out = std::cout, const Log& log = Log()) {
    if (!detail::check_common(cfg, log)) return kBadInput;
    int status = kOk;
    auto records = detail::load(cfg, log, status);
    if (!records) return status;

    std::vector<PreferenceGraph> graphs(records->size());
    std::vector<std::exception_ptr> errors(records->size());
    parallel_for(records->size(), cfg.parallel, [&](std::size_t k) {
        try {
            graphs[k] = build_graph((*records)[k].judgments, cfg.delta);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    });
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!errors[k]) continue;
        try {
            std::rethrow_exception(errors[k]);
        } catch (const std::exception& e) {
            log.error("malformed record at line " + std::to_string((*records)[k].line) + ": " +
                      e.what());
            return kMalformed;
        }
    }

    std::optional<double> rate;
    if (!graphs.empty()) rate = contradiction_rate(graphs);
    ordered_json per_graph = ordered_json::array();
    std::ostringstream table;
    table << std::left << std::setw(24) << "prompt_key" << std::right << std::setw(7) << "nodes"
          << std::setw(7) << "edges" << std::setw(7) << "cycle" << '\n';
    for (const auto& g : graphs) {
        auto s = compute_stats(g);
        table << std::left << std::setw(24) << s.prompt_key << std::right << std::setw(7)
              << s.node_count << std::setw(7) << s.edge_count << std::setw(7)
              << (s.has_cycle ? "yes" : "no") << '\n';
        per_graph.push_back(to_json(s));
    }
    table << "prompts: " << graphs.size() << '\n';
    table << "contradiction rate: ";
    if (rate) table << std::setprecision(6) << *rate << '\n';
    else table << "n/a\n";
    out << table.str();

    if (!cfg.report.empty() || !cfg.output.empty()) {
        ordered_json report{{"command", "stats"},
                            {"delta", cfg.delta},
                            {"prompts", graphs.size()},
                            {"contradiction_rate", detail::nullable(rate)},
                            {"graphs", std::move(per_graph)}};
        const auto& path = cfg.report.empty() ? cfg.output : cfg.report;
        if (!detail::write_text(path, report.dump(2) + "\n", out, log)) return kBadInput;
    }
    return kOk;
}

/// Generates synthetic instances with known rewards, runs all three
/// strategies on each and compares agreement with the ground truth.
inline int cmd_synth(const RunConfig& cfg, std::ostream& out = std::cout, const Log& log = Log()) {
    try {
        validate(cfg.synth);
    } catch (const ValidationError& e) {
        log.error(e.what());
        return kBadInput;
    }
    if (cfg.parallel < 1) {
        log.error("--parallel must be at least 1");
        return kBadInput;
    }

    constexpr std::array strategies{Strategy::contrasolver, Strategy::random, Strategy::max_confidence};
    struct Outcome {
        GroundTruthInstance instance;
        PromptJudgments judgments;
        SolverResult result;
        std::array<std::optional<double>, 3> agreement;
        std::array<std::size_t, 3> pair_count{};
        bool verified = true;
    };
    std::vector<Outcome> outcomes(cfg.instances);
    parallel_for(cfg.instances, cfg.parallel, [&](std::size_t k) {
        auto& o = outcomes[k];
        std::ostringstream key;
        key << "synth-" << std::setw(6) << std::setfill('0') << k;
        const std::uint64_t seed = cfg.seed * 1000003ull + k;
        o.instance.seed = seed;
        o.judgments = gen_judgments(cfg.synth, seed, o.instance.rewards, key.str());
        o.instance.graph = build_graph(o.judgments, 0.5);
        o.result = solve(o.instance.graph);
        o.verified = verify_properties(o.result, o.instance.graph).ok();
        for (std::size_t s = 0; s < strategies.size(); ++s) {
            auto pairs = select(strategies[s], o.instance.graph, o.result, cfg.budget, seed);
            o.pair_count[s] = pairs.size();
            o.agreement[s] = agreement_with_truth(pairs, o.instance);
        }
    });

    if (!cfg.dataset.empty()) {
        std::ostringstream body;
        for (const auto& o : outcomes) write_judgments_line(body, o.judgments, o.instance.rewards);
        if (!detail::write_text(cfg.dataset, body.str(), out, log)) return kBadInput;
    }

    std::vector<PreferenceGraph> graphs;
    std::vector<SolverResult> results;
    for (const auto& o : outcomes) {
        if (!o.verified) {
            log.error("verification failed for instance " + o.instance.graph.prompt_key());
            return kVerification;
        }
        graphs.push_back(o.instance.graph);
        results.push_back(o.result);
    }

    ordered_json rows = ordered_json::array();
    std::ostringstream table;
    table << std::left << std::setw(16) << "strategy" << std::right << std::setw(12) << "agreement"
          << std::setw(12) << "instances" << std::setw(10) << "pairs" << '\n';
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        double sum = 0.0;
        std::size_t scored = 0, total_pairs = 0;
        for (const auto& o : outcomes) {
            total_pairs += o.pair_count[s];
            if (o.agreement[s]) {
                sum += *o.agreement[s];
                ++scored;
            }
        }
        std::optional<double> mean;
        if (scored > 0) mean = sum / static_cast<double>(scored);
        table << std::left << std::setw(16) << to_string(strategies[s]) << std::right << std::setw(12);
        if (mean) table << std::fixed << std::setprecision(4) << *mean;
        else table << "n/a";
        table << std::setw(12) << scored << std::setw(10) << total_pairs << '\n';
        rows.push_back({{"strategy", std::string(to_string(strategies[s]))},
                        {"mean_agreement", detail::nullable(mean)},
                        {"scored_instances", scored},
                        {"pairs", total_pairs}});
    }
    std::optional<double> raw_rate, aligned_rate;
    if (!graphs.empty()) {
        raw_rate = contradiction_rate(graphs);
        aligned_rate = post_alignment_rate(graphs, results);
    }
    table << "contradiction rate: ";
    if (raw_rate) table << std::fixed << std::setprecision(4) << *raw_rate;
    else table << "n/a";
    table << "  after alignment: ";
    if (aligned_rate) table << std::fixed << std::setprecision(4) << *aligned_rate << '\n';
    else table << "n/a\n";

    ordered_json report{{"command", "synth"},
                        {"instances", cfg.instances},
                        {"nodes", cfg.synth.nodes},
                        {"noise", cfg.synth.noise},
                        {"reward_spread", cfg.synth.reward_spread},
                        {"seed", cfg.seed},
                        {"contradiction_rate", detail::nullable(raw_rate)},
                        {"post_alignment_rate", detail::nullable(aligned_rate)},
                        {"strategies", std::move(rows)}};
    out << table.str();
    for (const auto* path : {&cfg.output, &cfg.report}) {
        if (path->empty()) continue;
        if (!detail::write_text(*path, report.dump(2) + "\n", out, log)) return kBadInput;
    }
    return kOk;
}

} // namespace contrasolver::cli
