#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "contrasolver/cli.hpp"

using namespace contrasolver;

namespace {

void add_io_flags(CLI::App* cmd, cli::RunConfig& cfg) {
    cmd->add_option("--input", cfg.input, "Judgments file (one JSON record per line)")->required();
    cmd->add_option("--delta", cfg.delta, "Edge confidence threshold")->capture_default_str();
    cmd->add_option("--parallel", cfg.parallel, "Worker threads")->capture_default_str();
    cmd->add_option("--report", cfg.report, "JSON report path");
}

void add_selection_flags(CLI::App* cmd, cli::RunConfig& cfg, std::string& strategy) {
    cmd->add_option("--strategy", strategy, "contrasolver | random | max-confidence")
        ->capture_default_str();
    cmd->add_option("--budget", cfg.budget,
                    "Pairs per prompt for baselines (default: the prompt's heuristic edge count)");
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contradiction-aware selection of pairwise preference data"};
    app.require_subcommand(1);
    cli::RunConfig cfg;
    std::string strategy = "contrasolver";

    auto* solve_cmd = app.add_subcommand("solve", "Resolve contradictions and export training pairs");
    add_io_flags(solve_cmd, cfg);
    add_selection_flags(solve_cmd, cfg, strategy);
    solve_cmd->add_option("--output", cfg.output, "Pairs file (stdout when omitted)");

    auto* stats_cmd = app.add_subcommand("stats", "Contradiction statistics without solving");
    add_io_flags(stats_cmd, cfg);
    stats_cmd->add_option("--output", cfg.output, "JSON stats file");

    auto* synth_cmd = app.add_subcommand("synth", "Compare strategies on Bradley-Terry instances");
    synth_cmd->add_option("--instances", cfg.instances, "Number of instances")->capture_default_str();
    synth_cmd->add_option("--nodes", cfg.synth.nodes, "Responses per instance")->capture_default_str();
    synth_cmd->add_option("--noise", cfg.synth.noise, "Direction flip probability")
        ->capture_default_str();
    synth_cmd->add_option("--spread", cfg.synth.reward_spread, "Rewards drawn from [0, spread]")
        ->capture_default_str();
    synth_cmd->add_option("--budget", cfg.budget,
                          "Baseline pairs per instance (default: the heuristic edge count)");
    synth_cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--parallel", cfg.parallel, "Worker threads")->capture_default_str();
    synth_cmd->add_option("--output", cfg.output, "JSON comparison table");
    synth_cmd->add_option("--report", cfg.report, "Second copy of the JSON table");
    synth_cmd->add_option("--dataset", cfg.dataset, "Write the instances as a judgments file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kBadInput;
    }

    cli::Log log;
    auto parsed = parse_strategy(strategy);
    if (!parsed) {
        log.error("unknown strategy '" + strategy + "'");
        return cli::kBadInput;
    }
    cfg.strategy = *parsed;

    try {
        if (solve_cmd->parsed()) return cli::cmd_solve(cfg, std::cout, log);
        if (stats_cmd->parsed()) return cli::cmd_stats(cfg, std::cout, log);
        if (synth_cmd->parsed()) return cli::cmd_synth(cfg, std::cout, log);
    } catch (const std::exception& e) {
        log.error(e.what());
        return cli::kFailure;
    }
    return cli::kFailure;
}
