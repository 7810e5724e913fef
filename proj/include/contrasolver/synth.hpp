#pragma once

// Synthetic annotator with known latent rewards, for checking selections
// against ground truth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "contrasolver/error.hpp"
#include "contrasolver/graph.hpp"
#include "contrasolver/selection.hpp"

namespace contrasolver {

/// Bradley-Terry probability that the response with reward r_i beats the one
/// with reward r_j. Shifted by the larger reward so neither exponent overflows.
inline double bt_probability(double r_i, double r_j) {
    if (!std::isfinite(r_i) || !std::isfinite(r_j)) {
        throw ValidationError("Bradley-Terry rewards must be finite");
    }
    const double top = std::max(r_i, r_j);
    const double a = std::exp(r_i - top);
    const double b = std::exp(r_j - top);
    return a / (a + b);
}

/// One Bradley-Terry draw: true when i is preferred over j.
template <class Rng>
bool sample_bt_preference(double r_i, double r_j, Rng& rng) {
    return std::bernoulli_distribution(bt_probability(r_i, r_j))(rng);
}

struct GroundTruthInstance {
    std::vector<double> rewards;
    PreferenceGraph graph;
    std::uint64_t seed = 0;
};

struct SynthParams {
    std::size_t nodes = 8;
    double reward_spread = 4.0;
    double noise = 0.0;  // probability a judged direction is flipped
};

inline void validate(const SynthParams& p) {
    if (p.nodes < 2) throw ValidationError("synthetic instances need at least 2 nodes");
    if (!(p.reward_spread > 0.0) || !std::isfinite(p.reward_spread)) {
        throw ValidationError("reward spread must be a positive finite number");
    }
    if (!(p.noise >= 0.0 && p.noise < 0.5)) throw ValidationError("noise must lie in [0, 0.5)");
}

inline std::string synth_response_text(std::size_t index) {
    return "response " + std::to_string(index);
}

/// Judgments for a complete tournament over rewards drawn uniformly from
/// [0, spread]. Each pair points toward the higher reward with probability
/// 1 - noise and is flipped otherwise; the weight is always the larger of
/// the two Bradley-Terry probabilities.
inline PromptJudgments gen_judgments(const SynthParams& params, std::uint64_t seed,
                                     std::vector<double>& rewards, std::string prompt_key) {
    validate(params);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> reward(0.0, params.reward_spread);
    std::bernoulli_distribution flip(params.noise);
    rewards.resize(params.nodes);
    for (auto& r : rewards) r = reward(rng);

    PromptJudgments out;
    out.prompt_key = std::move(prompt_key);
    out.prompt = "synthetic prompt " + out.prompt_key;
    for (std::size_t i = 0; i < params.nodes; ++i) out.responses.push_back(synth_response_text(i));
    for (std::size_t i = 0; i < params.nodes; ++i) {
        for (std::size_t j = i + 1; j < params.nodes; ++j) {
            const double p = bt_probability(rewards[i], rewards[j]);
            const double strength = std::max(p, 1.0 - p);
            NodeId winner{p >= 0.5 ? i : j};
            NodeId loser{p >= 0.5 ? j : i};
            if (flip(rng)) std::swap(winner, loser);
            out.judgments.push_back({out.prompt_key, winner, loser, strength, std::nullopt});
        }
    }
    return out;
}

inline GroundTruthInstance gen_instance(const SynthParams& params, std::uint64_t seed,
                                        std::string prompt_key = {}) {
    if (prompt_key.empty()) prompt_key = "synth-" + std::to_string(seed);
    GroundTruthInstance inst;
    inst.seed = seed;
    auto judgments = gen_judgments(params, seed, inst.rewards, std::move(prompt_key));
    inst.graph = build_graph(judgments, 0.5);
    return inst;
}

inline GroundTruthInstance gen_instance(std::size_t n, double reward_spread, double noise,
                                        std::uint64_t seed) {
    return gen_instance(SynthParams{n, reward_spread, noise}, seed);
}

/// Fraction of pairs whose chosen response truly has the higher reward.
/// nullopt for an empty list.
inline std::optional<double> agreement_with_truth(std::span<const TrainingPair> pairs,
                                                  const GroundTruthInstance& instance) {
    if (pairs.empty()) return std::nullopt;
    std::map<std::string, std::size_t, std::less<>> index;
    const auto& texts = instance.graph.responses();
    for (std::size_t k = 0; k < texts.size(); ++k) index.emplace(texts[k], k);
    auto lookup = [&](const std::string& text) {
        auto it = index.find(text);
        if (it == index.end()) {
            throw ValidationError("response \"" + text + "\" is not part of instance " +
                                  instance.graph.prompt_key());
        }
        return it->second;
    };
    std::size_t agree = 0;
    for (const auto& p : pairs) {
        if (instance.rewards.at(lookup(p.chosen)) > instance.rewards.at(lookup(p.rejected))) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(pairs.size());
}

} // namespace contrasolver
