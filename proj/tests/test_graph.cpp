#include <random>

#include <gtest/gtest.h>

#include "contrasolver/graph.hpp"
#include "oracles.hpp"

using namespace contrasolver;

namespace {

constexpr NodeId A{0}, B{1}, C{2}, D{3};

PromptJudgments prompt_with(std::size_t n, std::vector<JudgmentRecord> judgments) {
    PromptJudgments p{"p", "the prompt", oracle::labels(n), std::move(judgments)};
    return p;
}

JudgmentRecord judge(NodeId first, NodeId second, double fwd,
                     std::optional<double> rev = std::nullopt) {
    return {"p", first, second, fwd, rev};
}

} // namespace

TEST(Debias, MeanOfReadings) {
    EXPECT_DOUBLE_EQ(debias_confidence(0.7, 0.7), 0.7);
    EXPECT_DOUBLE_EQ(debias_confidence(0.5, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(debias_confidence(0.9, 0.6), 0.75);
}

TEST(Debias, MissingSwappedReadingUsesForward) {
    EXPECT_DOUBLE_EQ(debias_confidence(0.8, std::nullopt), 0.8);
}

TEST(Debias, RejectsOutOfRangeNamingField) {
    try {
        debias_confidence(0.5, 1.2);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("confidence_reverse"), std::string::npos);
    }
    EXPECT_THROW(debias_confidence(-0.1, 0.5), ValidationError);
    EXPECT_THROW(debias_confidence(std::nan(""), std::nullopt), ValidationError);
}

TEST(Debias, ComplementaryReadingsSumToOne) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double f = u(rng), r = u(rng);
        EXPECT_NEAR(debias_confidence(f, r) + debias_confidence(1 - f, 1 - r), 1.0, 1e-15);
    }
}

TEST(BuildGraph, IndifferentJudgmentGivesNoEdge) {
    auto g = build_graph(prompt_with(2, {judge(A, B, 0.5)}), 0.51);
    EXPECT_TRUE(g.edges().empty());
}

TEST(BuildGraph, ConfidentJudgmentGivesOneEdge) {
    auto g = build_graph(prompt_with(2, {judge(A, B, 0.9)}), 0.51);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_EQ(g.edges()[0], (PreferenceEdge{A, B, 0.9}));
}

TEST(BuildGraph, LowConfidencePointsTheOtherWay) {
    auto g = build_graph(prompt_with(2, {judge(A, B, 0.2)}), 0.51);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_EQ(g.edges()[0].src, B);
    EXPECT_EQ(g.edges()[0].dst, A);
    EXPECT_DOUBLE_EQ(g.edges()[0].weight, 0.8);
}

TEST(BuildGraph, ThreeCycle) {
    auto g = build_graph(prompt_with(3, {judge(A, B, 0.9), judge(B, C, 0.8), judge(C, A, 0.6)}), 0.51);
    ASSERT_EQ(g.edges().size(), 3u);
    EXPECT_EQ(g.edge_between(A, B), (PreferenceEdge{A, B, 0.9}));
    EXPECT_EQ(g.edge_between(B, C), (PreferenceEdge{B, C, 0.8}));
    EXPECT_EQ(g.edge_between(A, C), (PreferenceEdge{C, A, 0.6}));
    EXPECT_FALSE(is_dag(g.edges(), g.node_count()));
}

TEST(BuildGraph, ThresholdFiltersWeakEdges) {
    auto g = build_graph(prompt_with(2, {judge(A, B, 0.505)}), 0.51);
    EXPECT_TRUE(g.edges().empty());
    auto loose = build_graph(prompt_with(2, {judge(A, B, 0.505)}), 0.5);
    EXPECT_EQ(loose.edges().size(), 1u);
}

TEST(BuildGraph, SwappedReadingIsAveraged) {
    auto g = build_graph(prompt_with(2, {judge(A, B, 0.9, 0.6)}), 0.51);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_DOUBLE_EQ(g.edges()[0].weight, 0.75);
    // the swapped reading can cancel the forward one
    EXPECT_TRUE(build_graph(prompt_with(2, {judge(A, B, 0.7, 0.3)}), 0.51).edges().empty());
}

TEST(BuildGraph, SelfPairIsRejected) {
    EXPECT_THROW(build_graph(prompt_with(2, {judge(A, A, 0.9)})), ValidationError);
}

TEST(BuildGraph, UnknownNodeIsRejected) {
    EXPECT_THROW(build_graph(prompt_with(2, {judge(A, C, 0.9)})), ValidationError);
}

TEST(BuildGraph, ForeignPromptIsRejected) {
    auto p = prompt_with(2, {judge(A, B, 0.9)});
    p.judgments[0].prompt_key = "other";
    EXPECT_THROW(build_graph(p), ValidationError);
}

TEST(BuildGraph, DeltaBelowHalfIsRejected) {
    EXPECT_THROW(build_graph(prompt_with(2, {}), 0.4), ValidationError);
}

TEST(BuildGraph, InconsistentDuplicatesKeepStrongerAndWarn) {
    BuildDiagnostics diag;
    auto g = build_graph(prompt_with(2, {judge(A, B, 0.7), judge(B, A, 0.8)}), 0.51, &diag);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_EQ(g.edges()[0], (PreferenceEdge{B, A, 0.8}));
    EXPECT_EQ(diag.inconsistent_duplicates, 1u);
}

TEST(BuildGraph, ConsistentDuplicatesDoNotWarn) {
    BuildDiagnostics diag;
    auto g = build_graph(prompt_with(2, {judge(A, B, 0.7), judge(B, A, 0.1)}), 0.51, &diag);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_EQ(g.edges()[0], (PreferenceEdge{A, B, 0.9}));
    EXPECT_EQ(diag.inconsistent_duplicates, 0u);
}

TEST(BuildGraph, ThresholdMonotonicity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> d(0.5, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<JudgmentRecord> js;
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = i + 1; j < 6; ++j) js.push_back(judge(NodeId{i}, NodeId{j}, u(rng), u(rng)));
        auto lo = d(rng), hi = d(rng);
        if (lo > hi) std::swap(lo, hi);
        auto loose = build_graph(prompt_with(6, js), lo);
        auto strict = build_graph(prompt_with(6, js), hi);
        for (const auto& e : strict.edges()) {
            EXPECT_EQ(loose.edge_between(e.src, e.dst), e);
        }
    }
}

TEST(PreferenceGraph, RejectsBrokenInvariants) {
    auto labels = oracle::labels(3);
    EXPECT_THROW(PreferenceGraph("k", "p", labels, {{A, A, 0.9}}), ValidationError);
    EXPECT_THROW(PreferenceGraph("k", "p", labels, {{A, B, 0.9}, {B, A, 0.8}}), ValidationError);
    EXPECT_THROW(PreferenceGraph("k", "p", labels, {{A, B, 0.5}}), ValidationError);
    EXPECT_THROW(PreferenceGraph("k", "p", labels, {{A, B, 1.01}}), ValidationError);
    EXPECT_THROW(PreferenceGraph("k", "p", labels, {{A, D, 0.9}}), ValidationError);
    EXPECT_THROW(PreferenceGraph("k", "p", {}, {}), ValidationError);
    EXPECT_THROW(PreferenceGraph("k", "p", labels, {{A, B, 0.505}}, 0.51), ValidationError);
}

TEST(Reachable, Examples) {
    EdgeList chain{{A, B, 0.9}, {B, C, 0.8}};
    EXPECT_TRUE(reachable(chain, 3, A, C));
    EXPECT_FALSE(reachable(chain, 3, C, A));
    EXPECT_TRUE(reachable({}, 1, A, A));
    EXPECT_THROW(reachable(chain, 3, A, D), ValidationError);
}

TEST(FindPath, Examples) {
    EdgeList chain{{A, B, 0.9}, {B, C, 0.8}};
    EXPECT_EQ(find_path(chain, 3, A, C), (EdgeList{{A, B, 0.9}, {B, C, 0.8}}));
    EXPECT_EQ(find_path(EdgeList{{A, B, 0.9}}, 2, B, A), std::nullopt);
    EXPECT_EQ(find_path(chain, 3, B, B), EdgeList{});
    EXPECT_THROW(find_path(chain, 3, D, A), ValidationError);
}

TEST(FindPath, TieBreaksTowardSmallerIndex) {
    EdgeList diamond{{A, C, 0.9}, {C, D, 0.9}, {A, B, 0.6}, {B, D, 0.6}};
    EXPECT_EQ(find_path(diamond, 4, A, D), (EdgeList{{A, B, 0.6}, {B, D, 0.6}}));
}

TEST(FindPath, PrefersFewerEdges) {
    EdgeList edges{{A, B, 0.9}, {B, C, 0.9}, {C, D, 0.9}, {A, D, 0.6}};
    EXPECT_EQ(find_path(edges, 4, A, D), (EdgeList{{A, D, 0.6}}));
}

TEST(IsDag, Examples) {
    EXPECT_TRUE(is_dag({}, 3));
    EXPECT_FALSE(is_dag(EdgeList{{A, B, 0.9}, {B, C, 0.8}, {C, A, 0.6}}, 3));
    EXPECT_TRUE(is_dag(EdgeList{{A, B, 0.9}, {B, C, 0.8}, {A, C, 0.7}}, 3));
}

TEST(FindCycle, ReturnsClosedWalk) {
    EdgeList edges{{A, B, 0.9}, {B, C, 0.8}, {C, A, 0.6}, {C, D, 0.7}};
    auto cycle = find_cycle(edges, 4);
    ASSERT_TRUE(cycle);
    ASSERT_EQ(cycle->size(), 3u);
    for (std::size_t k = 0; k < cycle->size(); ++k) {
        EXPECT_EQ((*cycle)[k].dst, (*cycle)[(k + 1) % cycle->size()].src);
    }
    EXPECT_FALSE(find_cycle(EdgeList{{A, B, 0.9}}, 2));
}

// Random graphs up to 8 nodes against brute-force references.
TEST(GraphOracles, ReachabilityMatchesMatrixClosure) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = size(rng);
        auto edges = oracle::random_sparse(n, density(rng), rng);
        auto closure = oracle::closure_by_squaring(edges, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                ASSERT_EQ(reachable(edges, n, NodeId{i}, NodeId{j}), closure[i][j]);
                auto path = find_path(edges, n, NodeId{i}, NodeId{j});
                ASSERT_EQ(path.has_value(), closure[i][j]);
                if (path && !path->empty()) {
                    EXPECT_EQ(path->front().src, NodeId{i});
                    EXPECT_EQ(path->back().dst, NodeId{j});
                }
            }
        }
    }
}

TEST(GraphOracles, AcyclicityMatchesCycleEnumeration) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    int cyclic = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = size(rng);
        auto edges = oracle::random_sparse(n, density(rng), rng);
        const bool has_cycle = oracle::has_cycle_by_enumeration(edges, n);
        cyclic += has_cycle;
        ASSERT_EQ(is_dag(edges, n), !has_cycle);
        ASSERT_EQ(find_cycle(edges, n).has_value(), has_cycle);
    }
    EXPECT_GT(cyclic, 50);
    EXPECT_LT(cyclic, 450);
}
