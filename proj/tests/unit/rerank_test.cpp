#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "grit/rerank.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace grit;
using testutil::P;
using testutil::Q;

namespace {

RunList ranked(std::string const& qid, std::vector<std::string> const& ids)
{
    std::vector<RunEntry> entries;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        entries.push_back({i + 1, P(ids[i]), static_cast<double>(ids.size() - i)});
    }
    return RunList(Q(qid), entries);
}

std::vector<std::string> ids_of(RunList const& run)
{
    std::vector<std::string> out;
    for (auto const& e : run) {
        out.push_back(e.product_id.str());
    }
    return out;
}

SimilarityGraph worked_graph()
{
    return SimilarityGraph::from_edges(
        {{P("d1"), P("x"), 5}, {P("d1"), P("y"), 2}, {P("d2"), P("y"), 4}, {P("d2"), P("d3"), 9}});
}

RunList worked_run()
{
    return ranked("q", {"d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9", "d10"});
}

struct Instance {
    std::vector<oracle::Entry> entries;
    oracle::EdgeMap edges;
    RunList run;
    SimilarityGraph graph;
};

// n <= 20, graph <= 15 nodes drawn from a 25-product pool shared with the run.
Instance random_instance(std::mt19937& rng)
{
    Instance inst;
    std::uniform_int_distribution<int> len(0, 20), pick(0, 24), nnodes(0, 15), w(1, 6), tie(0, 2);
    std::vector<int> pool(25);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    int n = len(rng);
    double score = 100.0;
    for (int i = 0; i < n; ++i) {
        if (tie(rng) != 0) {
            score -= 0.5;
        }
        inst.entries.push_back({oracle::pid(static_cast<std::size_t>(pool[i])), score});
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::string> nodes;
    int nn = nnodes(rng);
    for (int i = 0; i < nn; ++i) {
        nodes.push_back(oracle::pid(static_cast<std::size_t>(pool[i])));
    }
    std::vector<Edge> edges;
    std::bernoulli_distribution coin(0.3);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (coin(rng)) {
                auto weight = static_cast<std::uint32_t>(w(rng));
                edges.push_back({P(nodes[i]), P(nodes[j]), weight});
                inst.edges[{nodes[i], nodes[j]}] = weight;
                inst.edges[{nodes[j], nodes[i]}] = weight;
            }
        }
    }
    std::vector<RunEntry> run;
    for (std::size_t i = 0; i < inst.entries.size(); ++i) {
        run.push_back({i + 1, P(inst.entries[i].product), inst.entries[i].score});
    }
    inst.run = RunList(Q("q"), run);
    inst.graph = SimilarityGraph::from_edges(edges);
    return inst;
}

}  // namespace

TEST(Counts, DefaultOperatingPoint)
{
    EXPECT_EQ(seed_count(0.02, 1000), 20u);
    EXPECT_EQ(replace_count(0.3, 1000), 300u);
}

TEST(Counts, CeilAndFloorWithFloatNoise)
{
    EXPECT_EQ(seed_count(0.0, 1000), 0u);
    EXPECT_EQ(seed_count(0.001, 10), 1u);
    EXPECT_EQ(seed_count(1.0, 10), 10u);
    EXPECT_EQ(seed_count(0.2, 10), 2u);
    // 0.035 * 2000 is 70.00000000000001 in binary floating point.
    EXPECT_EQ(seed_count(0.035, 2000), 70u);
    EXPECT_EQ(replace_count(0.3, 10), 3u);
    EXPECT_EQ(replace_count(0.29, 10), 2u);
    // 0.1 * 3 * 10 style noise: 0.7 * 10 = 7.000000000000001.
    EXPECT_EQ(replace_count(0.7, 10), 7u);
    EXPECT_EQ(replace_count(0.0, 10), 0u);
}

TEST(Counts, AgreeWithIndependentLoops)
{
    for (std::size_t n : {1u, 7u, 10u, 99u, 500u, 1000u, 1500u, 2000u}) {
        for (int ti = 0; ti <= 40; ++ti) {
            double t = ti * 0.005;
            auto expected = ti == 0 ? 0 : std::min(n, oracle::ceil_count(t * static_cast<double>(n)));
            EXPECT_EQ(seed_count(t, n), expected) << "t=" << t << " n=" << n;
        }
        for (int bi = 0; bi <= 10; ++bi) {
            double b = bi * 0.1;
            EXPECT_EQ(replace_count(b, n), oracle::floor_count(b * static_cast<double>(n))) << "b=" << b << " n=" << n;
        }
    }
}

TEST(GritRerank, WorkedExample)
{
    auto out = grit_rerank(worked_run(), worked_graph(), GritParams{0.2, 0.3});
    EXPECT_EQ(ids_of(out), (std::vector<std::string>{"d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "y", "x"}));
    // Prefix untouched, inserted scores continue below rank 8.
    EXPECT_EQ(out[7].score, 3.0);
    EXPECT_DOUBLE_EQ(out[8].score, 3.0 - 1e-6);
    EXPECT_DOUBLE_EQ(out[9].score, 3.0 - 2e-6);
    EXPECT_EQ(out[9].rank, 10u);
}

TEST(GritRerank, FullResultWeighting)
{
    // d3 is a non-seed result adjacent to x: summing over the full list lifts x above y.
    auto graph = SimilarityGraph::from_edges(
        {{P("d1"), P("x"), 5}, {P("d1"), P("y"), 2}, {P("d2"), P("y"), 4}, {P("d3"), P("x"), 2}});
    GritParams seeds{0.2, 0.1};
    GritParams full{0.2, 0.1, NeighborWeighting::full_result};
    EXPECT_EQ(grit_rerank(worked_run(), graph, seeds)[9].product_id, P("y"));
    EXPECT_EQ(grit_rerank(worked_run(), graph, full)[9].product_id, P("x"));
}

TEST(GritRerank, IdentityAtDegenerateParameters)
{
    auto run = worked_run();
    auto graph = worked_graph();
    EXPECT_EQ(grit_rerank(run, graph, GritParams{0.0, 0.3}), run);
    EXPECT_EQ(grit_rerank(run, graph, GritParams{0.5, 0.0}), run);
    EXPECT_EQ(grit_rerank(run, SimilarityGraph{}, GritParams{0.5, 0.5}), run);
    EXPECT_EQ(grit_rerank(RunList(), graph, GritParams{0.5, 0.5}), RunList());
}

TEST(GritRerank, SeedsWithoutOutsideNeighbors)
{
    auto graph = SimilarityGraph::from_edges({{P("d1"), P("d2"), 3}, {P("d1"), P("d9"), 1}});
    EXPECT_EQ(grit_rerank(worked_run(), graph, GritParams{0.2, 0.5}), worked_run());
}

TEST(GritRerank, ShortCandidateListReplacesOnlyThatMany)
{
    auto graph = SimilarityGraph::from_edges({{P("d1"), P("x"), 1}});
    auto out = grit_rerank(worked_run(), graph, GritParams{0.1, 0.5});
    EXPECT_EQ(ids_of(out), (std::vector<std::string>{"d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9", "x"}));
}

TEST(GritRerank, EverythingReplacedStartsFromZero)
{
    auto graph = SimilarityGraph::from_edges({{P("a"), P("x"), 2}, {P("a"), P("y"), 1}});
    // b just under 1 snaps to replacing the whole single-entry list.
    auto out = grit_rerank(ranked("q", {"a"}), graph, GritParams{1.0, 1.0 - 1e-12});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].product_id, P("x"));
    EXPECT_DOUBLE_EQ(out[0].score, -1e-6);
}

TEST(GritRerank, RejectsOutOfRangeParams)
{
    EXPECT_THROW(grit_rerank(worked_run(), worked_graph(), GritParams{-0.1, 0.3}), ConfigError);
    EXPECT_THROW(grit_rerank(worked_run(), worked_graph(), GritParams{0.1, 1.3}), ConfigError);
}

TEST(GritBatch, Examples)
{
    auto graph = worked_graph();
    GritParams params{0.2, 0.3};
    EXPECT_TRUE(grit_batch(RunMap{}, graph, params).empty());

    RunMap runs;
    runs.emplace(Q("q1"), worked_run());
    runs.emplace(Q("q2"), ranked("q2", {"a", "b", "c", "d", "e"}));
    auto out = grit_batch(runs, graph, params, 2);
    EXPECT_EQ(out.at(Q("q2")), runs.at(Q("q2")));
    EXPECT_EQ(out.at(Q("q1")), grit_rerank(runs.at(Q("q1")), graph, params));
    EXPECT_EQ(grit_batch(runs, graph, params, 1), out);
}

// ---------------------------------------------------------------------------

TEST(GritProperty, MatchesBruteForceOracle)
{
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    std::uniform_int_distribution<int> t_grid(0, 20);
    std::uniform_int_distribution<int> b_grid(0, 19);  // b < 1
    for (int trial = 0; trial < 300; ++trial) {
        auto inst = random_instance(rng);
        // Mix grid points (exact multiples) and arbitrary fractions.
        double t = trial % 2 ? t_grid(rng) * 0.05 : frac(rng);
        double b = trial % 3 ? b_grid(rng) * 0.05 : frac(rng);
        for (auto weighting : {NeighborWeighting::seeds, NeighborWeighting::full_result}) {
            auto out = grit_rerank(inst.run, inst.graph, GritParams{t, b, weighting});
            auto expected = oracle::brute_force_rerank(
                inst.entries, inst.edges, t, b, weighting == NeighborWeighting::full_result);
            ASSERT_EQ(out.size(), expected.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                EXPECT_EQ(out[i].product_id.str(), expected[i].product);
                EXPECT_EQ(out[i].score, expected[i].score);
                EXPECT_EQ(out[i].rank, i + 1);
            }
        }
    }
}

TEST(GritProperty, SizePrefixAndUniqueness)
{
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        auto inst = random_instance(rng);
        double b = frac(rng);
        auto out = grit_rerank(inst.run, inst.graph, GritParams{frac(rng), b});
        ASSERT_EQ(out.size(), inst.run.size());
        std::size_t changed = 0;
        std::set<std::string> seen;
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_TRUE(seen.insert(out[i].product_id.str()).second);
            if (out[i] != inst.run[i]) {
                ++changed;
            } else {
                EXPECT_EQ(changed, 0u) << "prefix must be contiguous";
            }
        }
        EXPECT_LE(changed, replace_count(b, inst.run.size()));
    }
}

TEST(GritProperty, IdentityAtZero)
{
    std::mt19937 rng(44);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = random_instance(rng);
        EXPECT_EQ(grit_rerank(inst.run, inst.graph, GritParams{0.0, frac(rng)}), inst.run);
        EXPECT_EQ(grit_rerank(inst.run, inst.graph, GritParams{frac(rng), 0.0}), inst.run);
    }
}

TEST(GritProperty, AddingSeedEdgeNeverLowersCandidateWeight)
{
    // With one inserted slot, strengthening the winner's edge keeps it the winner.
    std::mt19937 rng(45);
    for (int trial = 0; trial < 100; ++trial) {
        auto inst = random_instance(rng);
        auto n = inst.run.size();
        if (n < 2) {
            continue;
        }
        GritParams params{0.5, 1.0 / static_cast<double>(n)};
        auto out = grit_rerank(inst.run, inst.graph, params);
        if (out == inst.run) {
            continue;
        }
        auto winner = out[n - 1].product_id;
        auto edges = inst.graph.edges();
        for (auto& e : edges) {
            if ((e.p == winner && e.q == inst.run[0].product_id) || (e.q == winner && e.p == inst.run[0].product_id)) {
                e.weight += 3;
            }
        }
        if (inst.graph.weight(winner, inst.run[0].product_id) == 0) {
            edges.push_back({winner, inst.run[0].product_id, 3});
        }
        auto boosted = grit_rerank(inst.run, SimilarityGraph::from_edges(edges), params);
        EXPECT_EQ(boosted[n - 1].product_id, winner);
    }
}
