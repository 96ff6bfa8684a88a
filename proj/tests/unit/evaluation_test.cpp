#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "grit/evaluation.hpp"
#include "grit/sweep.hpp"
#include "test_util.hpp"

using namespace grit;
using testutil::P;
using testutil::Q;
using L = RelevanceLabel;

namespace {

RunList ranked(std::string const& qid, std::vector<std::string> const& ids)
{
    std::vector<RunEntry> entries;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        entries.push_back({i + 1, P(ids[i]), static_cast<double>(ids.size() - i)});
    }
    return RunList(Q(qid), entries);
}

std::size_t count_lines(std::string const& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Recall, HalfFound)
{
    std::map<ProductId, L> judged{{P("p1"), L::exact}, {P("p2"), L::exact}, {P("p3"), L::irrelevant}};
    EXPECT_EQ(recall_at_k(ranked("q", {"p1", "p3", "x"}), judged, 3, {}), 0.5);
}

TEST(Recall, ZeroRelevantIsUndefined)
{
    std::map<ProductId, L> judged{{P("p1"), L::irrelevant}};
    EXPECT_FALSE(recall_at_k(ranked("q", {"p1"}), judged, 10, {}).has_value());
}

TEST(Recall, ShortRunWithEverythingInside)
{
    std::map<ProductId, L> judged{{P("p1"), L::exact}, {P("p2"), L::exact}};
    EXPECT_EQ(recall_at_k(ranked("q", {"p2", "p1"}), judged, 1000, {}), 1.0);
}

TEST(Recall, RelevantSetWidensMatches)
{
    std::map<ProductId, L> judged{{P("p1"), L::exact}, {P("p2"), L::substitute}, {P("p3"), L::complement}};
    auto run = ranked("q", {"p2", "p3"});
    EXPECT_EQ(recall_at_k(run, judged, 10, RelevantSet::parse("E")), 0.0);
    EXPECT_EQ(recall_at_k(run, judged, 10, RelevantSet::parse("E,S")), 0.5);
    EXPECT_NEAR(*recall_at_k(run, judged, 10, RelevantSet::parse("E,S,C")), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(RelevantSet::parse("E,I"), ConfigError);
    EXPECT_THROW(RelevantSet::parse(""), ConfigError);
}

TEST(Recall, MonotoneInK)
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> ids;
        std::map<ProductId, L> judged;
        std::uniform_int_distribution<int> lab(0, 3);
        for (int i = 0; i < 30; ++i) {
            ids.push_back("p" + std::to_string(i));
            if (i % 3 == 0) {
                judged[P("p" + std::to_string(i))] = static_cast<L>(lab(rng));
            }
        }
        std::shuffle(ids.begin(), ids.end(), rng);
        auto run = ranked("q", ids);
        double previous = 0.0;
        for (std::size_t k = 1; k <= 35; ++k) {
            auto r = recall_at_k(run, judged, k, {});
            if (!r) {
                break;
            }
            EXPECT_GE(*r, previous);
            previous = *r;
        }
    }
}

TEST(Evaluate, MeanOfTwoQueries)
{
    Qrels qrels{{Q("q1"), {{P("a"), L::exact}}}, {Q("q2"), {{P("b"), L::exact}}}};
    RunMap runs;
    runs.emplace(Q("q1"), ranked("q1", {"a"}));
    runs.emplace(Q("q2"), ranked("q2", {"x"}));
    auto report = evaluate(runs, qrels, 10);
    EXPECT_EQ(report.mean, 0.5);
    EXPECT_EQ(report.per_query.at(Q("q1")), 1.0);
    EXPECT_EQ(report.per_query.at(Q("q2")), 0.0);
}

TEST(Evaluate, MissingRunCountsAsZero)
{
    Qrels qrels{{Q("q1"), {{P("a"), L::exact}}}, {Q("q2"), {{P("b"), L::exact}}}};
    RunMap runs;
    runs.emplace(Q("q1"), ranked("q1", {"a"}));
    auto report = evaluate(runs, qrels, 10);
    EXPECT_EQ(report.per_query.at(Q("q2")), 0.0);
    EXPECT_EQ(report.mean, 0.5);
}

TEST(Evaluate, AllZeroRelevantIsEmpty)
{
    Qrels qrels{{Q("q1"), {{P("a"), L::irrelevant}}}, {Q("q2"), {}}};
    auto report = evaluate(RunMap{}, qrels, 10);
    EXPECT_TRUE(report.empty());
    EXPECT_FALSE(report.mean.has_value());
    EXPECT_EQ(report.excluded, 2u);

    auto zero = evaluate(RunMap{}, qrels, 10, {}, ZeroRelevantPolicy::as_zero);
    EXPECT_EQ(zero.mean, 0.0);
    EXPECT_EQ(zero.excluded, 2u);
}

TEST(Evaluate, RunsForUnjudgedQueriesIgnored)
{
    Qrels qrels{{Q("q1"), {{P("a"), L::exact}}}};
    RunMap runs;
    runs.emplace(Q("q1"), ranked("q1", {"a"}));
    runs.emplace(Q("zz"), ranked("zz", {"b"}));
    auto report = evaluate(runs, qrels, 10);
    EXPECT_EQ(report.per_query.size(), 1u);
    EXPECT_EQ(report.mean, 1.0);
}

TEST(Evaluate, PerQueryFile)
{
    Qrels qrels{{Q("q1"), {{P("a"), L::exact}, {P("b"), L::exact}}}};
    RunMap runs;
    runs.emplace(Q("q1"), ranked("q1", {"a"}));
    std::ostringstream out;
    write_per_query(evaluate(runs, qrels, 10), out);
    EXPECT_EQ(out.str(), "query_id\trecall\nq1\t0.500000\n");
}

TEST(Evaluate, RejectsZeroCutoff)
{
    EXPECT_THROW(evaluate(RunMap{}, Qrels{{Q("q"), {{P("a"), L::exact}}}}, 0), ConfigError);
}

// ---------------------------------------------------------------------------

namespace {

struct SweepFixture {
    RunMap runs;
    Qrels qrels;
    SimilarityGraph graph;
};

SweepFixture small_sweep()
{
    SweepFixture f;
    f.runs.emplace(Q("q1"), ranked("q1", {"a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9", "a10"}));
    f.runs.emplace(Q("q2"), ranked("q2", {"b1", "b2", "b3", "b4", "b5", "b6", "b7", "b8", "b9", "b10"}));
    f.runs.emplace(Q("q3"), ranked("q3", {"c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10"}));
    f.qrels[Q("q1")] = {{P("a1"), L::exact}, {P("h1"), L::exact}};
    f.qrels[Q("q2")] = {{P("b1"), L::exact}, {P("h2"), L::exact}, {P("h3"), L::exact}};
    f.qrels[Q("q3")] = {{P("c2"), L::exact}, {P("h4"), L::exact}};
    f.graph = SimilarityGraph::from_edges({{P("a1"), P("h1"), 3}, {P("b1"), P("h2"), 2}, {P("b1"), P("h3"), 1}});
    return f;
}

}  // namespace

TEST(Sweep, IdentityCellAtZeroT)
{
    auto f = small_sweep();
    SweepGrid grid{{0.0}, {0.3}, {10}};
    auto table = sweep(f.runs, f.graph, grid, f.qrels);
    ASSERT_EQ(table.rows.size(), 2u);
    auto const* cell = table.cell(0.0, 0.3, 10);
    ASSERT_NE(cell, nullptr);
    EXPECT_EQ(cell->improvement_pct, 0.0);
    EXPECT_EQ(cell->p_value, 1.0);
    EXPECT_EQ(cell->recall, table.baseline(10)->recall);
}

TEST(Sweep, BaselineEqualsRawEvaluationBitForBit)
{
    auto f = small_sweep();
    auto table = sweep(f.runs, f.graph, SweepGrid{{0.0, 0.1}, {0.1, 0.3}, {5, 10}}, f.qrels);
    for (std::size_t k : {5u, 10u}) {
        auto raw = evaluate(detail::truncate_runs(f.runs, k), f.qrels, k);
        EXPECT_EQ(table.baseline(k)->recall, raw.mean);
        EXPECT_EQ(table.cell(0.0, 0.1, k)->recall, raw.mean);
    }
}

TEST(Sweep, SingleCellEqualsDirectRerank)
{
    auto f = small_sweep();
    auto table = sweep(f.runs, f.graph, SweepGrid{{0.1}, {0.2}, {10}}, f.qrels);
    auto direct = evaluate(grit_batch(f.runs, f.graph, GritParams{0.1, 0.2}), f.qrels, 10);
    auto const* cell = table.cell(0.1, 0.2, 10);
    EXPECT_EQ(cell->recall, direct.mean);
    // q1: 0.5 -> 1.0, q2: 1/3 -> 1.0, q3 unchanged at 0.5.
    EXPECT_NEAR(*cell->recall, (1.0 + 1.0 + 0.5) / 3.0, 1e-15);
    EXPECT_NEAR(*table.baseline(10)->recall, (0.5 + 1.0 / 3.0 + 0.5) / 3.0, 1e-15);
}

TEST(Sweep, PerDepthVersusTruncation)
{
    auto f = small_sweep();
    SweepGrid grid{{0.1}, {0.2}, {5}};
    SweepOptions per_depth;
    SweepOptions truncate;
    truncate.per_depth = false;
    // Per depth the rerank replaces rank 5 of the depth-5 prefix; truncating a
    // depth-10 rerank never shows the inserted items at k = 5.
    auto a = sweep(f.runs, f.graph, grid, f.qrels, per_depth);
    auto b = sweep(f.runs, f.graph, grid, f.qrels, truncate);
    EXPECT_GT(*a.cell(0.1, 0.2, 5)->recall, *b.cell(0.1, 0.2, 5)->recall);
    EXPECT_EQ(b.cell(0.1, 0.2, 5)->recall, b.baseline(5)->recall);
}

TEST(Sweep, ThreadCountIndependent)
{
    auto f = small_sweep();
    SweepGrid grid;
    grid.k_values = {3, 5, 10};
    SweepOptions one;
    one.threads = 1;
    SweepOptions many;
    many.threads = 3;
    std::ostringstream a, b;
    write_csv(sweep(f.runs, f.graph, grid, f.qrels, one).rows, a);
    write_csv(sweep(f.runs, f.graph, grid, f.qrels, many).rows, b);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Sweep, FewerThanTwoQueriesLeavesPValueEmpty)
{
    auto f = small_sweep();
    Qrels one{{Q("q1"), f.qrels.at(Q("q1"))}};
    auto table = sweep(f.runs, f.graph, SweepGrid{{0.1}, {0.2}, {10}}, one);
    EXPECT_FALSE(table.cell(0.1, 0.2, 10)->p_value.has_value());
}

TEST(Sweep, RejectsEmptyGrid)
{
    auto f = small_sweep();
    EXPECT_THROW(sweep(f.runs, f.graph, SweepGrid{{}, {0.1}, {10}}, f.qrels), ConfigError);
}

TEST(Report, SignificanceColumn)
{
    std::vector<ReportRow> rows(2);
    rows[0] = {"m", 0.02, 0.3, 1000, 0.7, 1.0, 0.049, false};
    rows[1] = {"m", 0.02, 0.3, 1000, 0.7, 1.0, 0.05, false};
    std::ostringstream out;
    write_csv(rows, out);
    EXPECT_EQ(out.str(),
              "method,t,b,k,recall,improvement_pct,p_value,significant\n"
              "m,0.020,0.300,1000,0.700000,1.0000,0.049,true\n"
              "m,0.020,0.300,1000,0.700000,1.0000,0.05,false\n");
}

TEST(Report, EmptyTableIsHeaderOnly)
{
    std::ostringstream out;
    write_csv({}, out);
    EXPECT_EQ(out.str(), "method,t,b,k,recall,improvement_pct,p_value,significant\n");
}

TEST(Report, SingleCellTableOneDataRow)
{
    auto f = small_sweep();
    auto table = sweep(f.runs, f.graph, SweepGrid{{0.1}, {0.2}, {10}}, f.qrels);
    SweepTable cells_only = table;
    std::erase_if(cells_only.rows, [](auto const& r) { return r.baseline; });
    std::ostringstream out;
    write_csv(cells_only.rows, out);
    EXPECT_EQ(count_lines(out.str()), 2u);
}

TEST(Report, EmitWritesFiles)
{
    testutil::TempDir dir;
    auto f = small_sweep();
    auto table = sweep(f.runs, f.graph, SweepGrid{{0.0, 0.1}, {0.1, 0.2}, {5, 10}}, f.qrels);
    emit_report(table, ReportFormat::csv, dir / "out/report.csv");
    emit_report(table, ReportFormat::markdown, dir / "out/report.md", MarkdownOptions{0.1, {0.1, 0.2}, 10});
    EXPECT_EQ(count_lines(testutil::slurp(dir / "out/report.csv")), 1u + 2u + 8u);
    auto md = testutil::slurp(dir / "out/report.md");
    EXPECT_NE(md.find("| Method | b | R@5 | R@10 |"), std::string::npos);
    EXPECT_NE(md.find("| Improvement |"), std::string::npos);
}

TEST(Report, MarkdownMarksBestAndSignificance)
{
    SweepTable table;
    table.method = "BM25";
    table.grid = SweepGrid{{0.02}, {0.1, 0.2}, {10}};
    table.rows.push_back({"BM25", {}, {}, 10, 0.5, 0.0, {}, true});
    table.rows.push_back({"BM25", 0.02, 0.1, 10, 0.6, 20.0, 0.01, false});
    table.rows.push_back({"BM25", 0.02, 0.2, 10, 0.55, 10.0, 0.2, false});
    std::ostringstream out;
    write_sweep_markdown(table, out, MarkdownOptions{0.02, {0.1, 0.2}, 10});
    auto md = out.str();
    EXPECT_NE(md.find("| BM25 | -- | 0.500 |"), std::string::npos);
    EXPECT_NE(md.find("| BM25 with GRIT | 0.1 | **0.600**\xE2\x80\xA0 |"), std::string::npos);
    EXPECT_NE(md.find("|  | 0.2 | 0.550 |"), std::string::npos);
    EXPECT_NE(md.find("| Improvement | -- | 20.0% |"), std::string::npos);
}

TEST(Report, ImprovementPercent)
{
    EXPECT_NEAR(improvement_percent(0.5, 0.55), 10.0, 1e-9);
    EXPECT_EQ(improvement_percent(0.5, 0.5), 0.0);
    EXPECT_TRUE(std::isinf(improvement_percent(0.0, 0.1)));
}
