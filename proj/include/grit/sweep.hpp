#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "grit/detail/parallel.hpp"
#include "grit/error.hpp"
#include "grit/evaluation.hpp"
#include "grit/graph.hpp"
#include "grit/io.hpp"
#include "grit/rerank.hpp"
#include "grit/stats.hpp"
#include "grit/types.hpp"

namespace grit {

struct SweepGrid {
    std::vector<double> t_values{0.000, 0.005, 0.010, 0.015, 0.020, 0.025, 0.030, 0.035, 0.040};
    std::vector<double> b_values{0.1, 0.2, 0.3, 0.4};
    std::vector<std::size_t> k_values{500, 1000, 1500, 2000};

    void validate() const
    {
        if (t_values.empty() || b_values.empty() || k_values.empty()) {
            throw ConfigError("sweep grids must be non-empty");
        }
        for (double t : t_values) {
            GritParams{t, 0.0}.validate();
        }
        for (double b : b_values) {
            GritParams{0.0, b}.validate();
        }
        for (auto k : k_values) {
            if (k == 0) {
                throw ConfigError("recall cutoffs must be positive");
            }
        }
    }
};

/// One line of a recall report. Baseline rows carry no t/b.
struct ReportRow {
    std::string method;
    std::optional<double> t;
    std::optional<double> b;
    std::size_t k = 0;
    std::optional<double> recall;
    std::optional<double> improvement_pct;
    std::optional<double> p_value;
    bool baseline = false;

    [[nodiscard]] bool significant() const noexcept { return p_value && is_significant(*p_value); }
};

struct SweepTable {
    std::string method;
    SweepGrid grid;
    std::vector<ReportRow> rows;

    [[nodiscard]] ReportRow const* baseline(std::size_t k) const
    {
        for (auto const& r : rows) {
            if (r.baseline && r.k == k) {
                return &r;
            }
        }
        return nullptr;
    }

    [[nodiscard]] ReportRow const* cell(double t, double b, std::size_t k) const
    {
        for (auto const& r : rows) {
            if (!r.baseline && r.k == k && same(*r.t, t) && same(*r.b, b)) {
                return &r;
            }
        }
        return nullptr;
    }

    static bool same(double x, double y) noexcept { return std::abs(x - y) <= 1e-12; }
};

struct SweepOptions {
    std::string method = "run";
    RelevantSet relevant;
    ZeroRelevantPolicy zero_relevant = ZeroRelevantPolicy::exclude;
    NeighborWeighting weighting = NeighborWeighting::seeds;
    /// Apply the rerank to the depth-k prefix for each k (true) or once to
    /// the full run and truncate afterwards (false).
    bool per_depth = true;
    std::size_t threads = 0;
};

/// Relative change in percent; 0 for equal values, +/-inf over a zero baseline.
inline double improvement_percent(double baseline, double value) noexcept
{
    if (value == baseline) {
        return 0.0;
    }
    if (baseline == 0.0) {
        return value > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return (value - baseline) / baseline * 100.0;
}

namespace detail {

inline RunMap truncate_runs(RunMap const& runs, std::size_t depth)
{
    RunMap out;
    for (auto const& [qid, run] : runs) {
        out.emplace_hint(out.end(), qid, run.truncated(depth));
    }
    return out;
}

inline std::optional<double> p_value_against(EvalReport const& base, EvalReport const& other)
{
    if (base.per_query.size() < 2) {
        return std::nullopt;
    }
    return paired_t_test(base.per_query, other.per_query).p_value;
}

}  // namespace detail

/// Evaluates every (t, b, k) cell of `grid` against the unmodified runs.
/// Baseline rows come first (one per k), then cells ordered by t, b, k.
inline SweepTable sweep(
    RunMap const& initial,
    SimilarityGraph const& graph,
    SweepGrid const& grid,
    Qrels const& qrels,
    SweepOptions const& options = {})
{
    grid.validate();
    SweepTable table;
    table.method = options.method;
    table.grid = grid;

    auto const nk = grid.k_values.size();
    std::vector<RunMap> base_runs(nk);
    std::vector<EvalReport> base_reports(nk);
    for (std::size_t ki = 0; ki < nk; ++ki) {
        auto k = grid.k_values[ki];
        base_runs[ki] = detail::truncate_runs(initial, k);
        base_reports[ki] = evaluate(base_runs[ki], qrels, k, options.relevant, options.zero_relevant);
        ReportRow row;
        row.method = options.method;
        row.k = k;
        row.recall = base_reports[ki].mean;
        row.improvement_pct = 0.0;
        row.baseline = true;
        table.rows.push_back(row);
    }

    struct Job {
        double t;
        double b;
    };
    std::vector<Job> jobs;
    for (double t : grid.t_values) {
        for (double b : grid.b_values) {
            jobs.push_back({t, b});
        }
    }
    std::vector<std::vector<ReportRow>> results(jobs.size());
    detail::parallel_for(jobs.size(), options.threads, [&](std::size_t j, std::size_t) {
        GritParams params{jobs[j].t, jobs[j].b, options.weighting};
        std::optional<RunMap> deep;
        if (!options.per_depth) {
            deep = grit_batch(initial, graph, params);
        }
        for (std::size_t ki = 0; ki < nk; ++ki) {
            auto k = grid.k_values[ki];
            auto runs = options.per_depth ? grit_batch(base_runs[ki], graph, params) : detail::truncate_runs(*deep, k);
            auto report = evaluate(runs, qrels, k, options.relevant, options.zero_relevant);
            ReportRow row;
            row.method = options.method;
            row.t = jobs[j].t;
            row.b = jobs[j].b;
            row.k = k;
            row.recall = report.mean;
            if (report.mean && base_reports[ki].mean) {
                row.improvement_pct = improvement_percent(*base_reports[ki].mean, *report.mean);
            }
            row.p_value = detail::p_value_against(base_reports[ki], report);
            results[j].push_back(std::move(row));
        }
    });
    for (auto& rows : results) {
        for (auto& r : rows) {
            table.rows.push_back(std::move(r));
        }
    }
    return table;
}

inline SweepTable sweep(
    RunMap const& initial,
    SimilarityGraph const& graph,
    SweepGrid const& grid,
    JudgmentSet const& judgments,
    SweepOptions const& options = {})
{
    return sweep(initial, graph, grid, to_qrels(judgments), options);
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { csv, markdown };

namespace detail {

inline std::string fmt(char const* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

inline std::string opt_fmt(char const* pattern, std::optional<double> v)
{
    return v ? fmt(pattern, *v) : std::string();
}

}  // namespace detail

/// CSV columns: method, t, b, k, recall, improvement_pct, p_value, significant.
inline void write_csv(std::vector<ReportRow> const& rows, std::ostream& out)
{
    out << "method,t,b,k,recall,improvement_pct,p_value,significant\n";
    for (auto const& r : rows) {
        out << r.method << ',' << detail::opt_fmt("%.3f", r.t) << ',' << detail::opt_fmt("%.3f", r.b) << ','
            << r.k << ',' << detail::opt_fmt("%.6f", r.recall) << ',' << detail::opt_fmt("%.4f", r.improvement_pct)
            << ',' << detail::opt_fmt("%.6g", r.p_value) << ',' << (r.significant() ? "true" : "false") << '\n';
    }
}

struct MarkdownOptions {
    /// Seed fraction of the per-b table.
    double table_t = 0.02;
    /// b rows of the per-b table.
    std::vector<double> table_b{0.1, 0.2, 0.3};
    /// Cutoff of the recall-versus-t table.
    std::size_t figure_k = 1000;
};

namespace detail {

inline std::string md_value(std::optional<double> v, bool dagger, bool bold)
{
    if (!v) {
        return "n/a";
    }
    auto s = fmt("%.3f", *v);
    if (bold) {
        s = "**" + s + "**";
    }
    if (dagger) {
        s += "\xE2\x80\xA0";  // dagger
    }
    return s;
}

inline bool contains_value(std::vector<double> const& values, double x)
{
    return std::any_of(values.begin(), values.end(), [&](double v) { return SweepTable::same(v, x); });
}

}  // namespace detail

/// Two tables: recall at every k for the baseline and each b at a fixed t
/// (with a best-versus-baseline improvement row), then recall at one k for
/// every t (rows) and b (columns). `†` marks p < 0.05, bold marks the best
/// reranked value of a column.
inline void write_sweep_markdown(SweepTable const& table, std::ostream& out, MarkdownOptions const& options = {})
{
    auto const& grid = table.grid;
    double t = detail::contains_value(grid.t_values, options.table_t) ? options.table_t : grid.t_values.back();
    std::vector<double> bs;
    for (double b : options.table_b) {
        if (detail::contains_value(grid.b_values, b)) {
            bs.push_back(b);
        }
    }
    if (bs.empty()) {
        bs = grid.b_values;
    }

    out << "## Recall by cutoff (t = " << detail::fmt("%.3f", t) << ")\n\n";
    out << "| Method | b |";
    for (auto k : grid.k_values) {
        out << " R@" << k << " |";
    }
    out << "\n|---|---|";
    for (std::size_t i = 0; i < grid.k_values.size(); ++i) {
        out << "---|";
    }
    out << '\n';

    std::vector<std::optional<double>> best(grid.k_values.size());
    for (std::size_t ki = 0; ki < grid.k_values.size(); ++ki) {
        for (double b : bs) {
            auto const* c = table.cell(t, b, grid.k_values[ki]);
            if (c && c->recall && (!best[ki] || *c->recall > *best[ki])) {
                best[ki] = c->recall;
            }
        }
    }

    out << "| " << table.method << " | -- |";
    for (auto k : grid.k_values) {
        auto const* base = table.baseline(k);
        out << ' ' << detail::md_value(base ? base->recall : std::nullopt, false, false) << " |";
    }
    out << '\n';
    bool first = true;
    for (double b : bs) {
        out << "| " << (first ? table.method + " with GRIT" : std::string()) << " | " << detail::fmt("%.1f", b)
            << " |";
        for (std::size_t ki = 0; ki < grid.k_values.size(); ++ki) {
            auto const* c = table.cell(t, b, grid.k_values[ki]);
            bool bold = c && c->recall && best[ki] && *c->recall == *best[ki];
            out << ' ' << detail::md_value(c ? c->recall : std::nullopt, c && c->significant(), bold) << " |";
        }
        out << '\n';
        first = false;
    }
    out << "| Improvement | -- |";
    for (std::size_t ki = 0; ki < grid.k_values.size(); ++ki) {
        auto const* base = table.baseline(grid.k_values[ki]);
        if (base && base->recall && best[ki]) {
            out << ' ' << detail::fmt("%.1f", improvement_percent(*base->recall, *best[ki])) << "% |";
        } else {
            out << " n/a |";
        }
    }
    out << "\n\n";

    auto k = std::find(grid.k_values.begin(), grid.k_values.end(), options.figure_k) != grid.k_values.end()
        ? options.figure_k
        : grid.k_values.back();
    out << "## Recall@" << k << " by seed fraction t\n\n";
    out << "| t |";
    for (double b : grid.b_values) {
        out << " b=" << detail::fmt("%.1f", b) << " |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < grid.b_values.size(); ++i) {
        out << "---|";
    }
    out << '\n';
    for (double tv : grid.t_values) {
        out << "| " << detail::fmt("%.3f", tv) << " |";
        for (double b : grid.b_values) {
            auto const* c = table.cell(tv, b, k);
            out << ' ' << detail::md_value(c ? c->recall : std::nullopt, c && c->significant(), false) << " |";
        }
        out << '\n';
    }
}

/// Rows grouped by method, one column per cutoff; `†` marks p < 0.05 against
/// the first method, bold marks the best value of a column.
inline void write_comparison_markdown(std::vector<ReportRow> const& rows, std::ostream& out)
{
    std::vector<std::size_t> ks;
    std::vector<std::string> methods;
    for (auto const& r : rows) {
        if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) {
            ks.push_back(r.k);
        }
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
    }
    auto find = [&](std::string const& m, std::size_t k) -> ReportRow const* {
        for (auto const& r : rows) {
            if (r.method == m && r.k == k) {
                return &r;
            }
        }
        return nullptr;
    };
    out << "| Method |";
    for (auto k : ks) {
        out << " R@" << k << " |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        out << "---|";
    }
    out << '\n';
    for (auto const& m : methods) {
        out << "| " << m << " |";
        for (auto k : ks) {
            std::optional<double> best;
            for (auto const& other : methods) {
                auto const* r = find(other, k);
                if (r && r->recall && (!best || *r->recall > *best)) {
                    best = r->recall;
                }
            }
            auto const* r = find(m, k);
            bool bold = methods.size() > 1 && r && r->recall && best && *r->recall == *best;
            out << ' ' << detail::md_value(r ? r->recall : std::nullopt, r && r->significant(), bold) << " |";
        }
        out << '\n';
    }
}

inline void emit_report(
    SweepTable const& table, ReportFormat format, std::filesystem::path const& path, MarkdownOptions const& options = {})
{
    auto out = detail::open_output(path);
    if (format == ReportFormat::csv) {
        write_csv(table.rows, out);
    } else {
        write_sweep_markdown(table, out, options);
    }
    detail::finish_output(out, path);
}

}  // namespace grit
