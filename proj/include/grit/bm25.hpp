#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "grit/detail/parallel.hpp"
#include "grit/index.hpp"
#include "grit/tokenize.hpp"
#include "grit/types.hpp"

namespace grit {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const
    {
        if (!(k1 >= 0.0) || !std::isfinite(k1)) {
            throw ConfigError("bm25 k1 must be a finite non-negative number");
        }
        if (!(b >= 0.0 && b <= 1.0)) {
            throw ConfigError("bm25 b must lie in [0, 1]");
        }
    }
};

/// Positive idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
inline double bm25_idf(std::size_t doc_count, std::size_t df) noexcept
{
    auto n = static_cast<double>(doc_count);
    auto d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

/// Exhaustive BM25 scorer over an immutable index. Holds per-thread scratch
/// space, so use one instance per worker.
class Bm25Scorer {
  public:
    Bm25Scorer(InvertedIndex const& index, Bm25Params params) : m_index(&index), m_params(params)
    {
        m_params.validate();
        m_scores.assign(index.doc_count(), 0.0);
        m_mark.assign(index.doc_count(), false);
    }

    [[nodiscard]] RunList search(QueryId const& query_id, std::string const& text, std::size_t n)
    {
        auto terms = tokenize(text);
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

        auto const& lengths = m_index->doc_lengths();
        double const avg = m_index->avg_doc_length();
        double const k1 = m_params.k1;
        double const b = m_params.b;

        m_touched.clear();
        for (auto const& term : terms) {
            auto list = m_index->postings(term);
            if (list.empty()) {
                continue;
            }
            double const idf = bm25_idf(m_index->doc_count(), list.size());
            for (auto const& p : list) {
                double tf = p.tf;
                double norm = avg > 0.0 ? static_cast<double>(lengths[p.doc]) / avg : 0.0;
                double contribution = idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
                if (!m_mark[p.doc]) {
                    m_mark[p.doc] = true;
                    m_touched.push_back(p.doc);
                }
                m_scores[p.doc] += contribution;
            }
        }

        auto better = [this](std::uint32_t a, std::uint32_t c) {
            if (m_scores[a] != m_scores[c]) {
                return m_scores[a] > m_scores[c];
            }
            return a < c;
        };
        auto keep = std::min(n, m_touched.size());
        std::partial_sort(
            m_touched.begin(), m_touched.begin() + static_cast<std::ptrdiff_t>(keep), m_touched.end(), better);

        std::vector<RunEntry> entries;
        entries.reserve(keep);
        for (std::size_t i = 0; i < keep; ++i) {
            auto d = m_touched[i];
            entries.push_back({i + 1, m_index->doc_ids()[d], m_scores[d]});
        }
        for (auto d : m_touched) {
            m_scores[d] = 0.0;
            m_mark[d] = false;
        }
        return RunList(query_id, std::move(entries));
    }

    [[nodiscard]] RunList search(Query const& query, std::size_t n) { return search(query.id, query.text, n); }

  private:
    InvertedIndex const* m_index;
    Bm25Params m_params;
    std::vector<double> m_scores;
    std::vector<bool> m_mark;
    std::vector<std::uint32_t> m_touched;
};

/// Top-n documents by (score desc, ProductId asc); only documents matching at
/// least one query term are candidates.
inline RunList bm25_search(InvertedIndex const& index, Query const& query, std::size_t n, Bm25Params params = {})
{
    Bm25Scorer scorer(index, params);
    return scorer.search(query, n);
}

/// Runs every query, `threads` workers (0 = hardware concurrency). Output is
/// independent of the thread count.
inline RunMap bm25_batch(
    InvertedIndex const& index,
    std::vector<Query> const& queries,
    std::size_t n,
    Bm25Params params = {},
    std::size_t threads = 0)
{
    params.validate();
    threads = std::min(detail::resolve_threads(threads), std::max<std::size_t>(queries.size(), 1));
    std::vector<std::unique_ptr<Bm25Scorer>> scorers;
    for (std::size_t w = 0; w < threads; ++w) {
        scorers.push_back(std::make_unique<Bm25Scorer>(index, params));
    }
    std::vector<RunList> results(queries.size());
    detail::parallel_for(queries.size(), threads, [&](std::size_t i, std::size_t worker) {
        results[i] = scorers[worker]->search(queries[i], n);
    });
    RunMap runs;
    for (auto& run : results) {
        auto id = run.query_id();
        runs.insert_or_assign(std::move(id), std::move(run));
    }
    return runs;
}

}  // namespace grit
