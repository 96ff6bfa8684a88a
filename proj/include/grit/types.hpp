#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "grit/detail/text.hpp"
#include "grit/error.hpp"

namespace grit {

/// Opaque whitespace-free identifier. `Tag` keeps product and query ids apart.
template <typename Tag>
class Identifier {
  public:
    Identifier() = default;

    explicit Identifier(std::string value) : m_value(std::move(value))
    {
        if (m_value.empty()) {
            throw std::invalid_argument("identifier must not be empty");
        }
        if (detail::has_space(m_value)) {
            throw std::invalid_argument("identifier '" + m_value + "' contains whitespace");
        }
    }

    [[nodiscard]] std::string const& str() const noexcept { return m_value; }

    friend bool operator==(Identifier const&, Identifier const&) = default;
    friend auto operator<=>(Identifier const&, Identifier const&) = default;

  private:
    std::string m_value;
};

using ProductId = Identifier<struct ProductTag>;
using QueryId = Identifier<struct QueryTag>;

}  // namespace grit

template <typename Tag>
struct std::hash<grit::Identifier<Tag>> {
    std::size_t operator()(grit::Identifier<Tag> const& id) const noexcept
    {
        return std::hash<std::string>{}(id.str());
    }
};

namespace grit {

enum class RelevanceLabel { exact, substitute, complement, irrelevant };

inline char to_char(RelevanceLabel label) noexcept
{
    switch (label) {
    case RelevanceLabel::exact: return 'E';
    case RelevanceLabel::substitute: return 'S';
    case RelevanceLabel::complement: return 'C';
    case RelevanceLabel::irrelevant: return 'I';
    }
    return '?';
}

/// Case-insensitive; accepts only the single letters E, S, C, I.
inline RelevanceLabel parse_label(std::string_view token)
{
    auto t = detail::trim(token);
    if (t.size() == 1) {
        switch (t.front()) {
        case 'E': case 'e': return RelevanceLabel::exact;
        case 'S': case 's': return RelevanceLabel::substitute;
        case 'C': case 'c': return RelevanceLabel::complement;
        case 'I': case 'i': return RelevanceLabel::irrelevant;
        default: break;
        }
    }
    throw UnknownLabel(std::string(token));
}

enum class Split { train, test };

inline std::string_view to_string(Split split) noexcept
{
    return split == Split::train ? "train" : "test";
}

inline Split parse_split(std::string_view token)
{
    auto t = detail::to_lower_ascii(detail::trim(token));
    if (t == "train") {
        return Split::train;
    }
    if (t == "test") {
        return Split::test;
    }
    throw std::invalid_argument("unknown split '" + std::string(token) + "'");
}

struct ProductDoc {
    ProductId id;
    std::string title;
    std::optional<std::string> description;
    std::optional<std::string> brand;
    std::optional<std::string> color;
    std::string locale;

    friend bool operator==(ProductDoc const&, ProductDoc const&) = default;
};

using ProductCatalog = std::map<ProductId, ProductDoc>;

struct Query {
    QueryId id;
    std::string text;
    std::string locale;

    friend bool operator==(Query const&, Query const&) = default;
};

struct Judgment {
    QueryId query_id;
    ProductId product_id;
    RelevanceLabel label = RelevanceLabel::irrelevant;
    Split split = Split::train;

    friend bool operator==(Judgment const&, Judgment const&) = default;
};

/// Judgments sorted by (query, product, split), plus the distinct queries they reference.
struct JudgmentSet {
    std::vector<Judgment> judgments;
    std::map<QueryId, Query> queries;

    [[nodiscard]] bool empty() const noexcept { return judgments.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return judgments.size(); }

    /// Copy containing only judgments of `split` and the queries they reference.
    [[nodiscard]] JudgmentSet only(Split split) const
    {
        JudgmentSet out;
        for (auto const& j : judgments) {
            if (j.split == split) {
                out.judgments.push_back(j);
                if (auto it = queries.find(j.query_id); it != queries.end()) {
                    out.queries.emplace(it->first, it->second);
                }
            }
        }
        return out;
    }

    friend bool operator==(JudgmentSet const&, JudgmentSet const&) = default;
};

/// query -> product -> label, as used for evaluation.
using Qrels = std::map<QueryId, std::map<ProductId, RelevanceLabel>>;

inline Qrels to_qrels(JudgmentSet const& set)
{
    Qrels qrels;
    for (auto const& j : set.judgments) {
        qrels[j.query_id].insert_or_assign(j.product_id, j.label);
    }
    for (auto const& [id, q] : set.queries) {
        qrels.try_emplace(id);
    }
    return qrels;
}

struct RunEntry {
    std::size_t rank = 0;
    ProductId product_id;
    double score = 0.0;

    friend bool operator==(RunEntry const&, RunEntry const&) = default;
};

/// Ranked result list for one query.
///
/// Invariants: ranks are exactly 1..size(), product ids are unique, scores are
/// finite and non-increasing with rank. Every constructor path validates them.
class RunList {
  public:
    RunList() = default;

    /// Takes entries already in rank order and checks every invariant.
    RunList(QueryId query_id, std::vector<RunEntry> entries)
        : m_query_id(std::move(query_id)), m_entries(std::move(entries))
    {
        validate();
    }

    /// Ranks an arbitrary scored candidate multiset by (score desc, ProductId asc).
    /// When a product occurs more than once its highest score is kept.
    static RunList from_scored(QueryId query_id, std::vector<std::pair<ProductId, double>> scored)
    {
        std::sort(scored.begin(), scored.end(), [](auto const& a, auto const& b) {
            if (a.first != b.first) {
                return a.first < b.first;
            }
            return a.second > b.second;
        });
        scored.erase(
            std::unique(
                scored.begin(),
                scored.end(),
                [](auto const& a, auto const& b) { return a.first == b.first; }),
            scored.end());
        std::sort(scored.begin(), scored.end(), [](auto const& a, auto const& b) {
            if (a.second != b.second) {
                return a.second > b.second;
            }
            return a.first < b.first;
        });
        std::vector<RunEntry> entries;
        entries.reserve(scored.size());
        for (auto& [id, score] : scored) {
            entries.push_back({entries.size() + 1, std::move(id), score});
        }
        return RunList(std::move(query_id), std::move(entries));
    }

    [[nodiscard]] QueryId const& query_id() const noexcept { return m_query_id; }
    [[nodiscard]] std::vector<RunEntry> const& entries() const noexcept { return m_entries; }
    [[nodiscard]] std::size_t size() const noexcept { return m_entries.size(); }
    [[nodiscard]] bool empty() const noexcept { return m_entries.empty(); }
    [[nodiscard]] RunEntry const& operator[](std::size_t i) const { return m_entries[i]; }
    [[nodiscard]] auto begin() const noexcept { return m_entries.begin(); }
    [[nodiscard]] auto end() const noexcept { return m_entries.end(); }

    /// First `depth` entries (all of them when the list is shorter).
    [[nodiscard]] RunList truncated(std::size_t depth) const
    {
        RunList out;
        out.m_query_id = m_query_id;
        out.m_entries.assign(
            m_entries.begin(), m_entries.begin() + static_cast<std::ptrdiff_t>(std::min(depth, size())));
        return out;
    }

    friend bool operator==(RunList const&, RunList const&) = default;

  private:
    void validate() const
    {
        std::unordered_map<ProductId, std::size_t> seen;
        seen.reserve(m_entries.size());
        for (std::size_t i = 0; i < m_entries.size(); ++i) {
            auto const& e = m_entries[i];
            if (e.rank != i + 1) {
                throw RankGap(m_query_id.str());
            }
            if (!seen.emplace(e.product_id, i).second) {
                throw DuplicateDoc(m_query_id.str(), e.product_id.str());
            }
            if (!std::isfinite(e.score)) {
                throw DataError(
                    "non-finite score for product '" + e.product_id.str() + "' in query '"
                    + m_query_id.str() + "'");
            }
            if (i > 0 && e.score > m_entries[i - 1].score) {
                throw DataError(
                    "scores increase with rank at rank " + std::to_string(e.rank) + " of query '"
                    + m_query_id.str() + "'");
            }
        }
    }

    QueryId m_query_id;
    std::vector<RunEntry> m_entries;
};

using RunMap = std::map<QueryId, RunList>;

}  // namespace grit
