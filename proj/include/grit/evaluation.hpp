#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "grit/detail/text.hpp"
#include "grit/error.hpp"
#include "grit/io.hpp"
#include "grit/types.hpp"

namespace grit {

/// Labels that count as relevant for recall. Never contains I.
class RelevantSet {
  public:
    RelevantSet() = default;  // {E}

    RelevantSet(bool exact, bool substitute, bool complement)
        : m_exact(exact), m_substitute(substitute), m_complement(complement)
    {
        if (!(exact || substitute || complement)) {
            throw ConfigError("relevant label set must not be empty");
        }
    }

    /// Parses "E", "E,S", "ESC", ... (case-insensitive).
    static RelevantSet parse(std::string_view text)
    {
        bool e = false;
        bool s = false;
        bool c = false;
        for (char ch : text) {
            switch (ch) {
            case 'E': case 'e': e = true; break;
            case 'S': case 's': s = true; break;
            case 'C': case 'c': c = true; break;
            case ',': case ' ': break;
            case 'I': case 'i': throw ConfigError("label I cannot count as relevant");
            default: throw ConfigError("unknown label '" + std::string(1, ch) + "' in relevant set");
            }
        }
        return RelevantSet(e, s, c);
    }

    [[nodiscard]] bool contains(RelevanceLabel label) const noexcept
    {
        switch (label) {
        case RelevanceLabel::exact: return m_exact;
        case RelevanceLabel::substitute: return m_substitute;
        case RelevanceLabel::complement: return m_complement;
        case RelevanceLabel::irrelevant: return false;
        }
        return false;
    }

    [[nodiscard]] std::string str() const
    {
        std::string out;
        for (auto [on, name] : {std::pair{m_exact, "E"}, std::pair{m_substitute, "S"}, std::pair{m_complement, "C"}}) {
            if (on) {
                if (!out.empty()) {
                    out += ',';
                }
                out += name;
            }
        }
        return out;
    }

    friend bool operator==(RelevantSet const&, RelevantSet const&) = default;

  private:
    bool m_exact = true;
    bool m_substitute = false;
    bool m_complement = false;
};

/// How queries without any relevant product enter the mean.
enum class ZeroRelevantPolicy {
    exclude,  ///< left out of per-query values and the mean (default)
    as_zero,  ///< scored 0.0
};

/// |relevant in top-k| / |relevant|; nullopt when the query has no relevant product.
inline std::optional<double> recall_at_k(
    RunList const& run, std::map<ProductId, RelevanceLabel> const& judged, std::size_t k, RelevantSet const& relevant)
{
    if (k == 0) {
        throw ConfigError("recall cutoff k must be positive");
    }
    std::size_t total = 0;
    for (auto const& [pid, label] : judged) {
        if (relevant.contains(label)) {
            ++total;
        }
    }
    if (total == 0) {
        return std::nullopt;
    }
    std::size_t found = 0;
    auto depth = std::min(k, run.size());
    for (std::size_t i = 0; i < depth; ++i) {
        auto it = judged.find(run[i].product_id);
        if (it != judged.end() && relevant.contains(it->second)) {
            ++found;
        }
    }
    return static_cast<double>(found) / static_cast<double>(total);
}

struct EvalReport {
    std::size_t k = 0;
    std::map<QueryId, double> per_query;
    /// nullopt when no query was evaluated.
    std::optional<double> mean;
    /// Judged queries without any relevant product.
    std::size_t excluded = 0;

    [[nodiscard]] bool empty() const noexcept { return !mean.has_value(); }
};

/// Recall@k for every judged query. Queries with relevant products but no
/// run score 0; queries without relevant products are handled per `policy`.
inline EvalReport evaluate(
    RunMap const& runs,
    Qrels const& qrels,
    std::size_t k,
    RelevantSet const& relevant = {},
    ZeroRelevantPolicy policy = ZeroRelevantPolicy::exclude)
{
    EvalReport report;
    report.k = k;
    static RunList const no_run;
    for (auto const& [qid, judged] : qrels) {
        auto it = runs.find(qid);
        auto const& run = it != runs.end() ? it->second : no_run;
        auto recall = recall_at_k(run, judged, k, relevant);
        if (!recall) {
            ++report.excluded;
            if (policy == ZeroRelevantPolicy::as_zero) {
                report.per_query.emplace(qid, 0.0);
            }
            continue;
        }
        report.per_query.emplace(qid, *recall);
    }
    if (!report.per_query.empty()) {
        double sum = 0.0;
        for (auto const& [qid, value] : report.per_query) {
            sum += value;
        }
        report.mean = sum / static_cast<double>(report.per_query.size());
    }
    return report;
}

inline EvalReport evaluate(
    RunMap const& runs,
    JudgmentSet const& judgments,
    std::size_t k,
    RelevantSet const& relevant = {},
    ZeroRelevantPolicy policy = ZeroRelevantPolicy::exclude)
{
    return evaluate(runs, to_qrels(judgments), k, relevant, policy);
}

/// `query_id<TAB>recall` rows in ascending query order.
inline void write_per_query(EvalReport const& report, std::ostream& out)
{
    out << "query_id\trecall\n";
    for (auto const& [qid, value] : report.per_query) {
        out << qid.str() << '\t' << detail::format_fixed6(value) << '\n';
    }
}

inline void write_per_query(EvalReport const& report, std::filesystem::path const& path)
{
    auto out = detail::open_output(path);
    write_per_query(report, out);
    detail::finish_output(out, path);
}

}  // namespace grit
