#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grit/detail/text.hpp"
#include "grit/error.hpp"
#include "grit/io.hpp"
#include "grit/types.hpp"

namespace grit {

/// Anything that turns a prompt into a completion.
class TextGenBackend {
  public:
    virtual ~TextGenBackend() = default;

    /// Throws BackendError on transport or wire-format failures.
    virtual std::string complete(std::string const& prompt) = 0;
};

/// Prompt templates. Placeholders: `{query}` in the generation prompt,
/// `{original}` and `{generated}` in the validation prompt.
struct PromptTemplates {
    // Default wording is a reconstruction; tune it through a prompt file.
    std::string generation =
        "Rewrite the e-commerce search query below as a task-oriented query: one sentence that "
        "states what the shopper wants to get done, opening with an action verb such as Find, "
        "Locate or Add. Keep every requirement of the original query and add none. Reply with "
        "the rewritten query only.\n\nSearch query: {query}";
    std::string validation =
        "Do these two e-commerce search queries express the same user requirements? Reply with "
        "yes or no.\n\nQuery A: {original}\nQuery B: {generated}";

    /// Reads `{"generation": "...", "validation": "..."}`; absent keys keep defaults.
    static PromptTemplates load(std::filesystem::path const& path)
    {
        auto in = detail::open_input(path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (nlohmann::json::exception const& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        PromptTemplates p;
        if (j.contains("generation")) {
            p.generation = j.at("generation").get<std::string>();
        }
        if (j.contains("validation")) {
            p.validation = j.at("validation").get<std::string>();
        }
        return p;
    }
};

namespace detail {

/// Replaces every `{name}` with its value; unknown placeholders stay verbatim.
inline std::string render(std::string_view tmpl, std::map<std::string, std::string> const& values)
{
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

/// Inverse of render for templates whose placeholders are separated by
/// literal text: recovers placeholder values, or nullopt on mismatch.
inline std::optional<std::map<std::string, std::string>> match_template(std::string_view tmpl, std::string_view text)
{
    std::vector<std::string> literals{""};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                names.emplace_back(tmpl.substr(i + 1, close - i - 1));
                literals.emplace_back();
                i = close + 1;
                continue;
            }
        }
        literals.back().push_back(tmpl[i++]);
    }
    if (text.substr(0, literals.front().size()) != literals.front()) {
        return std::nullopt;
    }
    std::size_t pos = literals.front().size();
    std::map<std::string, std::string> values;
    for (std::size_t n = 0; n < names.size(); ++n) {
        auto const& lit = literals[n + 1];
        std::size_t end = 0;
        if (n + 1 == names.size()) {
            if (text.size() < pos + lit.size() || text.substr(text.size() - lit.size()) != lit) {
                return std::nullopt;
            }
            end = text.size() - lit.size();
        } else {
            end = text.find(lit, pos);
            if (lit.empty() || end == std::string_view::npos) {
                return std::nullopt;
            }
        }
        values[names[n]] = std::string(text.substr(pos, end - pos));
        pos = end + lit.size();
    }
    if (names.empty() && text != literals.front()) {
        return std::nullopt;
    }
    return values;
}

/// One-line, unquoted form of a generated query.
inline std::string clean_generation(std::string_view response)
{
    auto s = std::string(trim(response));
    for (auto& c : s) {
        if (c == '\n' || c == '\r' || c == '\t') {
            c = ' ';
        }
    }
    std::string collapsed;
    for (char c : s) {
        if (c == ' ' && !collapsed.empty() && collapsed.back() == ' ') {
            continue;
        }
        collapsed.push_back(c);
    }
    if (collapsed.size() >= 2 && (collapsed.front() == '"' || collapsed.front() == '\'')
        && collapsed.back() == collapsed.front()) {
        collapsed = collapsed.substr(1, collapsed.size() - 2);
    }
    return std::string(trim(collapsed));
}

}  // namespace detail

/// Deterministic offline backend: a pure function of the prompt.
///
/// Generation prompts (recognised by matching the generation template) are
/// answered from `exemplars` when the query is listed there, otherwise by
/// filling `response_template`. Validation prompts are answered with
/// `verdict`. Anything else is a BackendError.
class MockBackend : public TextGenBackend {
  public:
    struct Options {
        std::string response_template = "Find {query} for purchase";
        std::string verdict = "yes";
        std::map<std::string, std::string> exemplars;
    };

    explicit MockBackend(PromptTemplates prompts = {}) : MockBackend(std::move(prompts), Options{}) {}

    MockBackend(PromptTemplates prompts, Options options)
        : m_prompts(std::move(prompts)), m_options(std::move(options))
    {}

    std::string complete(std::string const& prompt) override
    {
        if (auto v = detail::match_template(m_prompts.validation, prompt)) {
            return m_options.verdict;
        }
        if (auto g = detail::match_template(m_prompts.generation, prompt)) {
            auto const& query = (*g)["query"];
            if (auto it = m_options.exemplars.find(query); it != m_options.exemplars.end()) {
                return it->second;
            }
            return detail::render(m_options.response_template, {{"query", query}});
        }
        throw BackendError("mock backend does not recognise the prompt");
    }

  private:
    PromptTemplates m_prompts;
    Options m_options;
};

/// Adapts any callable; handy for scripted backends in tests.
class FunctionBackend : public TextGenBackend {
  public:
    explicit FunctionBackend(std::function<std::string(std::string const&)> fn) : m_fn(std::move(fn)) {}
    std::string complete(std::string const& prompt) override { return m_fn(prompt); }

  private:
    std::function<std::string(std::string const&)> m_fn;
};

/// True for a first word "yes", false for "no" (case-insensitive);
/// UnparsableVerdict otherwise.
inline bool parse_verdict(std::string_view response)
{
    auto s = detail::trim(response);
    std::string word;
    for (char c : s) {
        if (!std::isalpha(static_cast<unsigned char>(c))) {
            break;
        }
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (word == "yes") {
        return true;
    }
    if (word == "no") {
        return false;
    }
    throw UnparsableVerdict(std::string(response));
}

inline bool validate_equivalence(
    std::string const& original, std::string const& generated, TextGenBackend& backend, PromptTemplates const& prompts = {})
{
    if (detail::trim(original).empty() || detail::trim(generated).empty()) {
        throw std::invalid_argument("validate_equivalence needs two non-empty queries");
    }
    auto prompt = detail::render(prompts.validation, {{"original", original}, {"generated", generated}});
    return parse_verdict(backend.complete(prompt));
}

struct GenerationRecord {
    QueryId query_id;
    std::string original;
    std::string generated;
    std::size_t attempts = 0;
    bool validated = false;

    friend bool operator==(GenerationRecord const&, GenerationRecord const&) = default;
};

/// Generate-then-validate loop, at most `max_retries` attempts. An empty or
/// unparsable answer counts as a failed attempt; after the last failure the
/// final candidate is returned with validated = false. Backend failures
/// propagate as BackendError carrying the attempt number.
inline GenerationRecord generate_task_query(
    Query const& query, TextGenBackend& backend, std::size_t max_retries = 5, PromptTemplates const& prompts = {})
{
    if (max_retries == 0) {
        throw ConfigError("max_retries must be at least 1");
    }
    GenerationRecord record{query.id, query.text, {}, 0, false};
    for (std::size_t attempt = 1; attempt <= max_retries; ++attempt) {
        record.attempts = attempt;
        try {
            auto candidate = detail::clean_generation(
                backend.complete(detail::render(prompts.generation, {{"query", query.text}})));
            if (candidate.empty()) {
                continue;
            }
            record.generated = std::move(candidate);
            if (validate_equivalence(query.text, record.generated, backend, prompts)) {
                record.validated = true;
                return record;
            }
        } catch (UnparsableVerdict const&) {
            continue;
        } catch (BackendError const& e) {
            throw BackendError(e.what(), attempt);
        }
    }
    return record;
}

struct BenchmarkOptions {
    std::size_t max_retries = 5;
    PromptTemplates prompts;
    /// Continue from `<output>.partial` instead of starting over.
    bool resume = false;
};

inline std::filesystem::path checkpoint_path(std::filesystem::path const& output)
{
    auto p = output;
    p += ".partial";
    return p;
}

namespace detail {

inline void write_generation_row(std::ostream& out, GenerationRecord const& r)
{
    out << r.query_id.str() << '\t' << tsv_clean(r.original) << '\t' << tsv_clean(r.generated) << '\t'
        << (r.validated ? "true" : "false") << '\n';
}

inline constexpr char const* generation_header = "query_id\toriginal_query\ttask_oriented_query\tvalidated\n";

}  // namespace detail

/// Reads a benchmark (or checkpoint) TSV. `attempts` is not persisted and reads back as 0.
inline std::vector<GenerationRecord> read_generation_file(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    std::vector<GenerationRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (lineno == 1 || detail::trim(line).empty()) {
            continue;
        }
        auto cols = detail::split(line, '\t');
        if (cols.size() != 4) {
            throw FormatError(lineno, "expected 4 columns");
        }
        if (cols[3] != "true" && cols[3] != "false") {
            throw FormatError(lineno, "validated must be true or false");
        }
        records.push_back(
            {detail::make_id<QueryId>(cols[0], lineno, "query_id"), std::string(cols[1]), std::string(cols[2]), 0,
             cols[3] == "true"});
    }
    return records;
}

/// Generates one record per query in ascending QueryId order and writes
/// `query_id, original_query, task_oriented_query, validated` to `output`.
///
/// Rows are appended to `<output>.partial` as they complete. A BackendError
/// leaves that checkpoint in place and propagates; rerunning with
/// `resume = true` skips the queries already recorded there.
inline std::vector<GenerationRecord> generate_benchmark(
    std::vector<Query> queries, TextGenBackend& backend, std::filesystem::path const& output, BenchmarkOptions const& options = {})
{
    std::sort(queries.begin(), queries.end(), [](auto const& a, auto const& b) { return a.id < b.id; });
    auto const partial = checkpoint_path(output);

    std::vector<GenerationRecord> records;
    std::set<QueryId> done;
    if (options.resume && std::filesystem::exists(partial)) {
        records = read_generation_file(partial);
        for (auto const& r : records) {
            done.insert(r.query_id);
        }
    }

    {
        auto out = detail::open_output(partial);
        out << detail::generation_header;
        for (auto const& r : records) {
            detail::write_generation_row(out, r);
        }
        out.flush();
        for (auto const& q : queries) {
            if (done.contains(q.id)) {
                continue;
            }
            auto record = generate_task_query(q, backend, options.max_retries, options.prompts);
            detail::write_generation_row(out, record);
            out.flush();
            done.insert(q.id);
            records.push_back(std::move(record));
        }
        detail::finish_output(out, partial);
    }

    std::sort(records.begin(), records.end(), [](auto const& a, auto const& b) { return a.query_id < b.query_id; });
    {
        auto out = detail::open_output(output);
        out << detail::generation_header;
        for (auto const& r : records) {
            detail::write_generation_row(out, r);
        }
        detail::finish_output(out, output);
    }
    std::filesystem::remove(partial);
    return records;
}

/// Evenly spaced sample of `size` records for manual review, with empty
/// `same_requirements` and `task_oriented` columns to fill in.
inline void write_review_sheet(
    std::vector<GenerationRecord> const& records, std::size_t size, std::filesystem::path const& path)
{
    auto out = detail::open_output(path);
    out << "query_id\toriginal_query\ttask_oriented_query\tsame_requirements\ttask_oriented\n";
    auto n = records.size();
    auto take = std::min(size, n);
    for (std::size_t i = 0; i < take; ++i) {
        auto const& r = records[i * n / take];
        out << r.query_id.str() << '\t' << detail::tsv_clean(r.original) << '\t' << detail::tsv_clean(r.generated)
            << "\t\t\n";
    }
    detail::finish_output(out, path);
}

}  // namespace grit
