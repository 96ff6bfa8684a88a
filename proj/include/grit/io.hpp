#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "grit/detail/text.hpp"
#include "grit/error.hpp"
#include "grit/types.hpp"

namespace grit {

enum class CatalogFormat { tsv, jsonl };

/// Guesses the catalog format from the file extension (`.jsonl`/`.json` -> jsonl).
inline CatalogFormat catalog_format_for(std::filesystem::path const& path)
{
    auto ext = detail::to_lower_ascii(path.extension().string());
    return (ext == ".jsonl" || ext == ".json") ? CatalogFormat::jsonl : CatalogFormat::tsv;
}

namespace detail {

inline std::ifstream open_input(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string(), "cannot open for reading");
    }
    return in;
}

inline std::ofstream open_output(std::filesystem::path const& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path.string(), "cannot open for writing");
    }
    return out;
}

inline void finish_output(std::ofstream& out, std::filesystem::path const& path)
{
    out.flush();
    if (!out) {
        throw IoError(path.string(), "write failed");
    }
}

/// Column-name -> index map for a TSV header line.
class TsvHeader {
  public:
    TsvHeader() = default;
    explicit TsvHeader(std::string_view line)
    {
        auto cols = split(line, '\t');
        for (std::size_t i = 0; i < cols.size(); ++i) {
            m_index.emplace(std::string(trim(cols[i])), i);
        }
    }

    [[nodiscard]] std::optional<std::size_t> find(std::string const& name) const
    {
        auto it = m_index.find(name);
        if (it == m_index.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] std::size_t require(std::string const& name) const
    {
        auto idx = find(name);
        if (!idx) {
            throw FormatError(1, "missing " + name + " column in header");
        }
        return *idx;
    }

  private:
    std::unordered_map<std::string, std::size_t> m_index;
};

inline std::string_view cell(
    std::vector<std::string_view> const& cols, std::size_t idx, std::size_t line, std::string const& name)
{
    if (idx >= cols.size()) {
        throw FormatError(line, "missing " + name);
    }
    return cols[idx];
}

inline std::optional<std::string> optional_cell(
    std::vector<std::string_view> const& cols, std::optional<std::size_t> idx)
{
    if (!idx || *idx >= cols.size()) {
        return std::nullopt;
    }
    auto v = trim(cols[*idx]);
    if (v.empty()) {
        return std::nullopt;
    }
    return std::string(v);
}

template <typename Id>
Id make_id(std::string_view raw, std::size_t line, std::string const& what)
{
    try {
        return Id(std::string(trim(raw)));
    } catch (std::invalid_argument const& e) {
        throw FormatError(line, "invalid " + what + ": " + e.what());
    }
}

inline double parse_double(std::string_view token, std::size_t line)
{
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw FormatError(line, "invalid number '" + std::string(token) + "'");
    }
    return value;
}

inline std::size_t parse_positive(std::string_view token, std::size_t line)
{
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
        throw FormatError(line, "invalid rank '" + std::string(token) + "'");
    }
    return value;
}

inline std::size_t parse_positive_or_zero(std::string_view token, std::size_t line)
{
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw FormatError(line, "invalid count '" + std::string(token) + "'");
    }
    return value;
}

inline void insert_product(ProductCatalog& catalog, ProductDoc doc, std::size_t line)
{
    if (trim(doc.title).empty()) {
        throw FormatError(line, "empty product_title");
    }
    auto id = doc.id;
    if (!catalog.emplace(id, std::move(doc)).second) {
        throw DuplicateId(id.str(), line);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Product catalogs

inline ProductCatalog parse_products_tsv(std::istream& in)
{
    ProductCatalog catalog;
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(1, "missing header row");
    }
    detail::strip_cr(line);
    detail::TsvHeader header(line);
    auto id_col = header.require("product_id");
    auto title_col = header.require("product_title");
    auto desc_col = header.find("product_description");
    auto brand_col = header.find("product_brand");
    auto color_col = header.find("product_color");
    auto locale_col = header.find("product_locale");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cols = detail::split(line, '\t');
        ProductDoc doc;
        doc.id = detail::make_id<ProductId>(
            detail::cell(cols, id_col, lineno, "product_id"), lineno, "product_id");
        doc.title = std::string(detail::trim(detail::cell(cols, title_col, lineno, "product_title")));
        doc.description = detail::optional_cell(cols, desc_col);
        doc.brand = detail::optional_cell(cols, brand_col);
        doc.color = detail::optional_cell(cols, color_col);
        doc.locale = detail::optional_cell(cols, locale_col).value_or("");
        detail::insert_product(catalog, std::move(doc), lineno);
    }
    return catalog;
}

inline ProductCatalog parse_products_jsonl(std::istream& in)
{
    using nlohmann::json;
    auto text_field = [](json const& obj, char const* key) -> std::optional<std::string> {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            return std::nullopt;
        }
        if (!it->is_string()) {
            return it->dump();
        }
        auto v = detail::trim(it->get_ref<std::string const&>());
        if (v.empty()) {
            return std::nullopt;
        }
        return std::string(v);
    };

    ProductCatalog catalog;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) {
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (json::parse_error const& e) {
            throw FormatError(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) {
            throw FormatError(lineno, "expected a JSON object");
        }
        auto id = text_field(obj, "product_id");
        if (!id) {
            throw FormatError(lineno, "missing product_id");
        }
        auto title = text_field(obj, "product_title");
        if (!title) {
            throw FormatError(lineno, "missing product_title");
        }
        ProductDoc doc;
        doc.id = detail::make_id<ProductId>(*id, lineno, "product_id");
        doc.title = *title;
        doc.description = text_field(obj, "product_description");
        doc.brand = text_field(obj, "product_brand");
        doc.color = text_field(obj, "product_color");
        doc.locale = text_field(obj, "product_locale").value_or("");
        detail::insert_product(catalog, std::move(doc), lineno);
    }
    return catalog;
}

inline ProductCatalog parse_products(std::filesystem::path const& path, CatalogFormat format)
{
    auto in = detail::open_input(path);
    return format == CatalogFormat::tsv ? parse_products_tsv(in) : parse_products_jsonl(in);
}

inline ProductCatalog parse_products(std::filesystem::path const& path)
{
    return parse_products(path, catalog_format_for(path));
}

/// Canonical catalog TSV: all six columns, rows in ascending product id order.
inline void write_products_tsv(ProductCatalog const& catalog, std::ostream& out)
{
    out << "product_id\tproduct_title\tproduct_description\tproduct_brand\tproduct_color\tproduct_locale\n";
    for (auto const& [id, doc] : catalog) {
        out << id.str() << '\t' << detail::tsv_clean(doc.title) << '\t'
            << detail::tsv_clean(doc.description.value_or("")) << '\t'
            << detail::tsv_clean(doc.brand.value_or("")) << '\t'
            << detail::tsv_clean(doc.color.value_or("")) << '\t' << detail::tsv_clean(doc.locale)
            << '\n';
    }
}

inline void write_products_tsv(ProductCatalog const& catalog, std::filesystem::path const& path)
{
    auto out = detail::open_output(path);
    write_products_tsv(catalog, out);
    detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Judgments

struct JudgmentFilter {
    std::optional<Split> split;
    std::optional<std::string> locale;
    /// Extra `column == value` predicates, e.g. {"small_version", "1"}.
    std::vector<std::pair<std::string, std::string>> where;
};

inline JudgmentSet parse_judgments(std::istream& in, JudgmentFilter const& filter = {})
{
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(1, "missing header row");
    }
    detail::strip_cr(line);
    detail::TsvHeader header(line);
    auto qid_col = header.require("query_id");
    auto query_col = header.require("query");
    auto pid_col = header.require("product_id");
    auto label_col = header.require("esci_label");
    auto split_col = header.require("split");
    auto locale_col = header.require("product_locale");
    std::vector<std::pair<std::size_t, std::string>> where;
    for (auto const& [col, value] : filter.where) {
        where.emplace_back(header.require(col), value);
    }

    struct Key {
        QueryId q;
        ProductId p;
        Split s;
        auto operator<=>(Key const&) const = default;
    };
    std::map<Key, RelevanceLabel> rows;
    JudgmentSet set;

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cols = detail::split(line, '\t');
        auto field = [&](std::size_t idx, char const* name) {
            return detail::trim(detail::cell(cols, idx, lineno, name));
        };

        auto locale = std::string(field(locale_col, "product_locale"));
        if (filter.locale && locale != *filter.locale) {
            continue;
        }
        Split split{};
        try {
            split = parse_split(field(split_col, "split"));
        } catch (std::invalid_argument const& e) {
            throw FormatError(lineno, e.what());
        }
        if (filter.split && split != *filter.split) {
            continue;
        }
        bool keep = true;
        for (auto const& [idx, value] : where) {
            if (field(idx, "filter column") != value) {
                keep = false;
                break;
            }
        }
        if (!keep) {
            continue;
        }

        auto qid = detail::make_id<QueryId>(field(qid_col, "query_id"), lineno, "query_id");
        auto pid = detail::make_id<ProductId>(field(pid_col, "product_id"), lineno, "product_id");
        auto label = parse_label(field(label_col, "esci_label"));
        auto text = std::string(field(query_col, "query"));

        auto [it, inserted] = rows.emplace(Key{qid, pid, split}, label);
        if (!inserted && it->second != label) {
            throw ConflictingDuplicate(qid.str(), pid.str(), lineno);
        }
        set.queries.try_emplace(qid, Query{qid, std::move(text), std::move(locale)});
    }

    set.judgments.reserve(rows.size());
    for (auto& [key, label] : rows) {
        set.judgments.push_back({key.q, key.p, label, key.s});
    }
    return set;
}

inline JudgmentSet parse_judgments(std::filesystem::path const& path, JudgmentFilter const& filter = {})
{
    auto in = detail::open_input(path);
    return parse_judgments(in, filter);
}

/// Canonical judgments TSV: six columns, uppercase labels, rows sorted by (query, product, split).
inline void write_judgments(JudgmentSet const& set, std::ostream& out)
{
    out << "query_id\tquery\tproduct_id\tesci_label\tsplit\tproduct_locale\n";
    for (auto const& j : set.judgments) {
        auto it = set.queries.find(j.query_id);
        std::string text = it != set.queries.end() ? detail::tsv_clean(it->second.text) : "";
        std::string locale = it != set.queries.end() ? it->second.locale : "";
        out << j.query_id.str() << '\t' << text << '\t' << j.product_id.str() << '\t'
            << to_char(j.label) << '\t' << to_string(j.split) << '\t' << locale << '\n';
    }
}

inline void write_judgments(JudgmentSet const& set, std::filesystem::path const& path)
{
    auto out = detail::open_output(path);
    write_judgments(set, out);
    detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Query files: header `query_id<TAB>query[<TAB>query_locale]`

inline std::vector<Query> read_queries(std::istream& in)
{
    std::vector<Query> queries;
    std::string line;
    if (!std::getline(in, line)) {
        return queries;
    }
    detail::strip_cr(line);
    detail::TsvHeader header(line);
    auto id_col = header.require("query_id");
    auto text_col = header.require("query");
    auto locale_col = header.find("query_locale");
    std::map<QueryId, std::size_t> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cols = detail::split(line, '\t');
        auto id = detail::make_id<QueryId>(
            detail::cell(cols, id_col, lineno, "query_id"), lineno, "query_id");
        auto text = std::string(detail::trim(detail::cell(cols, text_col, lineno, "query")));
        if (text.empty()) {
            throw FormatError(lineno, "empty query text");
        }
        if (!seen.emplace(id, lineno).second) {
            throw FormatError(lineno, "duplicate query id '" + id.str() + "'");
        }
        queries.push_back({std::move(id), std::move(text), detail::optional_cell(cols, locale_col).value_or("")});
    }
    return queries;
}

inline std::vector<Query> read_queries(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    return read_queries(in);
}

inline void write_queries(std::vector<Query> queries, std::ostream& out)
{
    std::sort(queries.begin(), queries.end(), [](auto const& a, auto const& b) { return a.id < b.id; });
    out << "query_id\tquery\tquery_locale\n";
    for (auto const& q : queries) {
        out << q.id.str() << '\t' << detail::tsv_clean(q.text) << '\t' << q.locale << '\n';
    }
}

inline void write_queries(std::vector<Query> const& queries, std::filesystem::path const& path)
{
    auto out = detail::open_output(path);
    write_queries(queries, out);
    detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// TREC run files: `<query_id> Q0 <product_id> <rank> <score> <tag>`

/// Parses a run file. Lines may appear in any order. When `tag` is non-null it
/// receives the tag of the first record (left untouched for an empty file).
inline RunMap read_run_file(std::istream& in, std::string* tag = nullptr)
{
    struct Row {
        std::size_t rank;
        ProductId product;
        double score;
    };
    std::map<QueryId, std::vector<Row>> grouped;
    std::string line;
    std::size_t lineno = 0;
    bool tag_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto cols = detail::split_ws(line);
        if (cols.empty()) {
            continue;
        }
        if (cols.size() != 6) {
            throw FormatError(lineno, "expected 6 columns, found " + std::to_string(cols.size()));
        }
        auto qid = detail::make_id<QueryId>(cols[0], lineno, "query_id");
        auto pid = detail::make_id<ProductId>(cols[2], lineno, "product_id");
        auto rank = detail::parse_positive(cols[3], lineno);
        auto score = detail::parse_double(cols[4], lineno);
        if (tag != nullptr && !tag_set) {
            *tag = std::string(cols[5]);
            tag_set = true;
        }
        grouped[qid].push_back({rank, std::move(pid), score});
    }

    RunMap runs;
    for (auto& [qid, rows] : grouped) {
        std::sort(rows.begin(), rows.end(), [](auto const& a, auto const& b) { return a.rank < b.rank; });
        std::vector<RunEntry> entries;
        entries.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].rank != i + 1) {
                if (rows[i].rank == i) {
                    throw DataError("rank " + std::to_string(i) + " repeated for query '" + qid.str() + "'");
                }
                throw RankGap(qid.str());
            }
            entries.push_back({rows[i].rank, std::move(rows[i].product), rows[i].score});
        }
        runs.emplace(qid, RunList(qid, std::move(entries)));
    }
    return runs;
}

inline RunMap read_run_file(std::filesystem::path const& path, std::string* tag = nullptr)
{
    auto in = detail::open_input(path);
    return read_run_file(in, tag);
}

inline void write_run_file(RunMap const& runs, std::string_view tag, std::ostream& out)
{
    if (tag.empty() || detail::has_space(tag)) {
        throw ConfigError("run tag must be a non-empty whitespace-free token");
    }
    for (auto const& [qid, run] : runs) {
        for (auto const& e : run) {
            out << qid.str() << " Q0 " << e.product_id.str() << ' ' << e.rank << ' '
                << detail::format_fixed6(e.score) << ' ' << tag << '\n';
        }
    }
}

inline void write_run_file(RunMap const& runs, std::string_view tag, std::filesystem::path const& path)
{
    auto out = detail::open_output(path);
    write_run_file(runs, tag, out);
    detail::finish_output(out, path);
}

}  // namespace grit
