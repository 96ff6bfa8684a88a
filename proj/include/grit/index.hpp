#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grit/detail/text.hpp"
#include "grit/error.hpp"
#include "grit/io.hpp"
#include "grit/tokenize.hpp"
#include "grit/types.hpp"

namespace grit {

/// Catalog fields that contribute to a document's indexed text.
struct IndexFields {
    bool title = true;
    bool description = true;
    bool brand = true;
    bool color = true;

    /// Parses a comma-separated list such as "title,brand".
    static IndexFields parse(std::string_view list)
    {
        IndexFields f{false, false, false, false};
        for (auto part : detail::split(list, ',')) {
            auto name = detail::to_lower_ascii(detail::trim(part));
            if (name == "title") {
                f.title = true;
            } else if (name == "description") {
                f.description = true;
            } else if (name == "brand") {
                f.brand = true;
            } else if (name == "color") {
                f.color = true;
            } else if (!name.empty()) {
                throw ConfigError("unknown index field '" + name + "'");
            }
        }
        if (!(f.title || f.description || f.brand || f.color)) {
            throw ConfigError("at least one index field is required");
        }
        return f;
    }
};

/// Text indexed for `doc`: the selected fields joined by single spaces.
inline std::string document_text(ProductDoc const& doc, IndexFields const& fields)
{
    std::string text;
    auto add = [&](std::optional<std::string> const& v) {
        if (!v) {
            return;
        }
        if (!text.empty()) {
            text.push_back(' ');
        }
        text += *v;
    };
    if (fields.title) {
        add(doc.title);
    }
    if (fields.description) {
        add(doc.description);
    }
    if (fields.brand) {
        add(doc.brand);
    }
    if (fields.color) {
        add(doc.color);
    }
    return text;
}

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;

    friend bool operator==(Posting const&, Posting const&) = default;
};

/// Immutable term -> postings index. Document ordinals follow ascending
/// ProductId order, so ordinal order doubles as the id tie-break order.
class InvertedIndex {
  public:
    static constexpr std::string_view magic = "GRIT-INDEX";
    static constexpr int version = 1;

    InvertedIndex() = default;

    InvertedIndex(
        std::unordered_map<std::string, std::vector<Posting>> postings,
        std::vector<std::uint32_t> doc_lengths,
        std::vector<ProductId> doc_ids)
        : m_postings(std::move(postings)),
          m_doc_lengths(std::move(doc_lengths)),
          m_doc_ids(std::move(doc_ids))
    {
        m_avg_doc_length = mean_length();
        check_invariants();
    }

    [[nodiscard]] std::size_t doc_count() const noexcept { return m_doc_ids.size(); }
    [[nodiscard]] double avg_doc_length() const noexcept { return m_avg_doc_length; }
    [[nodiscard]] std::vector<std::uint32_t> const& doc_lengths() const noexcept { return m_doc_lengths; }
    [[nodiscard]] std::vector<ProductId> const& doc_ids() const noexcept { return m_doc_ids; }
    [[nodiscard]] std::size_t term_count() const noexcept { return m_postings.size(); }

    [[nodiscard]] std::span<Posting const> postings(std::string const& term) const
    {
        auto it = m_postings.find(term);
        if (it == m_postings.end()) {
            return {};
        }
        return it->second;
    }

    [[nodiscard]] std::unordered_map<std::string, std::vector<Posting>> const& all_postings() const noexcept
    {
        return m_postings;
    }

    /// Throws DataError when any structural invariant is broken.
    void check_invariants() const
    {
        if (m_doc_lengths.size() != m_doc_ids.size()) {
            throw DataError("index: doc_lengths and doc_ids differ in size");
        }
        for (std::size_t i = 1; i < m_doc_ids.size(); ++i) {
            if (!(m_doc_ids[i - 1] < m_doc_ids[i])) {
                throw DataError("index: document ids are not strictly ascending");
            }
        }
        if (m_avg_doc_length != mean_length()) {
            throw DataError("index: avg_doc_length does not match doc_lengths");
        }
        for (auto const& [term, list] : m_postings) {
            if (list.empty()) {
                throw DataError("index: empty postings list for '" + term + "'");
            }
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (list[i].doc >= doc_count()) {
                    throw DataError("index: ordinal out of range in '" + term + "'");
                }
                if (list[i].tf == 0) {
                    throw DataError("index: zero term frequency in '" + term + "'");
                }
                if (i > 0 && list[i].doc <= list[i - 1].doc) {
                    throw DataError("index: postings for '" + term + "' are not strictly ascending");
                }
            }
        }
    }

    void save(std::ostream& out) const
    {
        out << magic << ' ' << version << '\n';
        out << "docs " << doc_count() << '\n';
        for (std::size_t i = 0; i < doc_count(); ++i) {
            out << m_doc_ids[i].str() << '\t' << m_doc_lengths[i] << '\n';
        }
        std::vector<std::string const*> terms;
        terms.reserve(m_postings.size());
        for (auto const& [term, list] : m_postings) {
            terms.push_back(&term);
        }
        std::sort(terms.begin(), terms.end(), [](auto a, auto b) { return *a < *b; });
        out << "terms " << terms.size() << '\n';
        for (auto const* term : terms) {
            out << *term << '\t';
            bool first = true;
            for (auto const& p : m_postings.at(*term)) {
                if (!first) {
                    out << ' ';
                }
                out << p.doc << ':' << p.tf;
                first = false;
            }
            out << '\n';
        }
    }

    void save(std::filesystem::path const& path) const
    {
        auto out = detail::open_output(path);
        save(out);
        detail::finish_output(out, path);
    }

    static InvertedIndex load(std::istream& in)
    {
        std::string line;
        std::size_t lineno = 0;
        auto next = [&]() -> std::string& {
            if (!std::getline(in, line)) {
                throw FormatError(lineno + 1, "unexpected end of index file");
            }
            ++lineno;
            return line;
        };
        auto count_after = [&](std::string_view prefix) {
            auto& l = next();
            auto cols = detail::split_ws(l);
            if (cols.size() != 2 || cols[0] != prefix) {
                throw FormatError(lineno, "expected '" + std::string(prefix) + " <count>'");
            }
            return detail::parse_positive_or_zero(cols[1], lineno);
        };

        auto header = detail::split_ws(next());
        if (header.size() != 2 || header[0] != magic) {
            throw FormatError(1, "not a GRIT index file");
        }
        if (header[1] != std::to_string(version)) {
            throw FormatError(1, "unsupported index version " + std::string(header[1]));
        }

        auto docs = count_after("docs");
        std::vector<ProductId> ids;
        std::vector<std::uint32_t> lengths;
        ids.reserve(docs);
        lengths.reserve(docs);
        for (std::size_t i = 0; i < docs; ++i) {
            auto cols = detail::split(next(), '\t');
            if (cols.size() != 2) {
                throw FormatError(lineno, "expected '<product_id>\\t<length>'");
            }
            ids.push_back(detail::make_id<ProductId>(cols[0], lineno, "product_id"));
            lengths.push_back(static_cast<std::uint32_t>(detail::parse_positive_or_zero(cols[1], lineno)));
        }

        auto terms = count_after("terms");
        std::unordered_map<std::string, std::vector<Posting>> postings;
        postings.reserve(terms);
        for (std::size_t i = 0; i < terms; ++i) {
            auto& l = next();
            auto tab = l.find('\t');
            if (tab == std::string::npos || tab == 0) {
                throw FormatError(lineno, "expected '<term>\\t<postings>'");
            }
            std::vector<Posting> list;
            for (auto item : detail::split_ws(std::string_view(l).substr(tab + 1))) {
                auto colon = item.find(':');
                if (colon == std::string_view::npos) {
                    throw FormatError(lineno, "malformed posting '" + std::string(item) + "'");
                }
                list.push_back(
                    {static_cast<std::uint32_t>(detail::parse_positive_or_zero(item.substr(0, colon), lineno)),
                     static_cast<std::uint32_t>(detail::parse_positive_or_zero(item.substr(colon + 1), lineno))});
            }
            if (!postings.emplace(l.substr(0, tab), std::move(list)).second) {
                throw FormatError(lineno, "duplicate term");
            }
        }
        return InvertedIndex(std::move(postings), std::move(lengths), std::move(ids));
    }

    static InvertedIndex load(std::filesystem::path const& path)
    {
        auto in = detail::open_input(path);
        return load(in);
    }

    friend bool operator==(InvertedIndex const&, InvertedIndex const&) = default;

  private:
    [[nodiscard]] double mean_length() const noexcept
    {
        if (m_doc_lengths.empty()) {
            return 0.0;
        }
        std::uint64_t total = 0;
        for (auto len : m_doc_lengths) {
            total += len;
        }
        return static_cast<double>(total) / static_cast<double>(m_doc_lengths.size());
    }

    std::unordered_map<std::string, std::vector<Posting>> m_postings;
    std::vector<std::uint32_t> m_doc_lengths;
    std::vector<ProductId> m_doc_ids;
    double m_avg_doc_length = 0.0;
};

inline InvertedIndex build_index(ProductCatalog const& catalog, IndexFields const& fields = {})
{
    if (catalog.empty()) {
        throw EmptyCatalog();
    }
    std::unordered_map<std::string, std::vector<Posting>> postings;
    std::vector<std::uint32_t> lengths;
    std::vector<ProductId> ids;
    lengths.reserve(catalog.size());
    ids.reserve(catalog.size());

    std::map<std::string, std::uint32_t> counts;
    std::uint32_t ordinal = 0;
    for (auto const& [id, doc] : catalog) {
        auto tokens = tokenize(document_text(doc, fields));
        counts.clear();
        for (auto& t : tokens) {
            ++counts[std::move(t)];
        }
        for (auto const& [term, tf] : counts) {
            postings[term].push_back({ordinal, tf});
        }
        lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
        ids.push_back(id);
        ++ordinal;
    }
    return InvertedIndex(std::move(postings), std::move(lengths), std::move(ids));
}

}  // namespace grit
