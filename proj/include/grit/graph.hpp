#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "grit/detail/text.hpp"
#include "grit/error.hpp"
#include "grit/io.hpp"
#include "grit/types.hpp"

namespace grit {

/// Symmetric label-pair weights over {E, S, C}. Irrelevant products never
/// form pairs. Defaults: EE=3, ES=2, EC=1, SS=2, SC=1, CC=1.
class WeightMatrix {
  public:
    WeightMatrix() = default;

    /// nullopt when either label is Irrelevant.
    [[nodiscard]] std::optional<std::uint32_t> weight(RelevanceLabel a, RelevanceLabel b) const noexcept
    {
        auto i = slot(a);
        auto j = slot(b);
        if (!i || !j) {
            return std::nullopt;
        }
        return m_w[*i][*j];
    }

    void set(RelevanceLabel a, RelevanceLabel b, std::uint32_t w)
    {
        auto i = slot(a);
        auto j = slot(b);
        if (!i || !j) {
            throw ConfigError("weight matrix has no entry for label I");
        }
        if (w == 0) {
            throw ConfigError("weight matrix entries must be positive integers");
        }
        m_w[*i][*j] = w;
        m_w[*j][*i] = w;
    }

    /// Overrides from lines `<label><TAB or space><label><TAB or space><weight>`.
    /// Blank lines and `#` comments are skipped; unspecified pairs keep defaults.
    static WeightMatrix parse(std::istream& in)
    {
        WeightMatrix wm;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            auto cols = detail::split_ws(line);
            if (cols.empty()) {
                continue;
            }
            if (cols.size() != 3) {
                throw FormatError(lineno, "expected '<label> <label> <weight>'");
            }
            RelevanceLabel a{};
            RelevanceLabel b{};
            try {
                a = parse_label(cols[0]);
                b = parse_label(cols[1]);
            } catch (UnknownLabel const& e) {
                throw FormatError(lineno, e.what());
            }
            auto w = detail::parse_positive_or_zero(cols[2], lineno);
            if (w == 0 || w > std::numeric_limits<std::uint32_t>::max()) {
                throw FormatError(lineno, "weight must be a positive integer");
            }
            try {
                wm.set(a, b, static_cast<std::uint32_t>(w));
            } catch (ConfigError const& e) {
                throw FormatError(lineno, e.what());
            }
        }
        return wm;
    }

    static WeightMatrix load(std::filesystem::path const& path)
    {
        auto in = detail::open_input(path);
        return parse(in);
    }

    friend bool operator==(WeightMatrix const&, WeightMatrix const&) = default;

  private:
    static std::optional<std::size_t> slot(RelevanceLabel l) noexcept
    {
        switch (l) {
        case RelevanceLabel::exact: return 0;
        case RelevanceLabel::substitute: return 1;
        case RelevanceLabel::complement: return 2;
        case RelevanceLabel::irrelevant: return std::nullopt;
        }
        return std::nullopt;
    }

    std::array<std::array<std::uint32_t, 3>, 3> m_w{{{3, 2, 1}, {2, 2, 1}, {1, 1, 1}}};
};

struct Neighbor {
    ProductId id;
    std::uint32_t weight = 0;

    friend bool operator==(Neighbor const&, Neighbor const&) = default;
};

struct Edge {
    ProductId p;
    ProductId q;
    std::uint32_t weight = 0;

    friend bool operator==(Edge const&, Edge const&) = default;
};

/// Undirected weighted product graph in compressed adjacency form.
///
/// Node ordinals follow ascending ProductId order. Each adjacency list is
/// sorted by (weight desc, ProductId asc). Only products with at least one
/// edge are nodes.
class SimilarityGraph {
  public:
    using Node = std::uint32_t;

    struct Arc {
        Node target = 0;
        std::uint32_t weight = 0;

        friend bool operator==(Arc const&, Arc const&) = default;
    };

    SimilarityGraph() : m_offsets{0} {}

    /// Builds from explicit undirected edges. Endpoint order is irrelevant;
    /// self-loops, zero weights and repeated edges are rejected.
    static SimilarityGraph from_edges(std::vector<Edge> const& edges)
    {
        std::vector<ProductId> ids;
        ids.reserve(edges.size() * 2);
        for (auto const& e : edges) {
            ids.push_back(e.p);
            ids.push_back(e.q);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        auto ordinal = [&](ProductId const& id) {
            return static_cast<Node>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
        };
        std::vector<std::tuple<Node, Node, std::uint32_t>> pairs;
        pairs.reserve(edges.size());
        for (auto const& e : edges) {
            if (e.p == e.q) {
                throw DataError("self-loop on product '" + e.p.str() + "'");
            }
            if (e.weight == 0) {
                throw DataError("edge weight must be positive");
            }
            auto a = ordinal(e.p);
            auto b = ordinal(e.q);
            pairs.emplace_back(std::min(a, b), std::max(a, b), e.weight);
        }
        std::sort(pairs.begin(), pairs.end());
        for (std::size_t i = 1; i < pairs.size(); ++i) {
            if (std::get<0>(pairs[i]) == std::get<0>(pairs[i - 1])
                && std::get<1>(pairs[i]) == std::get<1>(pairs[i - 1])) {
                throw DataError(
                    "repeated edge between '" + ids[std::get<0>(pairs[i])].str() + "' and '"
                    + ids[std::get<1>(pairs[i])].str() + "'");
            }
        }
        return SimilarityGraph(std::move(ids), pairs);
    }

    /// `ids` must be sorted ascending and unique; `pairs` hold (u, v, w) with u < v, no repeats.
    SimilarityGraph(std::vector<ProductId> ids, std::vector<std::tuple<Node, Node, std::uint32_t>> const& pairs)
        : m_ids(std::move(ids))
    {
        std::vector<std::size_t> degree(m_ids.size(), 0);
        for (auto const& [u, v, w] : pairs) {
            ++degree[u];
            ++degree[v];
        }
        m_offsets.assign(m_ids.size() + 1, 0);
        for (std::size_t i = 0; i < m_ids.size(); ++i) {
            m_offsets[i + 1] = m_offsets[i] + degree[i];
        }
        m_arcs.resize(m_offsets.back());
        std::vector<std::size_t> fill(m_offsets.begin(), m_offsets.end() - 1);
        for (auto const& [u, v, w] : pairs) {
            m_arcs[fill[u]++] = {v, w};
            m_arcs[fill[v]++] = {u, w};
        }
        for (std::size_t i = 0; i < m_ids.size(); ++i) {
            std::sort(
                m_arcs.begin() + static_cast<std::ptrdiff_t>(m_offsets[i]),
                m_arcs.begin() + static_cast<std::ptrdiff_t>(m_offsets[i + 1]),
                [](Arc const& a, Arc const& b) {
                    if (a.weight != b.weight) {
                        return a.weight > b.weight;
                    }
                    return a.target < b.target;
                });
        }
        // Drop isolated ids so that node_count() counts only products with edges.
        if (std::any_of(degree.begin(), degree.end(), [](auto d) { return d == 0; })) {
            compact(degree);
        }
    }

    [[nodiscard]] std::size_t node_count() const noexcept { return m_ids.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return m_arcs.size() / 2; }
    [[nodiscard]] bool empty() const noexcept { return m_ids.empty(); }

    [[nodiscard]] std::optional<Node> find(ProductId const& id) const
    {
        auto it = std::lower_bound(m_ids.begin(), m_ids.end(), id);
        if (it == m_ids.end() || *it != id) {
            return std::nullopt;
        }
        return static_cast<Node>(it - m_ids.begin());
    }

    [[nodiscard]] ProductId const& id(Node node) const { return m_ids[node]; }
    [[nodiscard]] std::vector<ProductId> const& ids() const noexcept { return m_ids; }

    [[nodiscard]] std::span<Arc const> arcs(Node node) const
    {
        return std::span<Arc const>(m_arcs).subspan(m_offsets[node], m_offsets[node + 1] - m_offsets[node]);
    }

    /// Adjacency of `p` ordered by (weight desc, ProductId asc), at most `limit` entries.
    [[nodiscard]] std::vector<Neighbor> neighbors(ProductId const& p, std::optional<std::size_t> limit = {}) const
    {
        std::vector<Neighbor> out;
        auto node = find(p);
        if (!node) {
            return out;
        }
        auto list = arcs(*node);
        auto count = limit ? std::min(*limit, list.size()) : list.size();
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back({m_ids[list[i].target], list[i].weight});
        }
        return out;
    }

    /// Weight of edge {p, q}, 0 when absent.
    [[nodiscard]] std::uint32_t weight(ProductId const& p, ProductId const& q) const
    {
        auto u = find(p);
        auto v = find(q);
        if (!u || !v) {
            return 0;
        }
        for (auto const& a : arcs(*u)) {
            if (a.target == *v) {
                return a.weight;
            }
        }
        return 0;
    }

    /// Every undirected edge once, with p < q, sorted by (p, q).
    [[nodiscard]] std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        out.reserve(edge_count());
        std::vector<Arc> upper;
        for (Node u = 0; u < m_ids.size(); ++u) {
            upper.clear();
            for (auto const& a : arcs(u)) {
                if (a.target > u) {
                    upper.push_back(a);
                }
            }
            std::sort(upper.begin(), upper.end(), [](Arc const& a, Arc const& b) { return a.target < b.target; });
            for (auto const& a : upper) {
                out.push_back({m_ids[u], m_ids[a.target], a.weight});
            }
        }
        return out;
    }

    /// Copy keeping only edges with weight >= `min_weight`.
    [[nodiscard]] SimilarityGraph pruned(std::uint32_t min_weight) const
    {
        std::vector<std::tuple<Node, Node, std::uint32_t>> pairs;
        for (Node u = 0; u < m_ids.size(); ++u) {
            for (auto const& a : arcs(u)) {
                if (a.target > u && a.weight >= min_weight) {
                    pairs.emplace_back(u, a.target, a.weight);
                }
            }
        }
        return SimilarityGraph(m_ids, pairs);
    }

    /// Throws DataError on self-loops, zero weights, asymmetry or unsorted lists.
    void check_invariants() const
    {
        for (Node u = 0; u < m_ids.size(); ++u) {
            auto list = arcs(u);
            if (list.empty()) {
                throw DataError("isolated node '" + m_ids[u].str() + "'");
            }
            for (std::size_t i = 0; i < list.size(); ++i) {
                auto const& a = list[i];
                if (a.target == u) {
                    throw DataError("self-loop on '" + m_ids[u].str() + "'");
                }
                if (a.weight == 0) {
                    throw DataError("zero edge weight at '" + m_ids[u].str() + "'");
                }
                if (i > 0) {
                    auto const& prev = list[i - 1];
                    if (prev.weight < a.weight || (prev.weight == a.weight && prev.target >= a.target)) {
                        throw DataError("adjacency of '" + m_ids[u].str() + "' is not sorted");
                    }
                }
                auto back = arcs(a.target);
                auto it = std::find_if(back.begin(), back.end(), [&](Arc const& r) { return r.target == u; });
                if (it == back.end() || it->weight != a.weight) {
                    throw DataError("asymmetric edge at '" + m_ids[u].str() + "'");
                }
            }
        }
    }

    friend bool operator==(SimilarityGraph const&, SimilarityGraph const&) = default;

  private:
    void compact(std::vector<std::size_t> const& degree)
    {
        std::vector<Node> remap(m_ids.size(), 0);
        std::vector<ProductId> ids;
        Node next = 0;
        for (std::size_t i = 0; i < m_ids.size(); ++i) {
            remap[i] = next;
            if (degree[i] > 0) {
                ids.push_back(m_ids[i]);
                ++next;
            }
        }
        std::vector<std::size_t> offsets{0};
        for (std::size_t i = 0; i < m_ids.size(); ++i) {
            if (degree[i] > 0) {
                offsets.push_back(m_offsets[i + 1]);
            }
        }
        for (auto& a : m_arcs) {
            a.target = remap[a.target];
        }
        m_ids = std::move(ids);
        m_offsets = std::move(offsets);
    }

    std::vector<ProductId> m_ids;
    std::vector<std::size_t> m_offsets;
    std::vector<Arc> m_arcs;
};

/// Accumulates wm[l_p, l_q] over every unordered pair of non-Irrelevant
/// products judged for the same query. Only train-split judgments count.
/// Edges lighter than `min_weight` are dropped afterwards.
inline SimilarityGraph build_graph(JudgmentSet const& train, WeightMatrix const& wm = {}, std::uint32_t min_weight = 1)
{
    std::unordered_map<ProductId, std::uint32_t> interned;
    std::vector<ProductId> ids;
    auto intern = [&](ProductId const& id) {
        auto [it, inserted] = interned.try_emplace(id, static_cast<std::uint32_t>(ids.size()));
        if (inserted) {
            ids.push_back(id);
        }
        return it->second;
    };

    std::map<QueryId, std::vector<std::pair<std::uint32_t, RelevanceLabel>>> per_query;
    for (auto const& j : train.judgments) {
        if (j.split != Split::train || j.label == RelevanceLabel::irrelevant) {
            continue;
        }
        per_query[j.query_id].emplace_back(intern(j.product_id), j.label);
    }

    // (u << 32 | v, weight) for every pair occurrence, reduced after sorting.
    std::vector<std::pair<std::uint64_t, std::uint32_t>> occurrences;
    for (auto const& [qid, judged] : per_query) {
        for (std::size_t i = 0; i < judged.size(); ++i) {
            for (std::size_t k = i + 1; k < judged.size(); ++k) {
                auto a = judged[i].first;
                auto b = judged[k].first;
                if (a == b) {
                    continue;
                }
                auto w = wm.weight(judged[i].second, judged[k].second);
                auto lo = std::min(a, b);
                auto hi = std::max(a, b);
                occurrences.emplace_back((std::uint64_t{lo} << 32) | hi, *w);
            }
        }
    }
    std::sort(occurrences.begin(), occurrences.end(), [](auto const& x, auto const& y) { return x.first < y.first; });

    // Renumber nodes into ascending-id order.
    std::vector<std::uint32_t> order(ids.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
    std::vector<std::uint32_t> rank(ids.size());
    std::vector<ProductId> sorted_ids;
    sorted_ids.reserve(ids.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) {
        rank[order[r]] = r;
        sorted_ids.push_back(ids[order[r]]);
    }

    std::vector<std::tuple<SimilarityGraph::Node, SimilarityGraph::Node, std::uint32_t>> pairs;
    for (std::size_t i = 0; i < occurrences.size();) {
        auto key = occurrences[i].first;
        std::uint64_t total = 0;
        for (; i < occurrences.size() && occurrences[i].first == key; ++i) {
            total += occurrences[i].second;
        }
        if (total > std::numeric_limits<std::uint32_t>::max()) {
            throw DataError("edge weight overflow");
        }
        if (total < min_weight) {
            continue;
        }
        auto u = rank[static_cast<std::uint32_t>(key >> 32)];
        auto v = rank[static_cast<std::uint32_t>(key & 0xFFFFFFFFu)];
        pairs.emplace_back(std::min(u, v), std::max(u, v), static_cast<std::uint32_t>(total));
    }
    return SimilarityGraph(std::move(sorted_ids), pairs);
}

inline std::vector<Neighbor> neighbors(
    SimilarityGraph const& graph, ProductId const& p, std::optional<std::size_t> limit = {})
{
    return graph.neighbors(p, limit);
}

// ---------------------------------------------------------------------------
// Persistence: `p<TAB>q<TAB>w`, p < q, one line per edge, sorted by (p, q).

inline void save_graph(SimilarityGraph const& graph, std::ostream& out)
{
    for (auto const& e : graph.edges()) {
        out << e.p.str() << '\t' << e.q.str() << '\t' << e.weight << '\n';
    }
}

inline void save_graph(SimilarityGraph const& graph, std::filesystem::path const& path)
{
    auto out = detail::open_output(path);
    save_graph(graph, out);
    detail::finish_output(out, path);
}

inline SimilarityGraph load_graph(std::istream& in)
{
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cols = detail::split(line, '\t');
        if (cols.size() != 3) {
            throw FormatError(lineno, "expected 3 tab-separated columns, found " + std::to_string(cols.size()));
        }
        auto p = detail::make_id<ProductId>(cols[0], lineno, "product id");
        auto q = detail::make_id<ProductId>(cols[1], lineno, "product id");
        if (p == q) {
            throw FormatError(lineno, "self-loop");
        }
        auto w = detail::parse_positive_or_zero(detail::trim(cols[2]), lineno);
        if (w == 0 || w > std::numeric_limits<std::uint32_t>::max()) {
            throw FormatError(lineno, "weight must be a positive 32-bit integer");
        }
        edges.push_back({std::move(p), std::move(q), static_cast<std::uint32_t>(w)});
    }
    try {
        return SimilarityGraph::from_edges(edges);
    } catch (DataError const& e) {
        throw FormatError(lineno, e.what());
    }
}

inline SimilarityGraph load_graph(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    return load_graph(in);
}

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::map<std::uint32_t, std::size_t> weight_histogram;
    std::size_t max_degree = 0;

    friend bool operator==(GraphStats const&, GraphStats const&) = default;
};

inline GraphStats graph_stats(SimilarityGraph const& graph)
{
    GraphStats stats;
    stats.node_count = graph.node_count();
    stats.edge_count = graph.edge_count();
    for (SimilarityGraph::Node u = 0; u < graph.node_count(); ++u) {
        auto list = graph.arcs(u);
        stats.max_degree = std::max(stats.max_degree, list.size());
        for (auto const& a : list) {
            if (a.target > u) {
                ++stats.weight_histogram[a.weight];
            }
        }
    }
    return stats;
}

}  // namespace grit
