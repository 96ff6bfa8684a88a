#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "grit/detail/parallel.hpp"
#include "grit/graph.hpp"
#include "grit/types.hpp"

namespace grit {

/// Which result products a candidate's weight is summed over.
enum class NeighborWeighting {
    seeds,        ///< edges to the seed products only (default)
    full_result,  ///< edges to every product of the initial list
};

inline NeighborWeighting parse_neighbor_weighting(std::string_view s)
{
    if (s == "seeds") {
        return NeighborWeighting::seeds;
    }
    if (s == "full") {
        return NeighborWeighting::full_result;
    }
    throw ConfigError("expected 'seeds' or 'full', got '" + std::string(s) + "'");
}

struct GritParams {
    double t = 0.02;  ///< seed fraction in [0, 1]
    double b = 0.3;   ///< replaced tail fraction in [0, 1)
    NeighborWeighting weighting = NeighborWeighting::seeds;

    void validate() const
    {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw ConfigError("t must lie in [0, 1]");
        }
        if (!(b >= 0.0 && b < 1.0)) {
            throw ConfigError("b must lie in [0, 1)");
        }
    }
};

/// Step between synthetic scores of inserted neighbors.
inline constexpr double inserted_score_step = 1e-6;

namespace detail {

/// Snaps products like 0.07 * 100 = 7.000000000000001 back to the integer
/// the decimal parameters denote before ceil/floor are applied.
inline double snap_to_integer(double x) noexcept
{
    double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) {
        return r;
    }
    return x;
}

}  // namespace detail

/// ceil(t * n) capped at n; 0 when t == 0.
inline std::size_t seed_count(double t, std::size_t n) noexcept
{
    if (t <= 0.0 || n == 0) {
        return 0;
    }
    auto c = static_cast<std::size_t>(std::ceil(detail::snap_to_integer(t * static_cast<double>(n))));
    return std::min(c, n);
}

/// floor(b * n).
inline std::size_t replace_count(double b, std::size_t n) noexcept
{
    if (b <= 0.0 || n == 0) {
        return 0;
    }
    auto c = static_cast<std::size_t>(std::floor(detail::snap_to_integer(b * static_cast<double>(n))));
    return std::min(c, n);
}

/// Replaces the bottom b-fraction of `initial` with graph neighbors of its
/// top t-fraction.
///
/// Candidates are neighbors of the seed products that do not already occur
/// anywhere in `initial`, ranked by summed edge weight (desc) then ProductId.
/// The top k = min(floor(b n), #candidates) of them take ranks n-k+1..n; the
/// prefix 1..n-k is untouched. Inserted entries continue the score of rank
/// n-k downwards in steps of 1e-6 (from 0.0 when nothing is retained), so the
/// list length never changes.
inline RunList grit_rerank(RunList const& initial, SimilarityGraph const& graph, GritParams const& params)
{
    params.validate();
    auto const n = initial.size();
    auto const seeds = seed_count(params.t, n);
    auto const replace = replace_count(params.b, n);
    if (seeds == 0 || replace == 0 || graph.empty()) {
        return initial;
    }

    using Node = SimilarityGraph::Node;
    std::vector<std::optional<Node>> nodes;
    nodes.reserve(n);
    std::unordered_set<Node> in_initial;
    for (auto const& e : initial) {
        auto node = graph.find(e.product_id);
        nodes.push_back(node);
        if (node) {
            in_initial.insert(*node);
        }
    }

    std::unordered_map<Node, std::uint64_t> weight;
    for (std::size_t i = 0; i < seeds; ++i) {
        if (!nodes[i]) {
            continue;
        }
        for (auto const& a : graph.arcs(*nodes[i])) {
            if (!in_initial.contains(a.target)) {
                weight[a.target] += a.weight;
            }
        }
    }
    if (weight.empty()) {
        return initial;
    }
    if (params.weighting == NeighborWeighting::full_result) {
        // Add edges from candidates to non-seed results.
        for (std::size_t i = seeds; i < n; ++i) {
            if (!nodes[i]) {
                continue;
            }
            for (auto const& a : graph.arcs(*nodes[i])) {
                if (auto it = weight.find(a.target); it != weight.end()) {
                    it->second += a.weight;
                }
            }
        }
    }

    std::vector<std::pair<Node, std::uint64_t>> ranked(weight.begin(), weight.end());
    auto const k = std::min(replace, ranked.size());
    // Node ordinals follow ProductId order, so ordinal breaks ties by id.
    std::partial_sort(
        ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(), [](auto const& x, auto const& y) {
            if (x.second != y.second) {
                return x.second > y.second;
            }
            return x.first < y.first;
        });

    auto const kept = n - k;
    std::vector<RunEntry> entries(initial.begin(), initial.begin() + static_cast<std::ptrdiff_t>(kept));
    double const base = kept > 0 ? initial[kept - 1].score : 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        entries.push_back(
            {kept + i, graph.id(ranked[i - 1].first), base - static_cast<double>(i) * inserted_score_step});
    }
    return RunList(initial.query_id(), std::move(entries));
}

/// Applies grit_rerank to every query independently.
inline RunMap grit_batch(RunMap const& runs, SimilarityGraph const& graph, GritParams const& params, std::size_t threads = 1)
{
    params.validate();
    std::vector<RunMap::const_iterator> items;
    items.reserve(runs.size());
    for (auto it = runs.begin(); it != runs.end(); ++it) {
        items.push_back(it);
    }
    std::vector<RunList> results(items.size());
    detail::parallel_for(items.size(), threads, [&](std::size_t i, std::size_t) {
        results[i] = grit_rerank(items[i]->second, graph, params);
    });
    RunMap out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out.emplace_hint(out.end(), items[i]->first, std::move(results[i]));
    }
    return out;
}

}  // namespace grit
