#pragma once

#include <algorithm>
#include <functional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rcpsp/error.hpp"
#include "rcpsp/project_model.hpp"
#include "rcpsp/schedule.hpp"

// Permutation operators on activity lists. All positions are 0-based.

namespace rcpsp {

namespace detail {

inline void require_same_permutation(std::span<const int> a, std::span<const int> b, const char* op) {
    if (a.size() != b.size()) throw ConfigError(std::string(op) + ": parents differ in length");
    std::vector<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (std::adjacent_find(sa.begin(), sa.end()) != sa.end())
        throw ConfigError(std::string(op) + ": parent contains a duplicate gene");
    if (sa != sb) throw ConfigError(std::string(op) + ": parents are not permutations of the same genes");
}

} // namespace detail

/// PMX with its intermediate bookkeeping exposed.
struct PmxResult {
    ActivityList offspring1;
    ActivityList offspring2;
    /// genes appearing twice in each proto-offspring (in order of first appearance outside the segment)
    std::vector<int> duplicates1;
    std::vector<int> duplicates2;
    /// positionwise segment pairs (gene of parent 2, gene of parent 1) that differ
    std::vector<std::pair<int, int>> mapping;
};

/// Partially mapped crossover. The exchanged segment is [cut1, cut2).
inline PmxResult pmx_detailed(std::span<const int> p1, std::span<const int> p2, std::size_t cut1, std::size_t cut2) {
    detail::require_same_permutation(p1, p2, "pmx");
    if (!(cut1 < cut2 && cut2 <= p1.size())) throw ConfigError("pmx: cuts must satisfy 0 <= cut1 < cut2 <= length");

    PmxResult r;
    std::unordered_map<int, int> to_p1, to_p2; // segment gene of p2 -> p1, and back
    for (std::size_t k = cut1; k < cut2; ++k) {
        to_p1[p2[k]] = p1[k];
        to_p2[p1[k]] = p2[k];
        if (p1[k] != p2[k]) r.mapping.emplace_back(p2[k], p1[k]);
    }

    auto build = [&](std::span<const int> keep, std::span<const int> give, const std::unordered_map<int, int>& map,
                     std::vector<int>& duplicates) {
        ActivityList child(keep.begin(), keep.end());
        std::copy(give.begin() + cut1, give.begin() + cut2, child.begin() + cut1);
        for (std::size_t k = 0; k < child.size(); ++k) {
            if (k >= cut1 && k < cut2) continue;
            int gene = child[k];
            if (!map.count(gene)) continue;
            duplicates.push_back(gene);
            while (map.count(gene)) gene = map.at(gene);
            child[k] = gene;
        }
        return child;
    };
    r.offspring1 = build(p1, p2, to_p1, r.duplicates1);
    r.offspring2 = build(p2, p1, to_p2, r.duplicates2);
    return r;
}

inline std::pair<ActivityList, ActivityList> pmx(std::span<const int> p1, std::span<const int> p2, std::size_t cut1,
                                                 std::size_t cut2) {
    auto r = pmx_detailed(p1, p2, cut1, cut2);
    return {std::move(r.offspring1), std::move(r.offspring2)};
}

/// Position-based crossover: offspring 1 keeps p1 at `positions` and fills the
/// remaining slots left to right with p2's genes in p2 order; offspring 2 mirrors.
inline std::pair<ActivityList, ActivityList> pbx(std::span<const int> p1, std::span<const int> p2,
                                                 std::span<const std::size_t> positions) {
    detail::require_same_permutation(p1, p2, "pbx");
    if (positions.empty()) throw ConfigError("pbx: position set is empty");
    std::vector<char> selected(p1.size(), 0);
    for (auto pos : positions) {
        if (pos >= p1.size()) throw ConfigError("pbx: position " + std::to_string(pos) + " out of range");
        selected[pos] = 1;
    }

    auto build = [&](std::span<const int> keep, std::span<const int> fill) {
        ActivityList child(keep.size());
        std::unordered_set<int> kept;
        for (std::size_t k = 0; k < keep.size(); ++k)
            if (selected[k]) {
                child[k] = keep[k];
                kept.insert(keep[k]);
            }
        std::size_t slot = 0;
        for (int gene : fill) {
            if (kept.count(gene)) continue;
            while (selected[slot]) ++slot;
            child[slot++] = gene;
        }
        return child;
    };
    return {build(p1, p2), build(p2, p1)};
}

inline ActivityList swap_mutate(ActivityList list, std::size_t i, std::size_t j) {
    if (i >= list.size() || j >= list.size()) throw ConfigError("swap: index out of range");
    if (i == j) throw ConfigError("swap: indices must differ");
    std::swap(list[i], list[j]);
    return list;
}

/// Removes the gene at `from` and reinserts it so that it ends up at `to`.
inline ActivityList insert_mutate(ActivityList list, std::size_t from, std::size_t to) {
    if (from >= list.size() || to >= list.size()) throw ConfigError("insert: index out of range");
    if (from == to) throw ConfigError("insert: indices must differ");
    if (from < to)
        std::rotate(list.begin() + from, list.begin() + from + 1, list.begin() + to + 1);
    else
        std::rotate(list.begin() + to, list.begin() + from, list.begin() + from + 1);
    return list;
}

/// Order-preserving topological repair: each output slot takes the earliest gene of
/// the input whose predecessors are all already emitted. Feasible input is returned
/// unchanged.
inline ActivityList repair(const Project& project, std::span<const int> list) {
    if (!is_permutation_of(project, list)) throw InfeasibleList("repair: input is not a permutation of the activity ids");
    const int n = project.size();
    std::vector<int> position(n);
    for (int k = 0; k < n; ++k) position[project.index_of(list[k])] = k;

    std::vector<int> missing(n);
    std::priority_queue<int, std::vector<int>, std::greater<>> ready; // input positions
    for (int i = 0; i < n; ++i) {
        missing[i] = static_cast<int>(project.preds(i).size());
        if (missing[i] == 0) ready.push(position[i]);
    }
    ActivityList out;
    out.reserve(n);
    while (!ready.empty()) {
        const int gene = list[ready.top()];
        ready.pop();
        out.push_back(gene);
        for (int s : project.succs(project.index_of(gene)))
            if (--missing[s] == 0) ready.push(position[s]);
    }
    return out;
}

} // namespace rcpsp
