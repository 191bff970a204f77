#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rcpsp/error.hpp"
#include "rcpsp/project_model.hpp"
#include "rcpsp/schedule.hpp"

// Exhaustive ground truth for small instances.

namespace rcpsp {

inline constexpr std::uint64_t default_visit_cap = 10'000'000;

namespace detail {

/// Number of linear extensions, saturating at `limit`. Returns nullopt when the
/// bitmask DP does not apply (more than 64 activities) or grows too large.
inline std::optional<std::uint64_t> count_linear_extensions(const Project& project, std::uint64_t limit) {
    const int n = project.size();
    if (n > 64) return std::nullopt;
    std::vector<std::uint64_t> pred_mask(n, 0);
    for (int i = 0; i < n; ++i)
        for (int p : project.preds(i)) pred_mask[i] |= std::uint64_t{1} << p;

    std::unordered_map<std::uint64_t, std::uint64_t> memo;
    constexpr std::size_t max_states = 4'000'000;
    bool overflow = false;
    const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    std::function<std::uint64_t(std::uint64_t)> count = [&](std::uint64_t placed) -> std::uint64_t {
        if (placed == full) return 1;
        if (auto it = memo.find(placed); it != memo.end()) return it->second;
        if (memo.size() >= max_states) {
            overflow = true;
            return 0;
        }
        std::uint64_t total = 0;
        for (int i = 0; i < n && !overflow; ++i) {
            const std::uint64_t bit = std::uint64_t{1} << i;
            if ((placed & bit) || (pred_mask[i] & ~placed)) continue;
            total += count(placed | bit);
            if (total > limit) total = limit + 1;
        }
        memo[placed] = total;
        return total;
    };
    auto total = count(0);
    if (overflow) return std::nullopt;
    return total;
}

} // namespace detail

/// Visits every precedence-feasible activity list exactly once, in lexicographic
/// order of activity index. Throws SizeCapExceeded (before visiting anything when
/// the count can be determined up front) if more than `cap` lists exist.
inline std::uint64_t enumerate_feasible_lists(const Project& project,
                                              const std::function<void(std::span<const int>)>& visitor,
                                              std::uint64_t cap = default_visit_cap) {
    const int n = project.size();
    if (auto total = detail::count_linear_extensions(project, cap); total && *total > cap)
        throw SizeCapExceeded("instance has more than " + std::to_string(cap) + " feasible activity lists");

    std::vector<int> missing(n);
    for (int i = 0; i < n; ++i) missing[i] = static_cast<int>(project.preds(i).size());
    std::vector<char> placed(n, 0);
    ActivityList list;
    list.reserve(n);
    std::uint64_t visited = 0;

    std::function<void()> descend = [&]() {
        if (static_cast<int>(list.size()) == n) {
            if (++visited > cap)
                throw SizeCapExceeded("instance has more than " + std::to_string(cap) + " feasible activity lists");
            visitor(list);
            return;
        }
        for (int i = 0; i < n; ++i) {
            if (placed[i] || missing[i] != 0) continue;
            placed[i] = 1;
            list.push_back(project.id(i));
            for (int s : project.succs(i)) --missing[s];
            descend();
            for (int s : project.succs(i)) ++missing[s];
            list.pop_back();
            placed[i] = 0;
        }
    };
    descend();
    return visited;
}

struct OracleResult {
    Tick optimum = 0;
    ActivityList optimal_list;
    std::uint64_t lists_enumerated = 0;
    std::int64_t elapsed_ms = 0;
};

/// Minimum serial-scheme makespan over all feasible lists (the first list reaching
/// it is reported).
inline OracleResult brute_force_optimum(const Project& project, Policy policy,
                                        std::uint64_t cap = default_visit_cap) {
    const auto t0 = std::chrono::steady_clock::now();
    OracleResult r;
    r.optimum = std::numeric_limits<Tick>::max();
    r.lists_enumerated = enumerate_feasible_lists(
        project,
        [&](std::span<const int> list) {
            const Tick f = fitness(project, list, policy);
            if (f < r.optimum) {
                r.optimum = f;
                r.optimal_list.assign(list.begin(), list.end());
            }
        },
        cap);
    r.elapsed_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace rcpsp
