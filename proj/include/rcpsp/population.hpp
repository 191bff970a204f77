#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcpsp/error.hpp"
#include "rcpsp/project_model.hpp"
#include "rcpsp/random.hpp"
#include "rcpsp/schedule.hpp"

namespace rcpsp {

enum class DispatchRule { SPT, LPT, CP_SPT, CP_LPT, RANDOM };

inline constexpr std::array<DispatchRule, 5> all_dispatch_rules{DispatchRule::SPT, DispatchRule::LPT,
                                                                 DispatchRule::CP_SPT, DispatchRule::CP_LPT,
                                                                 DispatchRule::RANDOM};

inline const char* to_string(DispatchRule r) {
    switch (r) {
    case DispatchRule::SPT: return "SPT";
    case DispatchRule::LPT: return "LPT";
    case DispatchRule::CP_SPT: return "CP_SPT";
    case DispatchRule::CP_LPT: return "CP_LPT";
    case DispatchRule::RANDOM: return "RANDOM";
    }
    return "?";
}

/// Builds a feasible list by repeated selection from the eligible set.
///
/// SPT/LPT order by duration; the CP rules prefer the longest tail (path to
/// completion) and break ties by duration. Remaining ties go to the lowest id,
/// or to a uniformly random tied candidate when `perturb` is set. RANDOM picks
/// uniformly among all eligible activities.
inline ActivityList dispatch_list(const Project& project, const CriticalPathInfo& cp, DispatchRule rule, Rng& rng,
                                  bool perturb) {
    const int n = project.size();
    // lexicographic key, smaller is preferred
    auto key = [&](int i) -> std::pair<Tick, Tick> {
        const Tick d = project.duration(i);
        switch (rule) {
        case DispatchRule::SPT: return {d, 0};
        case DispatchRule::LPT: return {-d, 0};
        case DispatchRule::CP_SPT: return {-cp.tail[i], d};
        case DispatchRule::CP_LPT: return {-cp.tail[i], -d};
        case DispatchRule::RANDOM: return {0, 0};
        }
        return {0, 0};
    };

    std::vector<int> missing(n);
    std::vector<int> eligible;
    for (int i = 0; i < n; ++i) {
        missing[i] = static_cast<int>(project.preds(i).size());
        if (missing[i] == 0) eligible.push_back(i);
    }

    ActivityList list;
    list.reserve(n);
    std::vector<std::size_t> tied;
    while (!eligible.empty()) {
        std::size_t pick = 0;
        if (rule == DispatchRule::RANDOM) {
            pick = static_cast<std::size_t>(rng.index(static_cast<int>(eligible.size())));
        } else {
            auto best = key(eligible[0]);
            tied.assign(1, 0);
            for (std::size_t k = 1; k < eligible.size(); ++k) {
                auto kk = key(eligible[k]);
                if (kk < best) {
                    best = kk;
                    tied.assign(1, k);
                } else if (kk == best) {
                    tied.push_back(k);
                }
            }
            if (perturb && tied.size() > 1) {
                pick = tied[static_cast<std::size_t>(rng.index(static_cast<int>(tied.size())))];
            } else {
                pick = *std::min_element(tied.begin(), tied.end(), [&](std::size_t a, std::size_t b) {
                    return project.id(eligible[a]) < project.id(eligible[b]);
                });
            }
        }
        const int chosen = eligible[pick];
        eligible.erase(eligible.begin() + static_cast<std::ptrdiff_t>(pick));
        list.push_back(project.id(chosen));
        for (int s : project.succs(chosen))
            if (--missing[s] == 0) eligible.push_back(s);
    }
    return list;
}

struct Member {
    ActivityList genes;
    Tick fitness = 0;
    /// dispatching rule that produced an initial member; empty for offspring
    std::optional<DispatchRule> origin;
};

struct Population {
    std::vector<Member> members;
    int generation = 0;
};

/// Dispatching-rule allocation for a population of `size`: round-robin over the
/// five rules, so Ps=10 gives two lists per rule.
inline std::vector<DispatchRule> initial_rule_plan(int size) {
    std::vector<DispatchRule> plan;
    for (int k = 0; k < size; ++k) plan.push_back(all_dispatch_rules[k % all_dispatch_rules.size()]);
    return plan;
}

/// Initial lists (not yet evaluated). The first list of each deterministic rule is
/// built without tie perturbation, later ones with it.
inline std::vector<Member> initial_members(const Project& project, int size, Rng& rng) {
    const auto cp = critical_path(project);
    std::vector<Member> members;
    std::array<int, 5> used{};
    for (auto rule : initial_rule_plan(size)) {
        auto& count = used[static_cast<std::size_t>(rule)];
        members.push_back({dispatch_list(project, cp, rule, rng, count > 0), 0, rule});
        ++count;
    }
    return members;
}

// ---------------------------------------------------------------------------
// Selection

inline double reciprocal_fitness(Tick f) {
    if (f <= 0) throw DegenerateInstance("degenerate zero-makespan instance");
    return 1.0 / static_cast<double>(f);
}

/// Roulette-wheel probabilities: reciprocal fitness normalised to sum to one.
inline std::vector<double> selection_probabilities(std::span<const Tick> fitnesses) {
    std::vector<double> p;
    p.reserve(fitnesses.size());
    double total = 0.0;
    for (Tick f : fitnesses) {
        p.push_back(reciprocal_fitness(f));
        total += p.back();
    }
    for (auto& x : p) x /= total;
    return p;
}

/// Cumulative interval bounds; the last bound is pinned to 1.
inline std::vector<double> cumulative(std::span<const double> probabilities) {
    std::vector<double> c(probabilities.size());
    std::partial_sum(probabilities.begin(), probabilities.end(), c.begin());
    if (!c.empty()) c.back() = 1.0;
    return c;
}

/// Index of the interval containing `draw` in [0, 1).
inline std::size_t roulette_index(std::span<const double> cumulative_bounds, double draw) {
    auto it = std::upper_bound(cumulative_bounds.begin(), cumulative_bounds.end(), draw);
    if (it == cumulative_bounds.end()) --it;
    return static_cast<std::size_t>(it - cumulative_bounds.begin());
}

inline std::vector<Tick> fitnesses(const Population& pop) {
    std::vector<Tick> f;
    f.reserve(pop.members.size());
    for (const auto& m : pop.members) f.push_back(m.fitness);
    return f;
}

/// One parent drawn by roulette wheel.
inline const Member& roulette_select(const Population& pop, Rng& rng) {
    const auto bounds = cumulative(selection_probabilities(fitnesses(pop)));
    return pop.members[roulette_index(bounds, rng.uniform())];
}

/// Indices of the k fittest members, ties resolved by earlier index.
inline std::vector<std::size_t> elite_indices(const Population& pop, std::size_t k) {
    std::vector<std::size_t> idx(pop.members.size());
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          const auto fa = pop.members[a].fitness, fb = pop.members[b].fitness;
                          return fa != fb ? fa < fb : a < b;
                      });
    idx.resize(k);
    return idx;
}

inline std::vector<Member> elite(const Population& pop, std::size_t k) {
    std::vector<Member> out;
    for (auto i : elite_indices(pop, k)) out.push_back(pop.members[i]);
    return out;
}

} // namespace rcpsp
