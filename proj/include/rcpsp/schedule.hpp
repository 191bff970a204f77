#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcpsp/error.hpp"
#include "rcpsp/project_model.hpp"

namespace rcpsp {

/// Chromosome: a permutation of activity ids.
using ActivityList = std::vector<int>;

/// Resource-unit allocation policy applied after start times are fixed.
enum class Policy {
    EST,  ///< lowest free unit id first
    WEST, ///< units last used in the activity's workgroup first, then lowest id
};

inline const char* to_string(Policy p) { return p == Policy::EST ? "EST" : "WEST"; }

/// True when `list` contains every activity id of `project` exactly once.
inline bool is_permutation_of(const Project& project, std::span<const int> list) {
    if (static_cast<int>(list.size()) != project.size()) return false;
    std::vector<char> seen(project.size(), 0);
    for (int id : list) {
        int i = project.index_of(id);
        if (i < 0 || seen[i]) return false;
        seen[i] = 1;
    }
    return true;
}

/// True when `list` is a permutation in which every activity follows all its predecessors.
inline bool is_precedence_feasible(const Project& project, std::span<const int> list) {
    if (!is_permutation_of(project, list)) return false;
    std::vector<char> placed(project.size(), 0);
    for (int id : list) {
        int i = project.index_of(id);
        for (int p : project.preds(i))
            if (!placed[p]) return false;
        placed[i] = 1;
    }
    return true;
}

struct UnitAssignment {
    int group_id = 0;
    std::vector<int> units; ///< ascending unit ids, 1-based

    bool operator==(const UnitAssignment&) const = default;
};

struct ScheduledActivity {
    int id = 0;
    Tick start = 0;
    Tick finish = 0;
    std::vector<UnitAssignment> units; ///< one entry per demanded group, in group order

    bool operator==(const ScheduledActivity&) const = default;
};

/// Decoded activity list. `activities[i]` belongs to project activity index i.
struct Schedule {
    Policy policy = Policy::EST;
    std::vector<ScheduledActivity> activities;

    Tick makespan() const {
        Tick m = 0;
        for (const auto& a : activities) m = std::max(m, a.finish);
        return m;
    }

    bool operator==(const Schedule&) const = default;
};

namespace detail {

/// Per-group unit usage on a tick grid. Intervals are half-open [start, finish).
class ResourceProfile {
public:
    explicit ResourceProfile(const Project& project) : project_(project), usage_(project.group_count()) {}

    /// Earliest t >= earliest at which every demand fits for `duration` ticks.
    Tick earliest_fit(Tick earliest, Tick duration, const std::vector<Demand>& demands) const {
        if (duration == 0 || demands.empty()) return earliest;
        Tick t = earliest;
        for (;;) {
            bool moved = false;
            for (const auto& d : demands) {
                const auto& use = usage_[d.group];
                const int cap = project_.capacity(d.group);
                const Tick end = std::min<Tick>(t + duration, static_cast<Tick>(use.size()));
                // scan backwards so a conflict moves t past the latest blocking tick
                for (Tick tau = end - 1; tau >= t; --tau) {
                    if (use[tau] + d.units > cap) {
                        t = tau + 1;
                        moved = true;
                        break;
                    }
                }
                if (moved) break;
            }
            if (!moved) return t;
        }
    }

    void reserve(Tick start, Tick duration, const std::vector<Demand>& demands) {
        for (const auto& d : demands) {
            auto& use = usage_[d.group];
            if (static_cast<Tick>(use.size()) < start + duration) use.resize(start + duration, 0);
            for (Tick tau = start; tau < start + duration; ++tau) use[tau] += d.units;
        }
    }

private:
    const Project& project_;
    std::vector<std::vector<int>> usage_;
};

inline std::vector<int> checked_indices(const Project& project, std::span<const int> list) {
    if (!is_permutation_of(project, list))
        throw InfeasibleList("activity list is not a permutation of the instance's activity ids");
    std::vector<int> order;
    order.reserve(list.size());
    std::vector<char> placed(project.size(), 0);
    for (int id : list) {
        int i = project.index_of(id);
        for (int p : project.preds(i))
            if (!placed[p])
                throw InfeasibleList("activity " + std::to_string(id) + " precedes its predecessor " +
                                     std::to_string(project.id(p)) + " in the activity list");
        placed[i] = 1;
        order.push_back(i);
    }
    return order;
}

} // namespace detail

/// Start ticks (by activity index) produced by the serial scheme for `list`.
/// Only free-unit counts matter here, so the result is allocation-policy independent.
inline std::vector<Tick> serial_start_times(const Project& project, std::span<const int> list) {
    const auto order = detail::checked_indices(project, list);
    detail::ResourceProfile profile(project);
    std::vector<Tick> start(project.size(), 0);
    for (int i : order) {
        Tick earliest = 0;
        for (int p : project.preds(i)) earliest = std::max(earliest, start[p] + project.duration(p));
        start[i] = profile.earliest_fit(earliest, project.duration(i), project.demands(i));
        profile.reserve(start[i], project.duration(i), project.demands(i));
    }
    return start;
}

/// Serial schedule generation: place activities in list order at their earliest
/// precedence- and capacity-feasible start, then label concrete units per `policy`.
inline Schedule serial_sgs(const Project& project, std::span<const int> list, Policy policy) {
    const auto start = serial_start_times(project, list);
    const int n = project.size();

    Schedule schedule;
    schedule.policy = policy;
    schedule.activities.resize(n);
    std::vector<int> position(n);
    for (std::size_t k = 0; k < list.size(); ++k) position[project.index_of(list[k])] = static_cast<int>(k);
    for (int i = 0; i < n; ++i)
        schedule.activities[i] = {project.id(i), start[i], start[i] + project.duration(i), {}};

    // Unit labeling sweeps activities by (start, list position). A unit is free at
    // tick t once its current holder finished at or before t; capacity feasibility of
    // the start times guarantees enough free units at every activity's start.
    std::vector<int> by_start(n);
    std::iota(by_start.begin(), by_start.end(), 0);
    std::sort(by_start.begin(), by_start.end(), [&](int a, int b) {
        return start[a] != start[b] ? start[a] < start[b] : position[a] < position[b];
    });

    struct UnitState {
        Tick busy_until = 0;
        int last_workgroup = -1;
    };
    std::vector<std::vector<UnitState>> units(project.group_count());
    for (int g = 0; g < project.group_count(); ++g) units[g].resize(project.capacity(g));

    for (int i : by_start) {
        const Tick s = start[i];
        const int wg = project.workgroup(i);
        auto& assigned = schedule.activities[i].units;
        for (const auto& d : project.demands(i)) {
            auto& pool = units[d.group];
            std::vector<int> chosen;
            chosen.reserve(d.units);
            auto take = [&](auto&& accept) {
                for (int u = 0; u < static_cast<int>(pool.size()) && static_cast<int>(chosen.size()) < d.units; ++u)
                    if (pool[u].busy_until <= s && accept(pool[u]) &&
                        std::find(chosen.begin(), chosen.end(), u) == chosen.end())
                        chosen.push_back(u);
            };
            if (policy == Policy::WEST) take([wg](const UnitState& st) { return st.last_workgroup == wg; });
            take([](const UnitState&) { return true; });
            if (static_cast<int>(chosen.size()) < d.units)
                throw Error("internal: no free unit for activity " + std::to_string(project.id(i)));

            UnitAssignment ua{project.group_id(d.group), {}};
            for (int u : chosen) {
                pool[u].busy_until = s + project.duration(i);
                pool[u].last_workgroup = wg;
                ua.units.push_back(u + 1);
            }
            std::sort(ua.units.begin(), ua.units.end());
            assigned.push_back(std::move(ua));
        }
    }
    return schedule;
}

struct ScheduleMetrics {
    Tick makespan = 0;
    double makespan_days = 0.0;
    /// max over ticks of units in use, summed over groups
    int peak_demand = 0;
    /// units used by at least one activity, summed over groups
    int distinct_units = 0;
    /// consecutive assignments of one unit whose workgroups differ
    int unit_moves = 0;

    bool operator==(const ScheduleMetrics&) const = default;
};

inline ScheduleMetrics metrics(const Project& project, const Schedule& schedule) {
    ScheduleMetrics m;
    m.makespan = schedule.makespan();
    m.makespan_days = project.instance().to_days(m.makespan);

    std::vector<std::pair<Tick, int>> events;
    // (group id, unit id) -> (start, workgroup) of each assignment
    std::map<std::pair<int, int>, std::vector<std::pair<Tick, int>>> history;
    for (std::size_t i = 0; i < schedule.activities.size(); ++i) {
        const auto& a = schedule.activities[i];
        const int wg = project.workgroup(static_cast<int>(i));
        for (const auto& ua : a.units) {
            const int units = static_cast<int>(ua.units.size());
            if (a.finish > a.start) {
                events.emplace_back(a.start, units);
                events.emplace_back(a.finish, -units);
            }
            for (int u : ua.units) history[{ua.group_id, u}].emplace_back(a.start, wg);
        }
    }
    // releases sort before acquisitions at equal ticks (half-open intervals)
    std::sort(events.begin(), events.end());
    int in_use = 0;
    for (const auto& [t, delta] : events) {
        in_use += delta;
        m.peak_demand = std::max(m.peak_demand, in_use);
    }

    m.distinct_units = static_cast<int>(history.size());
    for (auto& [unit, uses] : history) {
        std::sort(uses.begin(), uses.end());
        for (std::size_t k = 1; k < uses.size(); ++k)
            if (uses[k].second != uses[k - 1].second) ++m.unit_moves;
    }
    return m;
}

/// Makespan of the decoded list; lower is fitter.
inline Tick fitness(const Project& project, std::span<const int> list, Policy policy) {
    return serial_sgs(project, list, policy).makespan();
}

} // namespace rcpsp
