#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rcpsp/error.hpp"

namespace rcpsp {

/// Integer time unit. Reporting in days goes through Instance::ticks_per_day.
using Tick = std::int64_t;

struct Activity {
    int id = 0;
    Tick duration = 0;
    /// resource-group id -> units required
    std::map<int, int> demands;
    std::string workgroup;

    bool operator==(const Activity&) const = default;
};

/// A pool of `capacity` identical units, identified 1..capacity.
struct ResourceGroup {
    int id = 0;
    std::string name;
    int capacity = 0;

    bool operator==(const ResourceGroup&) const = default;
};

struct Arc {
    int pred = 0;
    int succ = 0;

    auto operator<=>(const Arc&) const = default;
};

struct Instance {
    std::string name;
    double ticks_per_day = 1.0;
    std::vector<Activity> activities;
    std::vector<Arc> precedence;
    std::vector<ResourceGroup> groups;

    double to_days(Tick ticks) const { return static_cast<double>(ticks) / ticks_per_day; }

    /// Field-level equality; the arc collection is compared as a set.
    friend bool operator==(const Instance& a, const Instance& b) {
        if (a.name != b.name || a.ticks_per_day != b.ticks_per_day || a.activities != b.activities ||
            a.groups != b.groups)
            return false;
        std::set<Arc> lhs(a.precedence.begin(), a.precedence.end());
        std::set<Arc> rhs(b.precedence.begin(), b.precedence.end());
        return lhs == rhs;
    }
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
    NoActivities,
    NonPositiveId,
    DuplicateActivityId,
    DuplicateGroupId,
    NonPositiveCapacity,
    NegativeDuration,
    NegativeDemand,
    UnknownGroup,
    DemandExceedsCapacity,
    ZeroDurationWithDemand,
    DanglingArc,
    Cycle,
    BadTickScale,
};

inline const char* to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::NoActivities: return "no-activities";
    case ViolationKind::NonPositiveId: return "non-positive-id";
    case ViolationKind::DuplicateActivityId: return "duplicate-activity-id";
    case ViolationKind::DuplicateGroupId: return "duplicate-group-id";
    case ViolationKind::NonPositiveCapacity: return "non-positive-capacity";
    case ViolationKind::NegativeDuration: return "negative-duration";
    case ViolationKind::NegativeDemand: return "negative-demand";
    case ViolationKind::UnknownGroup: return "unknown-group";
    case ViolationKind::DemandExceedsCapacity: return "demand-exceeds-capacity";
    case ViolationKind::ZeroDurationWithDemand: return "zero-duration-with-demand";
    case ViolationKind::DanglingArc: return "dangling-arc";
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::BadTickScale: return "bad-tick-scale";
    }
    return "unknown";
}

struct Violation {
    ViolationKind kind;
    std::string message;
    /// activity (or group) ids involved, ascending
    std::vector<int> ids;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }

    std::size_t count(ViolationKind kind) const {
        return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                      [kind](const Violation& v) { return v.kind == kind; }));
    }

    std::vector<std::string> messages() const {
        std::vector<std::string> out;
        out.reserve(violations.size());
        for (const auto& v : violations) out.push_back(std::string(to_string(v.kind)) + ": " + v.message);
        return out;
    }
};

namespace detail {

inline std::string join_ids(const std::vector<int>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(ids[i]);
    }
    return out;
}

/// Strongly connected components with more than one node, or with a self-loop.
/// Iterative Kosaraju over an adjacency list of dense indices.
inline std::vector<std::vector<int>> cyclic_components(const std::vector<std::vector<int>>& succ) {
    const int n = static_cast<int>(succ.size());
    std::vector<std::vector<int>> pred(n);
    for (int u = 0; u < n; ++u)
        for (int v : succ[u]) pred[v].push_back(u);

    std::vector<int> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    std::vector<std::pair<int, std::size_t>> stack;
    for (int root = 0; root < n; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        stack.emplace_back(root, 0);
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            if (next < succ[u].size()) {
                int v = succ[u][next++];
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.emplace_back(v, 0);
                }
            } else {
                order.push_back(u);
                stack.pop_back();
            }
        }
    }

    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> components;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[*it] != -1) continue;
        const int c = static_cast<int>(components.size());
        components.emplace_back();
        std::vector<int> todo{*it};
        comp[*it] = c;
        while (!todo.empty()) {
            int u = todo.back();
            todo.pop_back();
            components[c].push_back(u);
            for (int v : pred[u])
                if (comp[v] == -1) {
                    comp[v] = c;
                    todo.push_back(v);
                }
        }
    }

    std::vector<std::vector<int>> cyclic;
    for (auto& members : components) {
        bool self_loop = members.size() == 1 &&
                         std::find(succ[members[0]].begin(), succ[members[0]].end(), members[0]) != succ[members[0]].end();
        if (members.size() > 1 || self_loop) {
            std::sort(members.begin(), members.end());
            cyclic.push_back(std::move(members));
        }
    }
    std::sort(cyclic.begin(), cyclic.end());
    return cyclic;
}

} // namespace detail

/// Reports every structural problem of `instance`; an empty report means valid.
inline ValidationReport validate_instance(const Instance& instance) {
    ValidationReport report;
    auto add = [&report](ViolationKind kind, std::string message, std::vector<int> ids) {
        std::sort(ids.begin(), ids.end());
        report.violations.push_back({kind, std::move(message), std::move(ids)});
    };

    if (instance.activities.empty()) add(ViolationKind::NoActivities, "instance has no activities", {});
    if (!(instance.ticks_per_day > 0.0))
        add(ViolationKind::BadTickScale, "ticks_per_day must be positive", {});

    std::map<int, int> capacity;
    for (const auto& g : instance.groups) {
        if (g.id <= 0) add(ViolationKind::NonPositiveId, "resource group id " + std::to_string(g.id) + " is not positive", {g.id});
        if (!capacity.emplace(g.id, g.capacity).second)
            add(ViolationKind::DuplicateGroupId, "resource group id " + std::to_string(g.id) + " appears more than once", {g.id});
        if (g.capacity < 1)
            add(ViolationKind::NonPositiveCapacity,
                "resource group " + std::to_string(g.id) + " has capacity " + std::to_string(g.capacity), {g.id});
    }

    std::unordered_map<int, int> index;
    for (const auto& a : instance.activities) {
        const std::string name = "activity " + std::to_string(a.id);
        if (a.id <= 0) add(ViolationKind::NonPositiveId, name + " has a non-positive id", {a.id});
        if (!index.emplace(a.id, static_cast<int>(index.size())).second)
            add(ViolationKind::DuplicateActivityId, name + " appears more than once", {a.id});
        if (a.duration < 0)
            add(ViolationKind::NegativeDuration, name + " has negative duration " + std::to_string(a.duration), {a.id});
        bool demands_any = false;
        for (const auto& [group, units] : a.demands) {
            if (units < 0) {
                add(ViolationKind::NegativeDemand,
                    name + " demands " + std::to_string(units) + " units of group " + std::to_string(group), {a.id});
                continue;
            }
            demands_any = demands_any || units > 0;
            auto cap = capacity.find(group);
            if (cap == capacity.end()) {
                add(ViolationKind::UnknownGroup, name + " references unknown resource group " + std::to_string(group), {a.id});
            } else if (units > cap->second) {
                add(ViolationKind::DemandExceedsCapacity,
                    name + " demands " + std::to_string(units) + " units of group " + std::to_string(group) +
                        " (capacity " + std::to_string(cap->second) + ")",
                    {a.id});
            }
        }
        if (a.duration == 0 && demands_any)
            add(ViolationKind::ZeroDurationWithDemand, name + " has zero duration but demands resources", {a.id});
    }

    std::vector<std::vector<int>> succ(index.size());
    for (const auto& arc : instance.precedence) {
        auto p = index.find(arc.pred);
        auto s = index.find(arc.succ);
        if (p == index.end() || s == index.end()) {
            std::vector<int> missing;
            if (p == index.end()) missing.push_back(arc.pred);
            if (s == index.end() && arc.succ != arc.pred) missing.push_back(arc.succ);
            add(ViolationKind::DanglingArc,
                "arc " + std::to_string(arc.pred) + "->" + std::to_string(arc.succ) + " references unknown activity " +
                    detail::join_ids(missing),
                missing);
            continue;
        }
        succ[p->second].push_back(s->second);
    }

    std::vector<int> id_of(index.size());
    for (const auto& [id, i] : index) id_of[i] = id;
    for (const auto& members : detail::cyclic_components(succ)) {
        std::vector<int> ids;
        for (int i : members) ids.push_back(id_of[i]);
        std::sort(ids.begin(), ids.end());
        add(ViolationKind::Cycle, "precedence cycle through activities {" + detail::join_ids(ids) + "}", ids);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Compiled, index-based view of a valid instance.

struct Demand {
    int group = 0; ///< dense group index
    int units = 0;
};

/// Immutable index-based view of a validated Instance. Activity index i refers to
/// instance().activities[i]; group index g to instance().groups[g].
class Project {
public:
    explicit Project(Instance instance) : instance_(std::move(instance)) {
        auto report = validate_instance(instance_);
        if (!report.ok()) throw InvalidInstance("invalid instance '" + instance_.name + "'", report.messages());
        build();
    }

    const Instance& instance() const noexcept { return instance_; }
    int size() const noexcept { return static_cast<int>(instance_.activities.size()); }
    int group_count() const noexcept { return static_cast<int>(capacity_.size()); }

    int id(int index) const { return instance_.activities[index].id; }
    /// Index of an activity id, or -1 when the id is unknown.
    int index_of(int id) const {
        auto it = index_.find(id);
        return it == index_.end() ? -1 : it->second;
    }

    Tick duration(int index) const { return duration_[index]; }
    const std::vector<int>& preds(int index) const { return preds_[index]; }
    const std::vector<int>& succs(int index) const { return succs_[index]; }
    const std::vector<Demand>& demands(int index) const { return demands_[index]; }
    int workgroup(int index) const { return workgroup_[index]; }
    const std::string& workgroup_name(int wg) const { return workgroup_names_[wg]; }
    int workgroup_count() const noexcept { return static_cast<int>(workgroup_names_.size()); }

    int capacity(int group) const { return capacity_[group]; }
    int group_id(int group) const { return instance_.groups[group].id; }

    /// Activity indices in a topological order (ascending index among ready nodes).
    const std::vector<int>& topological_order() const noexcept { return topo_; }

    Tick total_duration() const { return std::accumulate(duration_.begin(), duration_.end(), Tick{0}); }

private:
    void build() {
        const auto& acts = instance_.activities;
        const int n = static_cast<int>(acts.size());
        std::map<int, int> group_index;
        for (std::size_t g = 0; g < instance_.groups.size(); ++g) {
            group_index[instance_.groups[g].id] = static_cast<int>(g);
            capacity_.push_back(instance_.groups[g].capacity);
        }
        std::map<std::string, int> wg_index;
        duration_.resize(n);
        demands_.resize(n);
        workgroup_.resize(n);
        preds_.resize(n);
        succs_.resize(n);
        for (int i = 0; i < n; ++i) {
            index_[acts[i].id] = i;
            duration_[i] = acts[i].duration;
            for (const auto& [group, units] : acts[i].demands)
                if (units > 0) demands_[i].push_back({group_index.at(group), units});
            auto [it, inserted] = wg_index.emplace(acts[i].workgroup, static_cast<int>(workgroup_names_.size()));
            if (inserted) workgroup_names_.push_back(acts[i].workgroup);
            workgroup_[i] = it->second;
        }
        std::set<std::pair<int, int>> seen;
        for (const auto& arc : instance_.precedence) {
            int p = index_.at(arc.pred), s = index_.at(arc.succ);
            if (!seen.emplace(p, s).second) continue;
            succs_[p].push_back(s);
            preds_[s].push_back(p);
        }
        for (auto& v : succs_) std::sort(v.begin(), v.end());
        for (auto& v : preds_) std::sort(v.begin(), v.end());

        std::vector<int> indegree(n);
        for (int i = 0; i < n; ++i) indegree[i] = static_cast<int>(preds_[i].size());
        std::set<int> ready;
        for (int i = 0; i < n; ++i)
            if (indegree[i] == 0) ready.insert(i);
        while (!ready.empty()) {
            int u = *ready.begin();
            ready.erase(ready.begin());
            topo_.push_back(u);
            for (int v : succs_[u])
                if (--indegree[v] == 0) ready.insert(v);
        }
    }

    Instance instance_;
    std::unordered_map<int, int> index_;
    std::vector<Tick> duration_;
    std::vector<std::vector<int>> preds_;
    std::vector<std::vector<int>> succs_;
    std::vector<std::vector<Demand>> demands_;
    std::vector<int> workgroup_;
    std::vector<std::string> workgroup_names_;
    std::vector<int> capacity_;
    std::vector<int> topo_;
};

// ---------------------------------------------------------------------------
// Critical path

struct CriticalPathInfo {
    /// Longest duration-weighted path; the resource-relaxed minimum makespan.
    Tick length = 0;
    /// Longest path from activity index i (inclusive) to any terminal activity.
    std::vector<Tick> tail;
};

inline CriticalPathInfo critical_path(const Project& project) {
    CriticalPathInfo info;
    info.tail.assign(project.size(), 0);
    const auto& order = project.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Tick best = 0;
        for (int s : project.succs(*it)) best = std::max(best, info.tail[s]);
        info.tail[*it] = project.duration(*it) + best;
        info.length = std::max(info.length, info.tail[*it]);
    }
    return info;
}

/// Throws InvalidInstance when `instance` does not validate.
inline CriticalPathInfo critical_path(const Instance& instance) { return critical_path(Project(instance)); }

} // namespace rcpsp
