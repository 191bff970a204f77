#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcpsp/error.hpp"
#include "rcpsp/ga.hpp"
#include "rcpsp/instance_io.hpp"
#include "rcpsp/project_model.hpp"
#include "rcpsp/random.hpp"
#include "rcpsp/schedule.hpp"

namespace rcpsp {

// ---------------------------------------------------------------------------
// Synthetic instance generator

struct GeneratorSpec {
    std::string name = "generated";
    int activities = 30;
    int workgroups = 5;
    int groups = 12;
    int capacity_min = 2;
    int capacity_max = 6;
    Tick duration_min = 1;
    Tick duration_max = 10;
    int demand_min = 1;
    int demand_max = 3;
    /// each activity draws units from 1..this many distinct groups
    int groups_per_activity = 2;
    /// probability of an arc between two activities of adjacent layers
    double density = 0.2;
    /// 0 selects round(sqrt(activities))
    int layers = 0;
    double ticks_per_day = 8.0;
    std::uint64_t seed = 42;

    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError("generator: " + m); };
        if (activities < 1) fail("activity count must be positive");
        if (workgroups < 1) fail("workgroup count must be positive");
        if (groups < 1) fail("resource-group count must be positive");
        if (capacity_min < 1 || capacity_min > capacity_max) fail("capacity range must satisfy 1 <= min <= max");
        if (duration_min < 1 || duration_min > duration_max) fail("duration range must satisfy 1 <= min <= max");
        if (demand_min < 1 || demand_min > demand_max) fail("demand range must satisfy 1 <= min <= max");
        if (demand_min > capacity_min) fail("demand range exceeds capacity range (demand_min > capacity_min)");
        if (groups_per_activity < 1 || groups_per_activity > groups)
            fail("groups per activity must be in [1, resource-group count]");
        if (!(density >= 0.0 && density <= 1.0)) fail("density must be in [0, 1]");
        if (layers < 0) fail("layer count must be non-negative");
        if (!(ticks_per_day > 0.0)) fail("ticks_per_day must be positive");
    }
};

/// Layered random DAG, deterministic in `spec.seed`. Activities are split into
/// contiguous layers; every activity outside the first layer gets one random
/// predecessor in the previous layer plus further adjacent-layer arcs with
/// probability `density`. Workgroups are assigned round-robin.
inline Instance generate_instance(const GeneratorSpec& spec) {
    spec.validate();
    static const char* const area_names[] = {"cockpit", "door", "galley", "interior", "lavatory"};
    Rng rng(spec.seed);
    auto uniform = [&rng](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    };

    Instance inst;
    inst.name = spec.name;
    inst.ticks_per_day = spec.ticks_per_day;
    for (int g = 1; g <= spec.groups; ++g)
        inst.groups.push_back({g, "G" + std::to_string(g), static_cast<int>(uniform(spec.capacity_min, spec.capacity_max))});

    const int n = spec.activities;
    const int layer_count =
        std::clamp(spec.layers > 0 ? spec.layers : static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))), 1, n);
    std::vector<std::vector<int>> layers(layer_count);
    for (int k = 0; k < n; ++k) {
        const int id = k + 1;
        layers[static_cast<std::size_t>(static_cast<std::int64_t>(k) * layer_count / n)].push_back(id);

        Activity a;
        a.id = id;
        a.duration = uniform(spec.duration_min, spec.duration_max);
        const int wg = k % spec.workgroups;
        a.workgroup = spec.workgroups <= 5 ? std::string(area_names[wg]) : "wg" + std::to_string(wg + 1);
        const int count = static_cast<int>(uniform(1, spec.groups_per_activity));
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < count) chosen.insert(static_cast<int>(uniform(1, spec.groups)));
        for (int g : chosen) {
            const int cap = inst.groups[g - 1].capacity;
            a.demands[g] = static_cast<int>(uniform(spec.demand_min, std::min(spec.demand_max, cap)));
        }
        inst.activities.push_back(std::move(a));
    }

    for (int l = 1; l < layer_count; ++l) {
        const auto& prev = layers[l - 1];
        for (int succ : layers[l]) {
            const int forced = prev[static_cast<std::size_t>(rng.index(static_cast<int>(prev.size())))];
            for (int pred : prev)
                if (pred == forced || rng.uniform() < spec.density) inst.precedence.push_back({pred, succ});
        }
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Factorial parameter sweep

/// Level lists default to the case-study factorial design with five population
/// sizes; runs are budgeted in seconds rather than the original two hours.
struct SweepSpec {
    std::vector<int> population_sizes{5, 10, 30, 60, 100};
    std::vector<double> crossover_probabilities{0.7, 0.8, 0.9};
    std::vector<double> mutation_probabilities{0.01, 0.05, 0.1};
    std::vector<CrossoverKind> crossovers{CrossoverKind::PMX, CrossoverKind::PBX};
    std::vector<MutationKind> mutations{MutationKind::SWAP, MutationKind::INSERT};
    std::vector<Policy> policies{Policy::EST, Policy::WEST};
    std::optional<std::int64_t> time_limit_ms = 2000;
    std::optional<int> max_generations;
    int seeds_per_cell = 1;
    std::uint64_t master_seed = 1;
    int elite_count = 1;
    /// concurrent runs
    int threads = 1;

    std::size_t cell_count() const {
        return population_sizes.size() * crossover_probabilities.size() * mutation_probabilities.size() *
               crossovers.size() * mutations.size() * policies.size();
    }

    void validate() const {
        if (population_sizes.empty() || crossover_probabilities.empty() || mutation_probabilities.empty() ||
            crossovers.empty() || mutations.empty() || policies.empty())
            throw ConfigError("sweep: every level list must be non-empty");
        if (!time_limit_ms && !max_generations) throw ConfigError("sweep: a time budget or generation cap is required");
        if (time_limit_ms && *time_limit_ms <= 0) throw ConfigError("sweep: time budget must be positive");
        if (max_generations && *max_generations <= 0) throw ConfigError("sweep: generation cap must be positive");
        if (seeds_per_cell < 1) throw ConfigError("sweep: seeds per cell must be positive");
        if (threads < 1) throw ConfigError("sweep: thread count must be positive");
    }
};

struct SweepRow {
    std::size_t cell = 0;
    int seed_index = 0;
    std::uint64_t seed = 0;
    Policy policy = Policy::EST;
    int population_size = 0;
    double crossover_probability = 0.0;
    CrossoverKind crossover = CrossoverKind::PMX;
    double mutation_probability = 0.0;
    MutationKind mutation = MutationKind::SWAP;
    Tick best_makespan = 0;
    double best_makespan_days = 0.0;
    std::int64_t time_to_best_ms = 0;
    int generations = 0;
    int distinct_units = 0;
    int peak_demand = 0;
    int unit_moves = 0;
    /// non-empty when the run failed
    std::string error;
};

/// GA configuration of one (cell, seed) pair. Cells enumerate policy, Ps, Pc,
/// crossover, Pm and mutation with the last varying fastest.
inline GAConfig cell_config(const SweepSpec& spec, std::size_t cell, int seed_index) {
    std::size_t rest = cell;
    auto pick = [&rest](const auto& levels) {
        const auto& v = levels[rest % levels.size()];
        rest /= levels.size();
        return v;
    };
    GAConfig c;
    c.mutation = pick(spec.mutations);
    c.mutation_probability = pick(spec.mutation_probabilities);
    c.crossover = pick(spec.crossovers);
    c.crossover_probability = pick(spec.crossover_probabilities);
    c.population_size = pick(spec.population_sizes);
    c.policy = pick(spec.policies);
    c.elite_count = spec.elite_count;
    c.time_limit_ms = spec.time_limit_ms;
    c.max_generations = spec.max_generations;
    c.seed = derive_seed(spec.master_seed, cell, static_cast<std::uint64_t>(seed_index));
    c.record_time = true;
    return c;
}

using RunObserver = std::function<void(const SweepRow&, const GAResult&)>;

/// One sweep row from a single GA run; failures are captured in `error`.
inline SweepRow run_cell(const Project& project, const GAConfig& config, std::size_t cell = 0, int seed_index = 0,
                         const RunObserver& observer = {}) {
    SweepRow row;
    row.cell = cell;
    row.seed_index = seed_index;
    row.seed = config.seed;
    row.policy = config.policy;
    row.population_size = config.population_size;
    row.crossover_probability = config.crossover_probability;
    row.crossover = config.crossover;
    row.mutation_probability = config.mutation_probability;
    row.mutation = config.mutation;
    try {
        auto result = evolve(project, config);
        const auto m = metrics(project, result.best_schedule);
        row.best_makespan = result.best_makespan;
        row.best_makespan_days = result.best_makespan_days;
        row.time_to_best_ms = result.time_to_best_ms;
        row.generations = result.generations;
        row.distinct_units = m.distinct_units;
        row.peak_demand = m.peak_demand;
        row.unit_moves = m.unit_moves;
        if (observer) observer(row, result);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

/// Runs every cell x seed. Rows come back in cell order whatever the thread count;
/// `observer` is called (serialised) as runs finish.
inline std::vector<SweepRow> run_sweep(const Project& project, const SweepSpec& spec, const RunObserver& observer = {}) {
    spec.validate();
    const std::size_t runs = spec.cell_count() * static_cast<std::size_t>(spec.seeds_per_cell);
    std::vector<SweepRow> rows(runs);
    std::mutex observer_mutex;
    auto guarded = [&](const SweepRow& row, const GAResult& result) {
        if (!observer) return;
        std::lock_guard lock(observer_mutex);
        observer(row, result);
    };
    auto run = [&](std::size_t k) {
        const std::size_t cell = k / static_cast<std::size_t>(spec.seeds_per_cell);
        const int seed_index = static_cast<int>(k % static_cast<std::size_t>(spec.seeds_per_cell));
        rows[k] = run_cell(project, cell_config(spec, cell, seed_index), cell, seed_index, guarded);
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), runs);
    if (workers <= 1) {
        for (std::size_t k = 0; k < runs; ++k) run(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k; (k = next.fetch_add(1)) < runs;) run(k);
            });
    }
    return rows;
}

struct BestSettings {
    Policy policy = Policy::EST;
    /// rows at the policy's minimum makespan, fastest first; front() is the best setting
    std::vector<SweepRow> rows;
};

/// Per policy: rows reaching that policy's minimum makespan, sorted by time-to-best
/// (ties by cell and seed index, so the output does not depend on input order).
inline std::vector<BestSettings> best_settings(const std::vector<SweepRow>& rows) {
    std::vector<BestSettings> out;
    for (Policy policy : {Policy::EST, Policy::WEST}) {
        std::vector<SweepRow> mine;
        for (const auto& r : rows)
            if (r.policy == policy && r.error.empty()) mine.push_back(r);
        if (mine.empty()) continue;
        const Tick best = std::min_element(mine.begin(), mine.end(), [](const auto& a, const auto& b) {
                              return a.best_makespan < b.best_makespan;
                          })->best_makespan;
        std::erase_if(mine, [best](const SweepRow& r) { return r.best_makespan != best; });
        std::sort(mine.begin(), mine.end(), [](const SweepRow& a, const SweepRow& b) {
            return std::tie(a.time_to_best_ms, a.cell, a.seed_index) < std::tie(b.time_to_best_ms, b.cell, b.seed_index);
        });
        out.push_back({policy, std::move(mine)});
    }
    return out;
}

inline std::string sweep_csv_header() {
    return "cell,seed_index,seed,policy,population_size,crossover_probability,crossover,mutation_probability,mutation,"
           "best_makespan_ticks,best_makespan_days,time_to_best_ms,generations,distinct_units,peak_demand,unit_moves,"
           "error\n";
}

inline std::string sweep_csv_row(const SweepRow& r) {
    return std::to_string(r.cell) + ',' + std::to_string(r.seed_index) + ',' + std::to_string(r.seed) + ',' +
           to_string(r.policy) + ',' + std::to_string(r.population_size) + ',' +
           format_number(r.crossover_probability) + ',' + to_string(r.crossover) + ',' +
           format_number(r.mutation_probability) + ',' + to_string(r.mutation) + ',' +
           std::to_string(r.best_makespan) + ',' + format_number(r.best_makespan_days) + ',' +
           std::to_string(r.time_to_best_ms) + ',' + std::to_string(r.generations) + ',' +
           std::to_string(r.distinct_units) + ',' + std::to_string(r.peak_demand) + ',' + std::to_string(r.unit_moves) +
           ',' + csv_field(r.error) + '\n';
}

inline std::string write_sweep(const std::vector<SweepRow>& rows) {
    std::string out = sweep_csv_header();
    for (const auto& r : rows) out += sweep_csv_row(r);
    return out;
}

/// Best-setting table: the sweep columns prefixed by policy rank.
inline std::string write_best_settings(const std::vector<BestSettings>& table) {
    std::string out = "rank," + sweep_csv_header();
    for (const auto& entry : table)
        for (std::size_t k = 0; k < entry.rows.size(); ++k) out += std::to_string(k + 1) + ',' + sweep_csv_row(entry.rows[k]);
    return out;
}

// ---------------------------------------------------------------------------
// Plan comparison

struct PlanRow {
    std::string name;
    double makespan_days = 0.0;
    int resource_units = 0;
};

struct PlanComparison {
    std::string name;
    double makespan_days = 0.0;
    int resource_units = 0;
    /// (baseline - plan) / baseline * 100
    double makespan_improvement_pct = 0.0;
    double resource_improvement_pct = 0.0;
};

inline std::vector<PlanComparison> compare_plans(const std::vector<PlanRow>& rows, std::size_t baseline = 0) {
    if (rows.size() < 2) throw ConfigError("compare_plans: at least two rows are required");
    if (baseline >= rows.size()) throw ConfigError("compare_plans: baseline index out of range");
    const auto& base = rows[baseline];
    if (base.makespan_days == 0.0) throw ConfigError("compare_plans: baseline makespan is zero");
    std::vector<PlanComparison> out;
    for (const auto& r : rows) {
        PlanComparison c{r.name, r.makespan_days, r.resource_units, 0.0, 0.0};
        c.makespan_improvement_pct = (base.makespan_days - r.makespan_days) / base.makespan_days * 100.0;
        if (base.resource_units != 0)
            c.resource_improvement_pct =
                static_cast<double>(base.resource_units - r.resource_units) / base.resource_units * 100.0;
        out.push_back(std::move(c));
    }
    return out;
}

inline std::string write_comparison(const std::vector<PlanComparison>& table) {
    std::string out = "plan,makespan_days,resource_units,makespan_improvement_pct,resource_improvement_pct\n";
    for (const auto& c : table)
        out += csv_field(c.name) + ',' + format_number(c.makespan_days) + ',' + std::to_string(c.resource_units) + ',' +
               format_number(c.makespan_improvement_pct) + ',' + format_number(c.resource_improvement_pct) + '\n';
    return out;
}

// ---------------------------------------------------------------------------
// JSON specs

namespace detail {

template <class Enum>
Enum parse_enum(const nlohmann::json& v, const std::string& path,
                std::initializer_list<std::pair<const char*, Enum>> names) {
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
        for (const auto& [name, value] : names)
            if (s == name) return value;
    }
    throw ParseError(path + ": unrecognised value " + v.dump());
}

template <class T, class F>
std::vector<T> parse_levels(const nlohmann::json& v, const std::string& path, F convert) {
    if (!v.is_array()) throw ParseError(path + ": expected an array");
    std::vector<T> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(convert(v[k], path + "/" + std::to_string(k)));
    return out;
}

inline double as_double(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path + ": expected a number");
    return v.get<double>();
}

inline std::uint64_t as_seed(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ParseError(path + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline nlohmann::json parse_json_document(std::string_view text) {
    try {
        return nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(msg, line, column);
    }
}

} // namespace detail

/// Missing fields keep their defaults; unknown fields are rejected.
inline SweepSpec parse_sweep_spec(std::string_view text) {
    const auto doc = detail::parse_json_document(text);
    detail::require_keys(doc, "",
                         {"population_sizes", "crossover_probabilities", "mutation_probabilities", "crossovers",
                          "mutations", "policies", "time_limit_ms", "max_generations", "seeds_per_cell", "master_seed",
                          "elite_count", "threads"});
    SweepSpec s;
    if (doc.contains("population_sizes"))
        s.population_sizes = detail::parse_levels<int>(doc["population_sizes"], "/population_sizes", detail::as_int);
    if (doc.contains("crossover_probabilities"))
        s.crossover_probabilities =
            detail::parse_levels<double>(doc["crossover_probabilities"], "/crossover_probabilities", detail::as_double);
    if (doc.contains("mutation_probabilities"))
        s.mutation_probabilities =
            detail::parse_levels<double>(doc["mutation_probabilities"], "/mutation_probabilities", detail::as_double);
    if (doc.contains("crossovers"))
        s.crossovers = detail::parse_levels<CrossoverKind>(doc["crossovers"], "/crossovers", [](const auto& v, const auto& p) {
            return detail::parse_enum<CrossoverKind>(v, p, {{"PMX", CrossoverKind::PMX}, {"PBX", CrossoverKind::PBX}});
        });
    if (doc.contains("mutations"))
        s.mutations = detail::parse_levels<MutationKind>(doc["mutations"], "/mutations", [](const auto& v, const auto& p) {
            return detail::parse_enum<MutationKind>(v, p, {{"SWAP", MutationKind::SWAP}, {"INSERT", MutationKind::INSERT}});
        });
    if (doc.contains("policies"))
        s.policies = detail::parse_levels<Policy>(doc["policies"], "/policies", [](const auto& v, const auto& p) {
            return detail::parse_enum<Policy>(v, p, {{"EST", Policy::EST}, {"WEST", Policy::WEST}});
        });
    auto optional_int64 = [&](const char* key) -> std::optional<std::int64_t> {
        if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
        return detail::as_integer(doc[key], std::string("/") + key);
    };
    if (doc.contains("time_limit_ms")) s.time_limit_ms = optional_int64("time_limit_ms");
    if (doc.contains("max_generations")) {
        auto g = optional_int64("max_generations");
        s.max_generations = g ? std::optional<int>(static_cast<int>(*g)) : std::nullopt;
    }
    if (doc.contains("seeds_per_cell")) s.seeds_per_cell = detail::as_int(doc["seeds_per_cell"], "/seeds_per_cell");
    if (doc.contains("master_seed")) s.master_seed = detail::as_seed(doc["master_seed"], "/master_seed");
    if (doc.contains("elite_count")) s.elite_count = detail::as_int(doc["elite_count"], "/elite_count");
    if (doc.contains("threads")) s.threads = detail::as_int(doc["threads"], "/threads");
    s.validate();
    return s;
}

inline GeneratorSpec parse_generator_spec(std::string_view text) {
    const auto doc = detail::parse_json_document(text);
    detail::require_keys(doc, "",
                         {"name", "activities", "workgroups", "groups", "capacity_min", "capacity_max", "duration_min",
                          "duration_max", "demand_min", "demand_max", "groups_per_activity", "density", "layers",
                          "ticks_per_day", "seed"});
    GeneratorSpec s;
    auto get_int = [&](const char* key, int& out) {
        if (doc.contains(key)) out = detail::as_int(doc[key], std::string("/") + key);
    };
    if (doc.contains("name")) s.name = detail::as_string(doc["name"], "/name");
    get_int("activities", s.activities);
    get_int("workgroups", s.workgroups);
    get_int("groups", s.groups);
    get_int("capacity_min", s.capacity_min);
    get_int("capacity_max", s.capacity_max);
    if (doc.contains("duration_min")) s.duration_min = detail::as_integer(doc["duration_min"], "/duration_min");
    if (doc.contains("duration_max")) s.duration_max = detail::as_integer(doc["duration_max"], "/duration_max");
    get_int("demand_min", s.demand_min);
    get_int("demand_max", s.demand_max);
    get_int("groups_per_activity", s.groups_per_activity);
    get_int("layers", s.layers);
    if (doc.contains("density")) s.density = detail::as_double(doc["density"], "/density");
    if (doc.contains("ticks_per_day")) s.ticks_per_day = detail::as_double(doc["ticks_per_day"], "/ticks_per_day");
    if (doc.contains("seed")) s.seed = detail::as_seed(doc["seed"], "/seed");
    s.validate();
    return s;
}

} // namespace rcpsp
