#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rcpsp/error.hpp"
#include "rcpsp/operators.hpp"
#include "rcpsp/population.hpp"
#include "rcpsp/project_model.hpp"
#include "rcpsp/random.hpp"
#include "rcpsp/schedule.hpp"

namespace rcpsp {

enum class CrossoverKind { PMX, PBX };
enum class MutationKind { SWAP, INSERT };

inline const char* to_string(CrossoverKind k) { return k == CrossoverKind::PMX ? "PMX" : "PBX"; }
inline const char* to_string(MutationKind k) { return k == MutationKind::SWAP ? "SWAP" : "INSERT"; }

/// Defaults are the best EST setting reported for the case study
/// (Ps=10, Pc=0.7, PMX, Pm=0.1, SWAP).
struct GAConfig {
    int population_size = 10;
    CrossoverKind crossover = CrossoverKind::PMX;
    double crossover_probability = 0.7;
    MutationKind mutation = MutationKind::SWAP;
    double mutation_probability = 0.1;
    Policy policy = Policy::EST;
    int elite_count = 1;
    std::optional<std::int64_t> time_limit_ms;
    std::optional<int> max_generations;
    std::uint64_t seed = 1;
    /// Measure wall-clock time for the convergence log even without a time limit.
    /// With no time limit and this off, elapsed values are reported as 0 and a run
    /// is fully reproducible.
    bool record_time = false;
    /// Upper bound on concurrent fitness evaluations.
    int eval_threads = 1;

    bool timed() const { return record_time || time_limit_ms.has_value(); }

    void validate() const {
        if (population_size < 2) throw ConfigError("population size must be at least 2");
        if (elite_count < 1 || elite_count >= population_size)
            throw ConfigError("elite count must be in [1, population size)");
        if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
            throw ConfigError("crossover probability must be in [0, 1]");
        if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
            throw ConfigError("mutation probability must be in [0, 1]");
        if (!time_limit_ms && !max_generations) throw ConfigError("a time limit or a generation cap is required");
        if (time_limit_ms && *time_limit_ms <= 0) throw ConfigError("time limit must be positive");
        if (max_generations && *max_generations < 1) throw ConfigError("generation cap must be at least 1");
        if (eval_threads < 1) throw ConfigError("evaluation thread count must be at least 1");
    }
};

struct GenerationRecord {
    int generation = 0;
    Tick best_makespan = 0;
    double mean_makespan = 0.0;
    std::int64_t elapsed_ms = 0;

    bool operator==(const GenerationRecord&) const = default;
};

using ConvergenceLog = std::vector<GenerationRecord>;
using LogSink = std::function<void(const GenerationRecord&)>;

struct GAResult {
    ActivityList best_list;
    Tick best_makespan = 0;
    double best_makespan_days = 0.0;
    Schedule best_schedule;
    /// best fitness of the initial (dispatching-rule) population
    Tick initial_best = 0;
    int generations = 0;
    std::int64_t wall_time_ms = 0;
    /// elapsed time at the generation where the final best first appeared
    std::int64_t time_to_best_ms = 0;
    ConvergenceLog log;
};

/// Probability gate for crossover and mutation: the operator fires when the
/// uniform draw is below the probability.
inline bool passes_gate(double draw, double probability) { return draw < probability; }

namespace detail {

struct ListHash {
    std::size_t operator()(const ActivityList& list) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int g : list) h = mix_seed(h ^ static_cast<std::uint32_t>(g));
        return static_cast<std::size_t>(h);
    }
};

/// Fitness evaluation with a memo keyed by gene sequence (the policy is fixed per
/// evaluator). Cache misses of a batch may be decoded on several threads.
class Evaluator {
public:
    Evaluator(const Project& project, Policy policy, int threads)
        : project_(project), policy_(policy), threads_(threads),
          max_entries_(std::max<std::size_t>(1024, (std::size_t{8} << 20) / std::max(1, project.size()))) {}

    void evaluate(std::vector<Member>& batch) {
        std::vector<std::size_t> pending;
        for (std::size_t k = 0; k < batch.size(); ++k) {
            auto it = cache_.find(batch[k].genes);
            if (it != cache_.end())
                batch[k].fitness = it->second;
            else
                pending.push_back(k);
        }
        auto run = [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) {
                auto& m = batch[pending[j]];
                m.fitness = fitness(project_, m.genes, policy_);
            }
        };
        const std::size_t workers = std::min<std::size_t>(threads_, pending.size() / 2);
        if (workers <= 1) {
            run(0, pending.size());
        } else {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (pending.size() + workers - 1) / workers;
            for (std::size_t w = 0; w < workers; ++w) {
                const std::size_t begin = w * chunk, end = std::min(pending.size(), begin + chunk);
                if (begin < end) pool.emplace_back(run, begin, end);
            }
        }
        if (cache_.size() + pending.size() > max_entries_) cache_.clear();
        for (auto k : pending) cache_.emplace(batch[k].genes, batch[k].fitness);
        evaluations_ += pending.size();
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    const Project& project_;
    Policy policy_;
    std::size_t threads_;
    std::size_t max_entries_;
    std::size_t evaluations_ = 0;
    std::unordered_map<ActivityList, Tick, ListHash> cache_;
};

inline GenerationRecord summarize(const Population& pop, std::int64_t elapsed_ms) {
    GenerationRecord r;
    r.generation = pop.generation;
    r.best_makespan = std::numeric_limits<Tick>::max();
    double sum = 0.0;
    for (const auto& m : pop.members) {
        r.best_makespan = std::min(r.best_makespan, m.fitness);
        sum += static_cast<double>(m.fitness);
    }
    r.mean_makespan = sum / static_cast<double>(pop.members.size());
    r.elapsed_ms = elapsed_ms;
    return r;
}

} // namespace detail

/// Initial population of `config.population_size` evaluated dispatching-rule lists.
inline Population generate_initial_population(const Project& project, const GAConfig& config, Rng& rng) {
    Population pop;
    pop.members = initial_members(project, config.population_size, rng);
    detail::Evaluator(project, config.policy, config.eval_threads).evaluate(pop.members);
    return pop;
}

/// Applies the configured crossover with random cut points / position set.
inline std::pair<ActivityList, ActivityList> random_crossover(CrossoverKind kind, const ActivityList& p1,
                                                              const ActivityList& p2, Rng& rng) {
    const std::size_t n = p1.size();
    if (n < 2) return {p1, p2};
    if (kind == CrossoverKind::PMX) {
        // two distinct boundaries out of 0..n
        std::size_t a = rng.below(n + 1), b;
        do {
            b = rng.below(n + 1);
        } while (b == a);
        return pmx(p1, p2, std::min(a, b), std::max(a, b));
    }
    std::vector<std::size_t> positions;
    do {
        positions.clear();
        for (std::size_t k = 0; k < n; ++k)
            if (rng.coin()) positions.push_back(k);
    } while (positions.empty() || positions.size() == n);
    return pbx(p1, p2, positions);
}

inline ActivityList random_mutation(MutationKind kind, ActivityList list, Rng& rng) {
    const std::size_t n = list.size();
    if (n < 2) return list;
    std::size_t i = rng.below(n), j;
    do {
        j = rng.below(n);
    } while (j == i);
    return kind == MutationKind::SWAP ? swap_mutate(std::move(list), i, j) : insert_mutate(std::move(list), i, j);
}

/// Runs the genetic algorithm until the time limit or the generation cap is hit.
///
/// Each generation keeps `elite_count` elites, then fills the population with
/// offspring of roulette-selected parent pairs: crossover gated once per pair by
/// Pc, mutation gated per offspring by Pm, every offspring repaired to precedence
/// feasibility before evaluation. All random draws happen before evaluation, so
/// the evaluation thread count never changes the result.
inline GAResult evolve(const Project& project, const GAConfig& config, const LogSink& sink = {}) {
    config.validate();
    if (project.total_duration() == 0) throw DegenerateInstance("degenerate zero-makespan instance");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&]() -> std::int64_t {
        if (!config.timed()) return 0;
        return std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();
    };

    Rng rng(config.seed);
    detail::Evaluator evaluator(project, config.policy, config.eval_threads);
    Population pop;
    pop.members = initial_members(project, config.population_size, rng);
    evaluator.evaluate(pop.members);

    GAResult result;
    auto best_it = std::min_element(pop.members.begin(), pop.members.end(),
                                    [](const Member& a, const Member& b) { return a.fitness < b.fitness; });
    Member best = *best_it;
    result.initial_best = best.fitness;

    const std::size_t ps = static_cast<std::size_t>(config.population_size);
    const std::size_t elites = static_cast<std::size_t>(config.elite_count);
    for (;;) {
        if (config.max_generations && pop.generation >= *config.max_generations) break;
        if (config.time_limit_ms && pop.generation > 0 && elapsed() >= *config.time_limit_ms) break;

        Population next;
        next.generation = pop.generation + 1;
        next.members = elite(pop, elites);
        for (auto& m : next.members) m.origin.reset();

        const auto bounds = cumulative(selection_probabilities(fitnesses(pop)));
        std::vector<Member> offspring;
        offspring.reserve(ps - elites + 1);
        while (offspring.size() < ps - elites) {
            const auto& p1 = pop.members[roulette_index(bounds, rng.uniform())].genes;
            const auto& p2 = pop.members[roulette_index(bounds, rng.uniform())].genes;
            ActivityList c1, c2;
            if (passes_gate(rng.uniform(), config.crossover_probability)) {
                std::tie(c1, c2) = random_crossover(config.crossover, p1, p2, rng);
            } else {
                c1 = p1;
                c2 = p2;
            }
            for (auto* child : {&c1, &c2}) {
                if (passes_gate(rng.uniform(), config.mutation_probability))
                    *child = random_mutation(config.mutation, std::move(*child), rng);
                offspring.push_back({repair(project, *child), 0, std::nullopt});
            }
        }
        offspring.resize(ps - elites);
        evaluator.evaluate(offspring);
        for (auto& m : offspring) next.members.push_back(std::move(m));
        pop = std::move(next);

        const auto record = detail::summarize(pop, elapsed());
        for (const auto& m : pop.members)
            if (m.fitness < best.fitness) {
                best = m;
                result.time_to_best_ms = record.elapsed_ms;
            }
        result.log.push_back(record);
        if (sink) sink(record);
    }

    result.best_list = best.genes;
    result.best_makespan = best.fitness;
    result.best_makespan_days = project.instance().to_days(best.fitness);
    result.best_schedule = serial_sgs(project, best.genes, config.policy);
    result.generations = pop.generation;
    result.wall_time_ms = elapsed();
    return result;
}

} // namespace rcpsp
