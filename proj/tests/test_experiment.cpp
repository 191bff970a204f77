#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "rcpsp/experiment.hpp"
#include "test_support.hpp"

using namespace rcpsp;

namespace {

SweepSpec singleton_spec() {
    SweepSpec s;
    s.population_sizes = {6};
    s.crossover_probabilities = {0.8};
    s.mutation_probabilities = {0.1};
    s.crossovers = {CrossoverKind::PMX};
    s.mutations = {MutationKind::SWAP};
    s.policies = {Policy::EST};
    s.time_limit_ms.reset();
    s.max_generations = 5;
    return s;
}

SweepRow row(std::size_t cell, Policy policy, Tick makespan, std::int64_t ms) {
    SweepRow r;
    r.cell = cell;
    r.policy = policy;
    r.best_makespan = makespan;
    r.time_to_best_ms = ms;
    return r;
}

// everything except the wall-clock column
auto stable_fields(const SweepRow& r) {
    return std::tie(r.cell, r.seed_index, r.seed, r.policy, r.population_size, r.crossover_probability, r.crossover,
                    r.mutation_probability, r.mutation, r.best_makespan, r.best_makespan_days, r.generations,
                    r.distinct_units, r.peak_demand, r.unit_moves, r.error);
}

} // namespace

TEST(Generator, CaseShape) {
    GeneratorSpec spec;
    spec.activities = 317;
    spec.workgroups = 5;
    spec.groups = 12;
    spec.seed = 42;
    auto inst = generate_instance(spec);
    EXPECT_EQ(inst.activities.size(), 317u);
    EXPECT_EQ(inst.groups.size(), 12u);
    std::set<std::string> workgroups;
    for (const auto& a : inst.activities) workgroups.insert(a.workgroup);
    EXPECT_EQ(workgroups.size(), 5u);
    EXPECT_TRUE(validate_instance(inst).ok());
    EXPECT_TRUE(test::acyclic_by_toposort(inst));
    EXPECT_EQ(inst, generate_instance(spec));
    spec.seed = 43;
    EXPECT_NE(inst, generate_instance(spec));
}

TEST(Generator, SingleActivity) {
    auto inst = generate_instance({.activities = 1, .seed = 5});
    ASSERT_EQ(inst.activities.size(), 1u);
    EXPECT_EQ(critical_path(Project(inst)).length, inst.activities[0].duration);
}

TEST(Generator, ManySeedsStayValid) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        GeneratorSpec spec{.activities = 1 + static_cast<int>(seed % 40), .workgroups = 1 + static_cast<int>(seed % 7),
                           .groups = 3, .groups_per_activity = 3, .density = (seed % 5) / 4.0, .seed = seed};
        auto inst = generate_instance(spec);
        ASSERT_TRUE(validate_instance(inst).ok()) << seed;
        ASSERT_EQ(static_cast<int>(inst.activities.size()), spec.activities);
        for (const auto& a : inst.activities) {
            ASSERT_GE(a.duration, spec.duration_min);
            ASSERT_LE(a.duration, spec.duration_max);
        }
    }
}

TEST(Generator, RejectsUnsatisfiableSpecs) {
    EXPECT_THROW(generate_instance({.capacity_min = 2, .capacity_max = 6, .demand_min = 3, .demand_max = 4}), ConfigError);
    EXPECT_THROW(generate_instance({.activities = 0}), ConfigError);
    EXPECT_THROW(generate_instance({.groups = 2, .groups_per_activity = 3}), ConfigError);
    EXPECT_THROW(generate_instance({.density = 1.5}), ConfigError);
}

TEST(Sweep, CellCounts) {
    EXPECT_EQ(SweepSpec{}.cell_count(), 360u);
    Project p(generate_instance({.activities = 8, .seed = 1}));
    EXPECT_EQ(run_sweep(p, singleton_spec()).size(), 1u);
    auto two = singleton_spec();
    two.population_sizes = {4, 8};
    two.seeds_per_cell = 2;
    auto rows = run_sweep(p, two);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].population_size, 4);
    EXPECT_EQ(rows[2].population_size, 8);
    EXPECT_NE(rows[0].seed, rows[1].seed);
}

TEST(Sweep, CellDecoding) {
    SweepSpec spec;
    std::set<std::tuple<int, int, int, int, int, int>> seen;
    for (std::size_t cell = 0; cell < spec.cell_count(); ++cell) {
        auto c = cell_config(spec, cell, 0);
        seen.insert({c.population_size, static_cast<int>(c.crossover_probability * 10),
                     static_cast<int>(c.mutation_probability * 100), static_cast<int>(c.crossover),
                     static_cast<int>(c.mutation), static_cast<int>(c.policy)});
        EXPECT_EQ(c.time_limit_ms, spec.time_limit_ms);
    }
    EXPECT_EQ(seen.size(), 360u);
    EXPECT_EQ(cell_config(spec, 0, 0).policy, Policy::EST);
    EXPECT_EQ(cell_config(spec, 359, 0).policy, Policy::WEST);
}

TEST(Sweep, RowsReproducibleAndOrdered) {
    Project p(generate_instance({.activities = 20, .seed = 2}));
    auto spec = singleton_spec();
    spec.population_sizes = {5, 10};
    spec.mutations = {MutationKind::SWAP, MutationKind::INSERT};
    spec.policies = {Policy::EST, Policy::WEST};
    spec.max_generations = 15;
    spec.seeds_per_cell = 2;
    auto rows = run_sweep(p, spec);
    spec.threads = 3;
    auto threaded = run_sweep(p, spec);
    ASSERT_EQ(rows.size(), 16u);
    const Tick cp = critical_path(p).length;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(stable_fields(rows[k]), stable_fields(threaded[k]));
        EXPECT_TRUE(rows[k].error.empty());
        EXPECT_GE(rows[k].best_makespan, cp);
        auto again = run_cell(p, cell_config(spec, rows[k].cell, rows[k].seed_index), rows[k].cell, rows[k].seed_index);
        EXPECT_EQ(stable_fields(again), stable_fields(rows[k]));
    }
}

TEST(Sweep, FailuresAreRecorded) {
    Project p(test::independent({0, 0}));
    auto rows = run_sweep(p, singleton_spec());
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NE(rows[0].error.find("degenerate"), std::string::npos);
    EXPECT_NE(write_sweep(rows).find("degenerate"), std::string::npos);
}

TEST(Sweep, ObserverSeesEveryRun) {
    Project p(generate_instance({.activities = 10, .seed = 3}));
    auto spec = singleton_spec();
    spec.population_sizes = {4, 6, 8};
    int calls = 0;
    run_sweep(p, spec, [&](const SweepRow& r, const GAResult& g) {
        ++calls;
        EXPECT_EQ(static_cast<int>(g.log.size()), r.generations);
    });
    EXPECT_EQ(calls, 3);
}

TEST(SweepSpecValidation, Rejects) {
    auto empty = SweepSpec{};
    empty.crossovers.clear();
    EXPECT_THROW(empty.validate(), ConfigError);
    auto zero = SweepSpec{};
    zero.time_limit_ms = 0;
    EXPECT_THROW(zero.validate(), ConfigError);
    auto none = SweepSpec{};
    none.time_limit_ms.reset();
    EXPECT_THROW(none.validate(), ConfigError);
}

TEST(BestSettings, MinMakespanThenMinTime) {
    std::vector<SweepRow> rows{row(0, Policy::EST, 33, 10), row(1, Policy::EST, 33, 5), row(2, Policy::EST, 34, 1)};
    auto table = best_settings(rows);
    ASSERT_EQ(table.size(), 1u);
    ASSERT_EQ(table[0].rows.size(), 2u);
    EXPECT_EQ(table[0].rows.front().cell, 1u);
    EXPECT_EQ(table[0].rows[1].cell, 0u);

    auto single = best_settings({row(7, Policy::WEST, 40, 3)});
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].policy, Policy::WEST);
    EXPECT_EQ(single[0].rows.front().cell, 7u);
}

TEST(BestSettings, PerPolicyAndPermutationInvariant) {
    std::mt19937_64 rng(71);
    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < 40; ++k)
        rows.push_back(row(k, k % 2 ? Policy::WEST : Policy::EST, 30 + static_cast<Tick>(rng() % 4),
                           static_cast<std::int64_t>(rng() % 5)));
    const auto expected = write_best_settings(best_settings(rows));
    auto table = best_settings(rows);
    ASSERT_EQ(table.size(), 2u);
    for (const auto& entry : table) {
        Tick best = 1000;
        for (const auto& r : rows)
            if (r.policy == entry.policy) best = std::min(best, r.best_makespan);
        for (const auto& r : entry.rows) {
            EXPECT_EQ(r.best_makespan, best);
            EXPECT_EQ(r.policy, entry.policy);
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(rows.begin(), rows.end(), rng);
        EXPECT_EQ(write_best_settings(best_settings(rows)), expected);
    }
}

TEST(ComparePlans, CaseStudyNumbers) {
    auto table = compare_plans({{"master plan", 44.420, 130}, {"GA EST", 32.995, 115}});
    EXPECT_NEAR(table[1].makespan_improvement_pct, 25.7, 0.05);
    EXPECT_NEAR(table[1].resource_improvement_pct, 100.0 * 15 / 130, 1e-9);
    EXPECT_DOUBLE_EQ(table[0].makespan_improvement_pct, 0.0);
    auto other = compare_plans({{"master plan", 47.0, 130}, {"GA EST", 32.995, 115}});
    EXPECT_NEAR(other[1].makespan_improvement_pct, 29.8, 0.05);
    auto same = compare_plans({{"a", 10.0, 3}, {"b", 10.0, 3}});
    EXPECT_DOUBLE_EQ(same[1].makespan_improvement_pct, 0.0);
    EXPECT_DOUBLE_EQ(same[1].resource_improvement_pct, 0.0);
    EXPECT_THROW(compare_plans({{"zero", 0.0, 1}, {"b", 1.0, 1}}), ConfigError);
    EXPECT_THROW(compare_plans({{"only", 1.0, 1}}), ConfigError);
    EXPECT_EQ(write_comparison(same), "plan,makespan_days,resource_units,makespan_improvement_pct,resource_improvement_pct\n"
                                      "a,10,3,0,0\nb,10,3,0,0\n");
}

TEST(Specs, ParseSweepSpec) {
    auto s = parse_sweep_spec(R"({"population_sizes": [4, 8], "crossovers": ["pbx"], "policies": ["west", "EST"],
                                  "time_limit_ms": null, "max_generations": 12, "seeds_per_cell": 3})");
    EXPECT_EQ(s.population_sizes, (std::vector<int>{4, 8}));
    EXPECT_EQ(s.crossovers, std::vector<CrossoverKind>{CrossoverKind::PBX});
    EXPECT_EQ(s.policies, (std::vector<Policy>{Policy::WEST, Policy::EST}));
    EXPECT_FALSE(s.time_limit_ms);
    EXPECT_EQ(s.max_generations, 12);
    EXPECT_EQ(s.cell_count(), 2u * 3 * 3 * 1 * 2 * 2);
    EXPECT_EQ(parse_sweep_spec("{}").cell_count(), 360u);
    EXPECT_THROW(parse_sweep_spec(R"({"pop": [4]})"), ParseError);
    EXPECT_THROW(parse_sweep_spec(R"({"mutations": ["flip"]})"), ParseError);
    EXPECT_THROW(parse_sweep_spec(R"({"population_sizes": []})"), ConfigError);
    EXPECT_THROW(parse_sweep_spec("{"), ParseError);
}

TEST(Specs, ParseGeneratorSpec) {
    auto g = parse_generator_spec(R"({"activities": 317, "workgroups": 5, "groups": 12, "seed": 42})");
    EXPECT_EQ(g.activities, 317);
    EXPECT_EQ(g.seed, 42u);
    EXPECT_EQ(generate_instance(g), generate_instance({.activities = 317, .workgroups = 5, .groups = 12, .seed = 42}));
    EXPECT_THROW(parse_generator_spec(R"({"activity": 3})"), ParseError);
    EXPECT_THROW(parse_generator_spec(R"({"demand_min": 9})"), ConfigError);
}
