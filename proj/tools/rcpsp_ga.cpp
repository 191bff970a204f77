// Command-line front end: validate, solve, oracle, sweep, generate, convert.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rcpsp/rcpsp.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kIoError = 1, kValidationError = 2, kConfigError = 3, kSizeCap = 4 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

rcpsp::Instance load_instance(const std::string& path, const std::string& format) {
    const auto text = read_file(path);
    const bool psplib = format == "psplib" || (format == "auto" && fs::path(path).extension() == ".sm");
    if (psplib) return rcpsp::parse_psplib(text, fs::path(path).stem().string());
    return rcpsp::parse_native(text);
}

int eval_threads() {
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("RCPSP_GA_THREADS")) {
        try {
            threads = std::min(threads, std::max(1, std::stoi(env)));
        } catch (const std::exception&) {
            throw rcpsp::ConfigError("RCPSP_GA_THREADS must be a positive integer");
        }
    }
    return threads;
}

struct Options {
    std::string input;
    std::string out_dir;
    std::string output;
    std::string format = "auto";
    std::string policy = "est";
    int pop = 10;
    double pc = 0.7;
    double pm = 0.1;
    std::string crossover = "pmx";
    std::string mutation = "swap";
    int elite = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> time_limit_ms;
    std::optional<int> max_generations;
    bool record_time = false;
    std::string sweep_spec;
    std::string gen_spec;
    std::uint64_t cap = rcpsp::default_visit_cap;
    bool no_convergence = false;
};

rcpsp::Policy parse_policy(const std::string& s) { return s == "west" ? rcpsp::Policy::WEST : rcpsp::Policy::EST; }

rcpsp::GAConfig ga_config(const Options& o) {
    rcpsp::GAConfig c;
    c.population_size = o.pop;
    c.crossover = o.crossover == "pbx" ? rcpsp::CrossoverKind::PBX : rcpsp::CrossoverKind::PMX;
    c.crossover_probability = o.pc;
    c.mutation = o.mutation == "insert" ? rcpsp::MutationKind::INSERT : rcpsp::MutationKind::SWAP;
    c.mutation_probability = o.pm;
    c.policy = parse_policy(o.policy);
    c.elite_count = o.elite;
    c.seed = o.seed.value_or(1);
    c.time_limit_ms = o.time_limit_ms;
    c.max_generations = o.max_generations;
    if (!c.time_limit_ms && !c.max_generations) c.max_generations = 500;
    c.record_time = o.record_time;
    c.eval_threads = eval_threads();
    return c;
}

std::string summary_json(const rcpsp::Project& project, const rcpsp::GAConfig& config, const rcpsp::GAResult& result) {
    using ojson = nlohmann::ordered_json;
    const auto m = rcpsp::metrics(project, result.best_schedule);
    ojson doc;
    doc["instance"] = project.instance().name;
    doc["activities"] = project.size();
    doc["seed"] = config.seed;
    doc["config"] = {{"population_size", config.population_size},
                     {"crossover", rcpsp::to_string(config.crossover)},
                     {"crossover_probability", config.crossover_probability},
                     {"mutation", rcpsp::to_string(config.mutation)},
                     {"mutation_probability", config.mutation_probability},
                     {"policy", rcpsp::to_string(config.policy)},
                     {"elite_count", config.elite_count},
                     {"max_generations", config.max_generations ? ojson(*config.max_generations) : ojson(nullptr)},
                     {"time_limit_ms", config.time_limit_ms ? ojson(*config.time_limit_ms) : ojson(nullptr)}};
    doc["best_makespan_ticks"] = result.best_makespan;
    doc["best_makespan_days"] = result.best_makespan_days;
    doc["cp_length_ticks"] = rcpsp::critical_path(project).length;
    doc["initial_best_ticks"] = result.initial_best;
    doc["generations"] = result.generations;
    doc["metrics"] = {{"peak_demand", m.peak_demand}, {"distinct_units", m.distinct_units}, {"unit_moves", m.unit_moves}};
    doc["best_list"] = result.best_list;
    if (config.timed()) doc["timing"] = {{"wall_time_ms", result.wall_time_ms}, {"time_to_best_ms", result.time_to_best_ms}};
    return doc.dump(2) + "\n";
}

int cmd_validate(const Options& o) {
    rcpsp::Instance inst;
    try {
        inst = load_instance(o.input, o.format);
    } catch (const rcpsp::InvalidInstance& e) {
        std::cout << "invalid: " << e.what() << "\n";
        for (const auto& d : e.details()) std::cout << "  " << d << "\n";
        return kValidationError;
    }
    const rcpsp::Project project(inst);
    std::cout << "valid: " << project.size() << " activities, " << project.group_count() << " resource groups, "
              << inst.precedence.size() << " arcs, critical path " << rcpsp::critical_path(project).length << " ticks\n";
    return kOk;
}

int cmd_solve(const Options& o) {
    const rcpsp::Project project(load_instance(o.input, o.format));
    const auto config = ga_config(o);
    std::cerr << "solving '" << project.instance().name << "' (" << project.size() << " activities, "
              << rcpsp::to_string(config.policy) << ", seed " << config.seed << ")\n";
    const auto result = rcpsp::evolve(project, config, [](const rcpsp::GenerationRecord& r) {
        if (r.generation % 100 == 0) std::cerr << "  generation " << r.generation << " best " << r.best_makespan << "\n";
    });
    const auto summary = summary_json(project, config, result);
    if (!o.out_dir.empty()) {
        const fs::path dir(o.out_dir);
        write_file(dir / "schedule.csv", rcpsp::write_schedule(project, result.best_schedule));
        write_file(dir / "convergence.csv", rcpsp::write_convergence(result.log, project.instance().ticks_per_day));
        write_file(dir / "summary.json", summary);
    }
    std::cout << summary;
    return kOk;
}

int cmd_oracle(const Options& o) {
    const rcpsp::Project project(load_instance(o.input, o.format));
    const auto r = rcpsp::brute_force_optimum(project, parse_policy(o.policy), o.cap);
    std::cout << "optimum " << r.optimum << " ticks, " << r.lists_enumerated << " feasible list"
              << (r.lists_enumerated == 1 ? "" : "s") << "\n";
    std::cout << "list";
    for (int id : r.optimal_list) std::cout << ' ' << id;
    std::cout << "\n";
    return kOk;
}

int cmd_sweep(const Options& o) {
    const rcpsp::Project project(load_instance(o.input, o.format));
    rcpsp::SweepSpec spec = o.sweep_spec.empty() ? rcpsp::SweepSpec{} : rcpsp::parse_sweep_spec(read_file(o.sweep_spec));
    if (o.seed) spec.master_seed = *o.seed;
    if (o.time_limit_ms) spec.time_limit_ms = o.time_limit_ms;
    if (o.max_generations) spec.max_generations = o.max_generations;
    const fs::path dir(o.out_dir);
    const double tpd = project.instance().ticks_per_day;
    std::cerr << "sweep: " << spec.cell_count() * spec.seeds_per_cell << " runs\n";
    const auto rows = rcpsp::run_sweep(project, spec, [&](const rcpsp::SweepRow& row, const rcpsp::GAResult& result) {
        if (!o.no_convergence)
            write_file(dir / "convergence" /
                           ("run_" + std::to_string(row.cell) + "_" + std::to_string(row.seed_index) + ".csv"),
                       rcpsp::write_convergence(result.log, tpd));
    });
    write_file(dir / "sweep_results.csv", rcpsp::write_sweep(rows));
    write_file(dir / "best_settings.csv", rcpsp::write_best_settings(rcpsp::best_settings(rows)));
    std::cerr << "sweep: wrote " << rows.size() << " rows to " << (dir / "sweep_results.csv").string() << "\n";
    return kOk;
}

void emit(const Options& o, const std::string& default_name, const std::string& content) {
    if (!o.output.empty())
        write_file(o.output, content);
    else if (!o.out_dir.empty())
        write_file(fs::path(o.out_dir) / default_name, content);
    else
        std::cout << content;
}

int cmd_generate(const Options& o) {
    auto spec = o.gen_spec.empty() ? rcpsp::GeneratorSpec{} : rcpsp::parse_generator_spec(read_file(o.gen_spec));
    if (o.seed) spec.seed = *o.seed;
    emit(o, spec.name + ".json", rcpsp::serialize_native(rcpsp::generate_instance(spec)));
    return kOk;
}

int cmd_convert(const Options& o) {
    const auto inst = load_instance(o.input, o.format == "auto" ? "psplib" : o.format);
    emit(o, (inst.name.empty() ? std::string("instance") : inst.name) + ".json", rcpsp::serialize_native(inst));
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Genetic-algorithm solver for resource-constrained project scheduling"};
    app.require_subcommand(1);
    Options o;

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--input", o.input, "instance file (native JSON or PSPLIB .sm)")->required();
        sub->add_option("--format", o.format, "input format")->check(CLI::IsMember({"auto", "native", "psplib"}));
    };
    auto add_ga = [&](CLI::App* sub) {
        sub->add_option("--policy", o.policy, "resource-unit allocation policy")->check(CLI::IsMember({"est", "west"}));
        sub->add_option("--pop", o.pop, "population size");
        sub->add_option("--pc", o.pc, "crossover probability");
        sub->add_option("--pm", o.pm, "mutation probability");
        sub->add_option("--crossover", o.crossover, "crossover operator")->check(CLI::IsMember({"pmx", "pbx"}));
        sub->add_option("--mutation", o.mutation, "mutation operator")->check(CLI::IsMember({"swap", "insert"}));
        sub->add_option("--elite", o.elite, "elites carried into each generation");
    };
    auto add_budget = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--time-limit-ms", o.time_limit_ms, "wall-clock limit per run");
        sub->add_option("--max-generations", o.max_generations, "generation cap per run");
    };

    auto* validate = app.add_subcommand("validate", "check an instance and report every violation");
    add_input(validate);

    auto* solve = app.add_subcommand("solve", "run the genetic algorithm on one instance");
    add_input(solve);
    add_ga(solve);
    add_budget(solve);
    solve->add_option("--out-dir", o.out_dir, "directory for schedule.csv, convergence.csv and summary.json");
    solve->add_flag("--record-time", o.record_time, "record wall-clock times without a time limit");

    auto* oracle = app.add_subcommand("oracle", "exhaustive optimum over all feasible activity lists");
    add_input(oracle);
    oracle->add_option("--policy", o.policy, "resource-unit allocation policy")->check(CLI::IsMember({"est", "west"}));
    oracle->add_option("--cap", o.cap, "maximum number of feasible lists to enumerate");

    auto* sweep = app.add_subcommand("sweep", "full-factorial parameter sweep");
    add_input(sweep);
    add_budget(sweep);
    sweep->add_option("--sweep-spec", o.sweep_spec, "sweep specification JSON (defaults to the full design)");
    sweep->add_option("--out-dir", o.out_dir, "output directory")->required();
    sweep->add_flag("--no-convergence", o.no_convergence, "skip per-run convergence CSVs");

    auto* generate = app.add_subcommand("generate", "generate a synthetic layered instance");
    generate->add_option("--gen-spec", o.gen_spec, "generator specification JSON");
    generate->add_option("--seed", o.seed, "generator seed (overrides the spec)");
    auto* gen_out = generate->add_option("--out-dir", o.out_dir, "directory for <name>.json");
    generate->add_option("--output", o.output, "output file")->excludes(gen_out);

    auto* convert = app.add_subcommand("convert", "convert a PSPLIB .sm file to native JSON");
    add_input(convert);
    auto* conv_out = convert->add_option("--out-dir", o.out_dir, "directory for <name>.json");
    convert->add_option("--output", o.output, "output file")->excludes(conv_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*validate) return cmd_validate(o);
        if (*solve) return cmd_solve(o);
        if (*oracle) return cmd_oracle(o);
        if (*sweep) return cmd_sweep(o);
        if (*generate) return cmd_generate(o);
        if (*convert) return cmd_convert(o);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const rcpsp::InvalidInstance& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
        return kValidationError;
    } catch (const rcpsp::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const rcpsp::DegenerateInstance& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const rcpsp::SizeCapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSizeCap;
    } catch (const rcpsp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}
