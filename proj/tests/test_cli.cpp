#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "rcpsp/instance_io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = RCPSP_CLI;
const std::string kData = RCPSP_TEST_DATA;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("rcpsp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
                std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Invocation run(const std::string& args) {
        const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
        const std::string cmd = "RCPSP_GA_THREADS=2 '" + kCli + "' " + args + " > '" + out.string() + "' 2> '" +
                                err.string() + "'";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }

    std::string data(const std::string& file) const { return "'" + kData + "/" + file + "'"; }
    std::string at(const std::string& sub) const { return "'" + (dir_ / sub).string() + "'"; }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, SolveT1) {
    auto r = run("solve --input " + data("t1.json") + " --out-dir " + at("out"));
    ASSERT_EQ(r.code, 0) << r.err;
    auto summary = nlohmann::json::parse(slurp(dir_ / "out/summary.json"));
    EXPECT_EQ(summary["best_makespan_ticks"], 6);
    EXPECT_EQ(summary["best_makespan_days"], 6.0);
    EXPECT_EQ(summary["seed"], 1);
    EXPECT_EQ(summary["config"]["population_size"], 10);
    EXPECT_EQ(summary["config"]["crossover"], "PMX");
    EXPECT_EQ(summary["config"]["policy"], "EST");
    EXPECT_EQ(r.out, slurp(dir_ / "out/summary.json"));
    EXPECT_TRUE(fs::exists(dir_ / "out/schedule.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out/convergence.csv"));
    EXPECT_NE(r.err.find("solving"), std::string::npos);
}

TEST_F(Cli, PoliciesAgreeOnMakespan) {
    auto est = run("solve --input " + data("t2.json") + " --policy est --seed 9 --out-dir " + at("est"));
    auto west = run("solve --input " + data("t2.json") + " --policy west --seed 9 --out-dir " + at("west"));
    ASSERT_EQ(est.code, 0);
    ASSERT_EQ(west.code, 0);
    auto a = nlohmann::json::parse(est.out), b = nlohmann::json::parse(west.out);
    EXPECT_EQ(a["best_makespan_ticks"], b["best_makespan_ticks"]);
    EXPECT_EQ(a["best_makespan_ticks"], 4);
    EXPECT_EQ(a["metrics"]["unit_moves"], 1);
    EXPECT_EQ(b["metrics"]["unit_moves"], 0);
}

TEST_F(Cli, SolveIsByteDeterministic) {
    const std::string args = "solve --input " + data("t1.json") + " --pop 8 --crossover pbx --mutation insert --seed 5 "
                                                                  "--max-generations 40 --out-dir ";
    ASSERT_EQ(run(args + at("a")).code, 0);
    ASSERT_EQ(run(args + at("b")).code, 0);
    for (const char* f : {"schedule.csv", "convergence.csv", "summary.json"})
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a/schedule.csv"), slurp(kData + "/t1_est_schedule.csv"));
}

TEST_F(Cli, ExitCodes) {
    auto missing = run("solve --input " + at("nope.json"));
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("cannot open"), std::string::npos);
    EXPECT_TRUE(missing.out.empty());

    EXPECT_EQ(run("solve --input " + data("cycle.json")).code, 2);
    EXPECT_EQ(run("solve --input " + data("syntax_error.json")).code, 2);
    EXPECT_EQ(run("solve --input " + data("t1.json") + " --pop 1").code, 3);
    EXPECT_EQ(run("solve --input " + data("t1.json") + " --bogus").code, 3);
    EXPECT_EQ(run("solve --input " + data("t1.json") + " --policy fastest").code, 3);
    EXPECT_EQ(run("solve").code, 3);
    EXPECT_EQ(run("").code, 3);
}

TEST_F(Cli, Oracle) {
    auto t1 = run("oracle --input " + data("t1.json"));
    ASSERT_EQ(t1.code, 0) << t1.err;
    EXPECT_EQ(t1.out, slurp(kData + "/t1_oracle.txt"));
    auto chain = run("oracle --input " + data("chain3.json"));
    EXPECT_EQ(chain.out.substr(0, chain.out.find('\n')), "optimum 3 ticks, 1 feasible list");
    auto big = run("oracle --input " + data("independent12.json"));
    EXPECT_EQ(big.code, 4);
    EXPECT_NE(big.err.find("10000000"), std::string::npos) << big.err;
    EXPECT_EQ(run("oracle --input " + data("chain3.json") + " --cap 0").code, 4);
}

TEST_F(Cli, Validate) {
    auto ok = run("validate --input " + data("t1.json"));
    EXPECT_EQ(ok.code, 0);
    EXPECT_EQ(ok.out, slurp(kData + "/t1_validate.txt"));
    auto cyclic = run("validate --input " + data("cycle.json"));
    EXPECT_EQ(cyclic.code, 2);
    EXPECT_NE(cyclic.out.find("cycle"), std::string::npos);
    EXPECT_NE(cyclic.out.find("{1, 2, 3}"), std::string::npos) << cyclic.out;
    EXPECT_EQ(run("validate --input " + data("negative_duration.json")).code, 2);
    EXPECT_EQ(run("validate --input " + data("truncated.sm")).code, 2);
}

TEST_F(Cli, ConvertRoundTrip) {
    auto r = run("convert --input " + data("mini.sm") + " --output " + at("mini.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    auto inst = rcpsp::parse_native(slurp(dir_ / "mini.json"));
    EXPECT_EQ(inst, rcpsp::parse_psplib(slurp(kData + "/mini.sm"), "mini"));
    auto v = run("validate --input " + at("mini.json"));
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("6 activities"), std::string::npos);
    ASSERT_EQ(run("convert --input " + data("mini.sm") + " --out-dir " + at("conv")).code, 0);
    EXPECT_TRUE(fs::exists(dir_ / "conv/mini.json"));
    EXPECT_EQ(run("convert --input " + data("mini.sm") + " --out-dir " + at("x") + " --output " + at("y")).code, 3);
}

TEST_F(Cli, Generate) {
    {
        std::ofstream spec(dir_ / "gen.json");
        spec << R"({"name": "case", "activities": 317, "workgroups": 5, "groups": 12, "seed": 42})";
    }
    ASSERT_EQ(run("generate --gen-spec " + at("gen.json") + " --out-dir " + at("g")).code, 0);
    auto inst = rcpsp::parse_native(slurp(dir_ / "g/case.json"));
    EXPECT_EQ(inst.activities.size(), 317u);
    EXPECT_EQ(inst.groups.size(), 12u);
    auto stdout_copy = run("generate --gen-spec " + at("gen.json"));
    EXPECT_EQ(stdout_copy.out, slurp(dir_ / "g/case.json"));
    EXPECT_NE(run("generate --gen-spec " + at("gen.json") + " --seed 7").out, stdout_copy.out);
    std::ofstream(dir_ / "bad.json") << R"({"demand_min": 9})";
    EXPECT_EQ(run("generate --gen-spec " + at("bad.json")).code, 3);
}

TEST_F(Cli, SmallSweep) {
    {
        std::ofstream spec(dir_ / "sweep.json");
        spec << R"({"population_sizes": [4, 6], "crossover_probabilities": [0.8], "mutation_probabilities": [0.1],
                    "crossovers": ["pmx"], "mutations": ["swap", "insert"], "policies": ["est", "west"],
                    "time_limit_ms": null, "max_generations": 10})";
    }
    auto r = run("sweep --input " + data("t2.json") + " --sweep-spec " + at("sweep.json") + " --out-dir " + at("s"));
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream rows(slurp(dir_ / "s/sweep_results.csv"));
    int lines = 0;
    for (std::string line; std::getline(rows, line);) ++lines;
    EXPECT_EQ(lines, 1 + 8);
    EXPECT_TRUE(fs::exists(dir_ / "s/best_settings.csv"));
    int logs = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_ / "s/convergence")) ++logs;
    EXPECT_EQ(logs, 8);

    ASSERT_EQ(run("sweep --no-convergence --input " + data("t2.json") + " --sweep-spec " + at("sweep.json") +
                  " --out-dir " + at("t"))
                  .code,
              0);
    EXPECT_FALSE(fs::exists(dir_ / "t/convergence"));
    EXPECT_EQ(run("sweep --input " + data("t2.json") + " --out-dir " + at("u") + " --sweep-spec " + at("missing.json"))
                  .code,
              1);
}

TEST_F(Cli, HelpListsEveryFlag) {
    std::string all;
    for (const char* sub : {"validate", "solve", "oracle", "sweep", "generate", "convert"}) {
        auto r = run(std::string(sub) + " --help");
        EXPECT_EQ(r.code, 0);
        all += r.out;
    }
    for (const char* flag : {"--input", "--out-dir", "--format", "--policy", "--pop", "--pc", "--pm", "--crossover",
                             "--mutation", "--elite", "--seed", "--time-limit-ms", "--max-generations", "--sweep-spec",
                             "--gen-spec", "--cap", "--output", "--record-time", "--no-convergence"})
        EXPECT_NE(all.find(flag), std::string::npos) << flag;
    auto top = run("--help");
    EXPECT_EQ(top.code, 0);
    for (const char* sub : {"validate", "solve", "oracle", "sweep", "generate", "convert"})
        EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
}
