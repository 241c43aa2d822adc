#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "asmc/config.hpp"
#include "asmc/errors.hpp"
#include "asmc/harness.hpp"
#include "asmc/outputs.hpp"

using namespace asmc;
namespace fs = std::filesystem;

namespace {

// Small, fast configuration; the full-size runs live in the acceptance binary.
const char* kSmall = R"({
  "brain": {"n_per_area": 300, "k": 30},
  "table": {"rows": 400},
  "formation": {"rounds": 8},
  "schedule": {"ramp_steps": 4, "warmup_cap": 3},
  "validation": {"cf_units": 200},
  "robustness": {"seeds": [0, 1], "separations": [15, 10]}
})";

RunConfig small() { return parse_config(kSmall); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("asmc_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ASMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, Defaults) {
    const auto c = parse_config("{}");
    EXPECT_EQ(c.brain.n_per_area, 1000u);
    EXPECT_EQ(c.brain.k, 100u);
    EXPECT_EQ(c.schedule.mode, ScheduleMode::adaptive_soft);
    EXPECT_EQ(c.schedule.warm_beta, 0.09);
    EXPECT_EQ(c.schedule.max_beta, 0.16);
    EXPECT_EQ(c.schedule.ramp_steps, 20u);
    EXPECT_EQ(c.encoder.rate.p_positive, 0.30);
    EXPECT_EQ(c.encoder.rate.p_negative, 0.02);
    EXPECT_EQ(c.readout.ratio_threshold, 1.05);
    EXPECT_FALSE(c.readout.k.has_value());
    EXPECT_EQ(c.builtin, "alzheimer");
    EXPECT_EQ(config_to_json(c), config_to_json(RunConfig{}));
}

TEST(Config, RoundTripThroughJson) {
    const auto c = small();
    EXPECT_EQ(config_to_json(parse_config(config_to_json(c))), config_to_json(c));
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config(R"({"bogus": 1})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"brain": {"n": 5}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"seed": "x"})"), ConfigError);
    EXPECT_THROW(parse_config("{"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schedule": {"mode": "fast"}})"), ConfigError);
    EXPECT_THROW(
        {
            auto c = parse_config(R"({"readout": {"k": 0}})");
            c.validate();
        },
        ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, HashIgnoresSeedAndThreads) {
    auto a = small();
    auto b = a;
    b.seed = 17;
    b.threads = 4;
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(run_id(a), run_id(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.brain.k = 31;
    EXPECT_NE(config_hash(a), config_hash(b));
    // FNV-1a reference values
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
    const auto dir = scratch("cfgdir");
    std::ofstream(dir / "c.json") << R"({"scm": {"spec": "spec.json"}})";
    const auto c = load_config(dir / "c.json");
    EXPECT_EQ(c.spec_path, dir / "spec.json");
}

TEST(Folds, PartitionCoversEveryRowOnce) {
    for (std::size_t rows : {10u, 101u, 2000u})
        for (std::size_t n : {2u, 5u, 10u}) {
            const auto f = fold_partition(rows, n, 3);
            ASSERT_EQ(f.size(), n);
            std::multiset<std::size_t> all;
            for (const auto& fold : f) {
                EXPECT_TRUE(fold.size() == rows / n || fold.size() == rows / n + 1);
                all.insert(fold.begin(), fold.end());
            }
            EXPECT_EQ(all.size(), rows);
            std::size_t i = 0;
            for (std::size_t r : all) EXPECT_EQ(r, i++);
            EXPECT_EQ(f, fold_partition(rows, n, 3));
        }
    EXPECT_NE(fold_partition(100, 5, 1), fold_partition(100, 5, 2));
    EXPECT_EQ(fold_partition(5, 5, 0).size(), 5u);
    EXPECT_THROW(fold_partition(4, 5, 0), ConfigError);
    EXPECT_THROW(fold_partition(10, 1, 0), ConfigError);
}

TEST(Pipeline, StagesOutOfOrder) {
    Pipeline p(small());
    EXPECT_THROW(p.bind(), StageError);
    p.ingest();
    p.encode();
    try {
        p.read_out();
        FAIL() << "read_out before form must fail";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "readout");
    }
}

TEST(Pipeline, ConfigErrorsPassThrough) {
    auto c = small();
    c.links = {{"Tau", "Amyloid"}};
    Pipeline p(c);
    p.ingest();
    p.encode();
    p.form();
    EXPECT_THROW(p.bind(), ConfigError);
    auto d = small();
    d.builtin = "none";
    EXPECT_THROW(Pipeline(d).ingest(), ConfigError);
}

TEST(Pipeline, ReportMetricsRecomputable) {
    const auto r = run_single(small());
    ASSERT_TRUE(r.synaptic && r.propagation);
    for (const auto* t : {&*r.synaptic, &*r.propagation}) {
        EXPECT_EQ(t->k, 12u);
        EXPECT_EQ(t->ranked.size(), 90u);
        const auto again = rank_and_select(t->ranked, 12, 1.05, r.truth);
        EXPECT_EQ(again.tp, t->tp);
        EXPECT_EQ(again.fp, t->fp);
        if (t->selected.size() == 12) EXPECT_EQ(t->precision, t->recall);
    }
    EXPECT_EQ(r.truth_dprop().size(), 12u);
    EXPECT_EQ(r.validation.size(), 12u);
    EXPECT_EQ(r.config_hash, config_hash(small()));
}

TEST(Outputs, FilesAndDeterminism) {
    const auto cfg = small();
    const auto dir = scratch("out");
    const auto a = run_single(cfg);
    emit_outputs(a, dir);
    for (const char* f : {"ranked_pairs.csv", "binding_trajectory.csv", "stability_heatmap.csv",
                          "robustness_summary.csv"}) {
        ASSERT_TRUE(fs::exists(dir / f)) << f;
        EXPECT_EQ(first_line(dir / f), "# config_hash: " + a.config_hash) << f;
    }
    ASSERT_TRUE(fs::exists(dir / "report.json"));
    EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 5);

    auto doc_a = report_json(a);
    auto doc_b = report_json(run_single(cfg));
    EXPECT_EQ(doc_a["config_hash"], a.config_hash);
    doc_a.erase("runtime_ms");
    doc_b.erase("runtime_ms");
    EXPECT_EQ(doc_a.dump(), doc_b.dump());
}

TEST(Outputs, UnwritableDirectory) {
    const auto dir = scratch("blocked");
    std::ofstream(dir / "file") << "x";
    RunReport r;
    try {
        emit_outputs(r, dir / "file" / "sub");
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "output");
    }
}

TEST(Robustness, ConditionsExpand) {
    auto c = small();
    c.robustness.protocols = {"R3", "R1", "R2"};
    const auto conds = robustness_conditions(c);
    std::vector<std::string> labels;
    for (const auto& x : conds) labels.push_back(x.label);
    EXPECT_EQ(labels, (std::vector<std::string>{"R3_15x", "R3_10x", "R1_source", "R2_binding"}));
    EXPECT_EQ(conds[1].config.encoder.separation, 10.0);
    EXPECT_EQ(conds[2].config.encoder.seed_offset, 1000u);
    EXPECT_EQ(conds[3].config.bind_jitter, 0.2);
}

TEST(Robustness, AggregationMatchesRecomputation) {
    const auto c = small();
    const auto conds = robustness_conditions(c);
    const std::vector<std::uint64_t> seeds = {0, 1};
    const auto one = run_grid(conds, seeds, 1, config_hash(c));
    const auto two = run_grid(conds, seeds, 2, config_hash(c));
    ASSERT_EQ(one.runs.size(), 4u);
    ASSERT_EQ(two.runs.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(one.runs[i].condition, two.runs[i].condition);
        EXPECT_EQ(one.runs[i].seed, two.runs[i].seed);
        EXPECT_EQ(one.runs[i].tp, two.runs[i].tp);
        EXPECT_EQ(one.runs[i].dprop_mean, two.runs[i].dprop_mean);
    }
    // direct recomputation from freshly run reports
    for (const auto& cs : one.conditions) {
        const auto cond = std::find_if(conds.begin(), conds.end(), [&](const Condition& x) { return x.label == cs.condition; });
        ASSERT_NE(cond, conds.end());
        std::vector<double> d;
        double tp = 0, fp = 0;
        for (std::uint64_t s : seeds) {
            auto rc = cond->config;
            rc.seed = s;
            const auto rep = run_single(rc);
            tp += static_cast<double>(rep.propagation->tp);
            fp += static_cast<double>(rep.propagation->fp);
            d.push_back(rep.mean_truth_dprop());
        }
        EXPECT_EQ(cs.runs, 2u);
        EXPECT_DOUBLE_EQ(cs.tp_mean, tp / 2);
        EXPECT_DOUBLE_EQ(cs.fp_mean, fp / 2);
        EXPECT_DOUBLE_EQ(cs.dprop_mean, (d[0] + d[1]) / 2);
        EXPECT_NEAR(cs.dprop_sd, std::abs(d[0] - d[1]) / std::sqrt(2.0), 1e-12);
    }
    EXPECT_TRUE(run_grid(conds, {}, 1, config_hash(c)).runs.empty());
    EXPECT_TRUE(run_grid(conds, {}, 1, config_hash(c)).conditions.empty());
}

TEST(Robustness, MixedHashesRejected) {
    RobustnessRun a, b;
    a.condition = b.condition = "x";
    a.ok = b.ok = true;
    a.config_hash = "1";
    b.config_hash = "2";
    EXPECT_THROW(aggregate({a, b}), Error);
    b.condition = "y";
    EXPECT_EQ(aggregate({a, b}).size(), 2u);
}

TEST(Robustness, FailedRunsAreRecorded) {
    auto c = small();
    c.links = {{"Tau", "Amyloid"}};
    const auto s = run_grid({{"bad", c}}, {0}, 1, config_hash(c));
    ASSERT_EQ(s.runs.size(), 1u);
    EXPECT_FALSE(s.runs[0].ok);
    EXPECT_FALSE(s.runs[0].error.empty());
    EXPECT_EQ(s.conditions[0].failures, 1u);
    EXPECT_EQ(s.conditions[0].pass_rate, 0.0);
}

TEST(Diagnose, MedianHelper) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
    EXPECT_THROW(median({}), ConfigError);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    std::ofstream(dir / "small.json") << kSmall;
    std::ofstream(dir / "bad.json") << R"({"bogus": true})";
    std::ofstream(dir / "blocker") << "x";
    const std::string small_cfg = "--config " + (dir / "small.json").string();
    EXPECT_EQ(run_cli("run " + small_cfg + " --out " + (dir / "o").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "o" / "report.json"));
    EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run_cli("run --config " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("run " + small_cfg + " --readout sideways"), 2);
    EXPECT_EQ(run_cli("run " + small_cfg + " --out " + (dir / "blocker" / "x").string()), 3);
    EXPECT_EQ(run_cli("validate " + small_cfg + " --out " + (dir / "v").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "v" / "validation.json"));
}
