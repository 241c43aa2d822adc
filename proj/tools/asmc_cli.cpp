#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asmc/config.hpp"
#include "asmc/errors.hpp"
#include "asmc/harness.hpp"
#include "asmc/outputs.hpp"

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string readout;
    std::size_t folds = 0;
};

asmc::RunConfig make_config(const Options& o) {
    asmc::RunConfig cfg = o.config.empty() ? asmc::RunConfig{} : asmc::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (!o.readout.empty()) {
        if (o.readout == "both") {
            cfg.readout.synaptic = cfg.readout.propagation = true;
        } else if (o.readout == "synaptic") {
            cfg.readout.synaptic = true;
            cfg.readout.propagation = false;
        } else if (o.readout == "propagation") {
            cfg.readout.synaptic = false;
            cfg.readout.propagation = true;
        } else {
            throw asmc::ConfigError("--readout must be synaptic, propagation or both");
        }
    }
    cfg.validate();
    return cfg;
}

void print_topk(const std::optional<asmc::TopKResult>& t) {
    if (!t) return;
    std::cout << asmc::to_string(t->readout) << ": TP=" << t->tp << " FP=" << t->fp
              << " precision@K=" << t->precision << " recall@K=" << t->recall << '\n';
}

int cmd_run(const Options& o) {
    const auto report = asmc::run_single(make_config(o));
    asmc::emit_outputs(report, o.out);
    print_topk(report.synaptic);
    print_topk(report.propagation);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "mean truth delta_prop=" << report.mean_truth_dprop() << " outputs in " << o.out << '\n';
    return 0;
}

int cmd_robustness(const Options& o) {
    const auto summary = asmc::run_robustness(make_config(o));
    asmc::emit_outputs(summary, o.out);
    for (const auto& c : summary.conditions)
        std::cout << c.condition << ": runs=" << c.runs << " failures=" << c.failures << " tp_mean=" << c.tp_mean
                  << " fp_mean=" << c.fp_mean << " dprop=" << c.dprop_mean << " +- " << c.dprop_sd << '\n';
    for (const auto& r : summary.runs)
        if (!r.ok) std::cerr << "run " << r.condition << " seed " << r.seed << " failed: " << r.error << '\n';
    return 0;
}

int cmd_folds(const Options& o) {
    const auto cfg = make_config(o);
    const auto report = asmc::run_folds(cfg, o.folds ? o.folds : cfg.folds);
    asmc::emit_outputs(report, o.out);
    std::cout << "folds=" << report.n_folds << " precision mean=" << report.precision_mean
              << " var=" << report.precision_var << '\n';
    return 0;
}

int cmd_validate(const Options& o) {
    asmc::Pipeline p(make_config(o));
    p.ingest();
    p.validate();
    auto doc = asmc::report_json(p.report());
    std::filesystem::create_directories(o.out);
    asmc::write_json(doc["validation"], std::filesystem::path(o.out) / "validation.json");
    const auto& names = p.report().variables;
    for (const auto& v : p.report().validation) {
        std::cout << names[v.x] << "->" << names[v.y] << ": backdoor=" << v.estimated << " oracle=" << v.oracle
                  << " sign_match=" << v.sign_match << " counterfactual_rate=";
        if (v.counterfactual.rate)
            std::cout << *v.counterfactual.rate;
        else
            std::cout << "n/a";
        std::cout << '\n';
    }
    return 0;
}

int cmd_diagnose(const Options& o) {
    const auto cfg = make_config(o);
    const auto seeds = o.seed ? std::vector<std::uint64_t>{*o.seed} : cfg.robustness.seeds;
    const auto d = asmc::run_diagnose(cfg, seeds);
    std::filesystem::create_directories(o.out);
    asmc::write_json(asmc::diagnose_json(d, asmc::config_hash(cfg)), std::filesystem::path(o.out) / "diagnose.json");
    std::cout << "late overlap median: adaptive_soft=" << d.adaptive_median
              << " parallel_baseline=" << d.parallel_median << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural-assembly simulator with directional causal binding"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run config JSON")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Override the run seed");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--readout", o.readout, "synaptic, propagation or both")
            ->check(CLI::IsMember({"synaptic", "propagation", "both"}));
    };
    auto* run = app.add_subcommand("run", "Single run: formation, binding, readouts, validation");
    auto* rob = app.add_subcommand("robustness", "R1-R3 robustness grid");
    auto* folds = app.add_subcommand("folds", "Fold-partition runs on fresh brains");
    auto* val = app.add_subcommand("validate", "Backdoor, oracle and counterfactual checks only");
    auto* diag = app.add_subcommand("diagnose", "adaptive_soft vs parallel_baseline drift comparison");
    for (auto* s : {run, rob, folds, val, diag}) add_common(s);
    folds->add_option("--folds", o.folds, "Number of folds (default from config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(o);
        if (*rob) return cmd_robustness(o);
        if (*folds) return cmd_folds(o);
        if (*val) return cmd_validate(o);
        if (*diag) return cmd_diagnose(o);
    } catch (const asmc::StageError& e) {
        std::cerr << "stage failure [" << e.stage() << "]: " << e.what() << '\n';
        return 3;
    } catch (const asmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const asmc::GraphError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "stage failure [unknown]: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
