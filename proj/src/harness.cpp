#include "asmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "asmc/errors.hpp"

namespace asmc {

std::vector<double> RunReport::truth_dprop() const {
    std::vector<double> out;
    if (!propagation) return out;
    for (const Edge& e : truth)
        for (const auto& s : propagation->ranked)
            if (s.from == e.parent && s.to == e.child) out.push_back(s.delta);
    return out;
}

double RunReport::mean_truth_dprop() const {
    const auto d = truth_dprop();
    if (d.empty()) return 0.0;
    return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

ScmDefinition load_scm(const RunConfig& cfg) {
    if (cfg.spec_path.empty()) return builtin_scm(cfg.builtin);
    std::ifstream in(cfg.spec_path);
    if (!in) throw ConfigError("cannot read spec file " + cfg.spec_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return load_spec(ss.str());
}

ObservationTable load_table(const RunConfig& cfg, const ScmDefinition& scm) {
    if (cfg.table_path.empty()) return sample_observational(scm, cfg.table_rows, cfg.seed);
    std::ifstream in(cfg.table_path);
    if (!in) throw ConfigError("cannot read table file " + cfg.table_path.string());
    return read_table_csv(in, scm.graph());
}

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    cfg_.brain.seed = cfg_.seed;
    report_.run_id = run_id(cfg_);
    report_.config_hash = config_hash(cfg_);
    report_.condition = cfg_.condition;
    report_.seed = cfg_.seed;
}

template <class Fn>
void Pipeline::stage(const char* name, Fn&& fn) {
    try {
        fn();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const GraphError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

Brain& Pipeline::brain() {
    if (!brain_) throw StageError("formation", "brain not created yet");
    return *brain_;
}

AssemblyStore& Pipeline::store() {
    if (!store_) throw StageError("formation", "assemblies not formed yet");
    return *store_;
}

const Encoder& Pipeline::encoder() const {
    if (!encoder_) throw StageError("encoding", "encoder not configured yet");
    return *encoder_;
}

std::vector<WinnerSet> Pipeline::positive_assemblies() const {
    if (!store_) throw StageError("readout", "assemblies not formed yet");
    std::vector<WinnerSet> out;
    for (std::size_t v = 0; v < store_->variables(); ++v) out.push_back(store_->positive(v).winners);
    return out;
}

void Pipeline::ingest() {
    stage("ingestion", [&] {
        scm_ = load_scm(cfg_);
        if (table_.cols() == 0) table_ = load_table(cfg_, scm_);
        const auto& g = scm_.graph();
        report_.variables = g.names();
        report_.truth = g.edges();
        report_.table_rows = table_.rows();
        links_.clear();
        if (cfg_.links.empty()) {
            links_ = g.edges();
        } else {
            for (const auto& [u, v] : cfg_.links) links_.push_back({g.index_of(u), g.index_of(v)});
        }
        report_.links = links_;
        if (g.edges().empty()) throw ConfigError("the SCM has no ground-truth links to recover");
    });
}

void Pipeline::encode() {
    stage("encoding", [&] {
        const std::size_t n_input = cfg_.brain.input_size();
        const std::uint64_t enc_seed = cfg_.seed + cfg_.encoder.seed_offset;
        enc_rng_ = Rng(mix_seed(enc_seed, stream::encoding));
        if (cfg_.encoder.mode == EncoderMode::rate) {
            RateEncodingConfig rate = cfg_.encoder.rate;
            rate.n = n_input;
            if (cfg_.encoder.separation) rate = separation_scale(rate, *cfg_.encoder.separation);
            rate.validate();
            encoder_.emplace(rate);
        } else {
            encoder_.emplace(IndexEncoder(cfg_.encoder.index, n_input, scm_.graph().cardinalities(), enc_seed));
        }
    });
}

void Pipeline::form() {
    stage("formation", [&] {
        brain_ = std::make_unique<Brain>(cfg_.brain, scm_.graph().names());
        FormationConfig fc{cfg_.formation_rounds, cfg_.schedule.overlap_thr, cfg_.schedule.stable_window};
        store_ = std::make_unique<AssemblyStore>(scm_.graph(), fc);
        // The parallel baseline forms assemblies concurrently with binding.
        if (cfg_.schedule.mode == ScheduleMode::adaptive_soft) {
            for (std::size_t r = 0; r < cfg_.formation_rounds; ++r) {
                store_->formation_pass(*brain_, *encoder_, enc_rng_);
                store_->close_round();
            }
            report_.formation_rounds = cfg_.formation_rounds;
        }
    });
}

void Pipeline::bind() {
    stage("binding", [&] {
        BindingConfig bc;
        bc.exposures_per_step = cfg_.exposures_per_step;
        bc.links = links_;
        bc.schedule = cfg_.schedule;
        bc.enabled = cfg_.binding_enabled;
        bc.jitter = cfg_.bind_jitter;
        bc.jitter_seed = cfg_.seed;
        bc.parallel_rounds = cfg_.parallel_rounds;
        bc.validate(scm_.graph());
        report_.binding = run_binding(brain(), store(), encoder(), enc_rng_, bc);
        report_.stability = store_->exposure_traces();
        const auto bound = bound_variables(links_);
        report_.late_overlap = store_->late_overlap(bound, cfg_.schedule.stable_window);
        if (cfg_.schedule.mode == ScheduleMode::parallel_baseline) report_.formation_rounds = store_->passes();
    });
}

void Pipeline::read_out() {
    stage("readout", [&] {
        const auto assemblies = positive_assemblies();
        const auto names = scm_.graph().names();
        const std::size_t k = cfg_.readout.k.value_or(report_.truth.size());
        auto one = [&](Readout r) {
            auto res = rank_and_select(score_all_pairs(*brain_, assemblies, r, names), k, cfg_.readout.ratio_threshold,
                                       report_.truth);
            if (!res.warning.empty()) report_.warnings.push_back(to_string(r) + ": " + res.warning);
            return res;
        };
        if (cfg_.readout.synaptic) report_.synaptic = one(Readout::synaptic);
        if (cfg_.readout.propagation) report_.propagation = one(Readout::propagation);
    });
}

void Pipeline::validate() {
    stage("validation", [&] {
        report_.validation.clear();
        if (!cfg_.validation.enabled) return;
        const auto& g = scm_.graph();
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        if (cfg_.validation.pairs.empty()) {
            for (const Edge& e : g.edges()) pairs.emplace_back(e.parent, e.child);
        } else {
            for (const auto& [x, y] : cfg_.validation.pairs) pairs.emplace_back(g.index_of(x), g.index_of(y));
        }
        for (const auto& [x, y] : pairs)
            report_.validation.push_back(validate_pair(scm_, table_, x, y, cfg_.validation.cf_units, cfg_.seed));
    });
}

RunReport Pipeline::run() {
    const auto t0 = std::chrono::steady_clock::now();
    ingest();
    encode();
    form();
    bind();
    read_out();
    validate();
    report_.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report_;
}

RunReport run_single(const RunConfig& cfg) { return Pipeline(cfg).run(); }

RobustnessRun summarize_run(const RunReport& report) {
    RobustnessRun r;
    r.condition = report.condition;
    r.config_hash = report.config_hash;
    r.seed = report.seed;
    r.ok = true;
    const TopKResult* primary = report.propagation ? &*report.propagation : report.synaptic ? &*report.synaptic : nullptr;
    if (primary) {
        r.tp = primary->tp;
        r.fp = primary->fp;
    }
    if (report.synaptic) {
        r.tp_synaptic = report.synaptic->tp;
        r.fp_synaptic = report.synaptic->fp;
    }
    const auto d = report.truth_dprop();
    r.dprop_mean = report.mean_truth_dprop();
    r.min_truth_dprop = d.empty() ? 0.0 : *std::min_element(d.begin(), d.end());
    if (report.propagation)
        for (const Edge& e : report.truth)
            for (const auto& s : report.propagation->ranked)
                if (s.from == e.parent && s.to == e.child) r.max_reverse_overlap = std::max(r.max_reverse_overlap, s.s_rev);
    r.late_overlap = report.late_overlap;
    return r;
}

namespace {

bool perfect(const RobustnessRun& r, std::size_t k) {
    return r.ok && r.tp == k && r.fp == 0 && (r.tp_synaptic == 0 || (r.tp_synaptic == k && r.fp_synaptic == 0));
}

std::string format_factor(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", f);
    return buf;
}

} // namespace

std::vector<ConditionSummary> aggregate(const std::vector<RobustnessRun>& runs) {
    std::vector<ConditionSummary> out;
    std::map<std::string, std::size_t> index;
    std::map<std::string, std::vector<const RobustnessRun*>> groups;
    for (const auto& r : runs) {
        if (!index.count(r.condition)) {
            index[r.condition] = out.size();
            out.push_back({r.condition, r.config_hash});
        }
        if (out[index[r.condition]].config_hash != r.config_hash)
            throw Error("condition " + r.condition + " mixes runs with different config hashes");
        groups[r.condition].push_back(&r);
    }
    for (auto& s : out) {
        const auto& g = groups[s.condition];
        std::vector<double> d;
        std::size_t k = 0;
        for (const auto* r : g)
            if (r->ok) k = std::max(k, r->tp + r->fp);
        std::size_t passed = 0;
        for (const auto* r : g) {
            if (!r->ok) {
                ++s.failures;
                continue;
            }
            ++s.runs;
            s.tp_mean += static_cast<double>(r->tp);
            s.fp_mean += static_cast<double>(r->fp);
            d.push_back(r->dprop_mean);
            passed += perfect(*r, k);
        }
        if (s.runs) {
            s.tp_mean /= static_cast<double>(s.runs);
            s.fp_mean /= static_cast<double>(s.runs);
            s.dprop_mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
            if (d.size() > 1) {
                double ss = 0.0;
                for (double x : d) ss += (x - s.dprop_mean) * (x - s.dprop_mean);
                s.dprop_sd = std::sqrt(ss / static_cast<double>(d.size() - 1));
            }
        }
        const std::size_t total = s.runs + s.failures;
        s.pass_rate = total ? static_cast<double>(passed) / static_cast<double>(total) : 0.0;
    }
    return out;
}

std::vector<Condition> robustness_conditions(const RunConfig& base) {
    std::vector<Condition> out;
    for (const auto& p : base.robustness.protocols) {
        if (p == "R3") {
            for (double f : base.robustness.separations) {
                Condition c{"R3_" + format_factor(f) + "x", base};
                c.config.encoder.separation = f;
                c.config.condition = c.label;
                out.push_back(std::move(c));
            }
        } else if (p == "R1") {
            Condition c{"R1_source", base};
            c.config.encoder.seed_offset = base.robustness.r1_seed_offset;
            c.config.condition = c.label;
            out.push_back(std::move(c));
        } else if (p == "R2") {
            Condition c{"R2_binding", base};
            c.config.bind_jitter = base.robustness.r2_jitter;
            c.config.condition = c.label;
            out.push_back(std::move(c));
        } else {
            throw ConfigError("unknown robustness protocol " + p);
        }
    }
    return out;
}

RobustnessSummary run_grid(const std::vector<Condition>& conditions, const std::vector<std::uint64_t>& seeds,
                           std::size_t threads, const std::string& base_hash) {
    RobustnessSummary summary;
    summary.config_hash = base_hash;
    const std::size_t cells = conditions.size() * seeds.size();
    summary.runs.resize(cells);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells; i = next++) {
            const Condition& cond = conditions[i / seeds.size()];
            RunConfig cfg = cond.config;
            cfg.seed = seeds[i % seeds.size()];
            RobustnessRun& out = summary.runs[i];
            try {
                out = summarize_run(run_single(cfg));
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
            out.condition = cond.label;
            out.config_hash = config_hash(cfg);
            out.seed = cfg.seed;
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(threads, cells));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    summary.conditions = aggregate(summary.runs);
    return summary;
}

RobustnessSummary run_robustness(const RunConfig& base) {
    base.validate();
    return run_grid(robustness_conditions(base), base.robustness.seeds, base.threads, config_hash(base));
}

std::vector<std::vector<std::size_t>> fold_partition(std::size_t rows, std::size_t n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("fold count must be >= 2");
    if (rows < n_folds) throw ConfigError("too few table rows for the requested fold count");
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, stream::folds));
    // Fisher-Yates with our own uniform draw so the partition is identical across stdlibs.
    for (std::size_t i = rows; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    std::vector<std::vector<std::size_t>> folds(n_folds);
    for (std::size_t i = 0; i < rows; ++i) folds[i % n_folds].push_back(order[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

FoldReport run_folds(const RunConfig& cfg, std::size_t n_folds) {
    cfg.validate();
    ScmDefinition scm;
    ObservationTable table;
    try {
        scm = load_scm(cfg);
        table = load_table(cfg, scm);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("ingestion", e.what());
    }
    FoldReport out;
    out.n_folds = n_folds;
    out.assignments = fold_partition(table.rows(), n_folds, cfg.seed);
    for (std::size_t f = 0; f < n_folds; ++f) {
        std::vector<char> held(table.rows(), 0);
        for (std::size_t r : out.assignments[f]) held[r] = 1;
        std::vector<std::size_t> train;
        for (std::size_t r = 0; r < table.rows(); ++r)
            if (!held[r]) train.push_back(r);

        RunConfig fc = cfg;
        fc.seed = mix_seed(cfg.seed, stream::folds) + f;
        fc.condition = cfg.condition + "_fold" + std::to_string(f);
        Pipeline p(fc);
        p.use_table(table.subset(train));
        out.reports.push_back(p.run());
    }
    std::vector<double> prec;
    for (const auto& r : out.reports) {
        const auto& t = r.propagation ? r.propagation : r.synaptic;
        prec.push_back(t ? t->precision : 0.0);
    }
    out.precision_mean = std::accumulate(prec.begin(), prec.end(), 0.0) / static_cast<double>(prec.size());
    for (double p : prec) out.precision_var += (p - out.precision_mean) * (p - out.precision_mean);
    out.precision_var /= static_cast<double>(prec.size());
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

DiagnoseReport run_diagnose(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
    DiagnoseReport out;
    out.seeds = seeds;
    for (std::uint64_t s : seeds) {
        for (ScheduleMode mode : {ScheduleMode::adaptive_soft, ScheduleMode::parallel_baseline}) {
            RunConfig c = cfg;
            c.seed = s;
            c.schedule.mode = mode;
            Pipeline p(c);
            p.ingest();
            p.encode();
            p.form();
            p.bind();
            (mode == ScheduleMode::adaptive_soft ? out.adaptive_late : out.parallel_late).push_back(p.report().late_overlap);
        }
    }
    if (!seeds.empty()) {
        out.adaptive_median = median(out.adaptive_late);
        out.parallel_median = median(out.parallel_late);
    }
    return out;
}

} // namespace asmc
