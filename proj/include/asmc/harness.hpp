#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asmc/assembly.hpp"
#include "asmc/binding.hpp"
#include "asmc/brain.hpp"
#include "asmc/config.hpp"
#include "asmc/readout.hpp"
#include "asmc/scm.hpp"
#include "asmc/validation.hpp"

namespace asmc {

struct RunReport {
    std::string run_id;
    std::string config_hash;
    std::string condition;
    std::uint64_t seed = 0;
    std::vector<std::string> variables;
    std::vector<Edge> truth;
    std::vector<Edge> links;
    std::size_t table_rows = 0;

    std::optional<TopKResult> synaptic;
    std::optional<TopKResult> propagation;

    BindingLog binding;
    std::vector<StabilityTrace> stability;
    std::size_t formation_rounds = 0;
    /// Mean exposure overlap of bound positive assemblies over the last stable_window rounds.
    double late_overlap = 0.0;

    std::vector<AteReport> validation;
    std::vector<std::string> warnings;
    double runtime_ms = 0.0;

    /// Propagation delta of every ground-truth link, in edge order.
    std::vector<double> truth_dprop() const;
    double mean_truth_dprop() const;
};

/// Staged execution of one run. Runtime failures are rethrown as StageError naming the
/// stage (ConfigError and GraphError pass through unchanged); the brain and assembly store
/// stay accessible for inspection between stages.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg);

    /// Supplies the observation table instead of loading or sampling one at ingestion.
    void use_table(ObservationTable table) { table_ = std::move(table); }
    void ingest();
    void encode();
    void form();
    void bind();
    void read_out();
    void validate();
    /// All stages in order.
    RunReport run();

    const RunConfig& config() const noexcept { return cfg_; }
    const ScmDefinition& scm() const noexcept { return scm_; }
    const ObservationTable& table() const noexcept { return table_; }
    Brain& brain();
    AssemblyStore& store();
    const Encoder& encoder() const;
    Rng& encoding_rng() noexcept { return enc_rng_; }
    const std::vector<Edge>& links() const noexcept { return links_; }
    /// Stored positive assembly of every variable, in declared order.
    std::vector<WinnerSet> positive_assemblies() const;
    const RunReport& report() const noexcept { return report_; }

private:
    template <class Fn>
    void stage(const char* name, Fn&& fn);

    RunConfig cfg_;
    ScmDefinition scm_;
    ObservationTable table_;
    std::vector<Edge> links_;
    std::optional<Encoder> encoder_;
    Rng enc_rng_;
    std::unique_ptr<Brain> brain_;
    std::unique_ptr<AssemblyStore> store_;
    RunReport report_;
};

/// Loads the SCM named by the config (builtin or spec file).
ScmDefinition load_scm(const RunConfig& cfg);
/// Reads the table file or samples `table_rows` observational rows with the run seed.
ObservationTable load_table(const RunConfig& cfg, const ScmDefinition& scm);

RunReport run_single(const RunConfig& cfg);

struct RobustnessRun {
    std::string condition;
    std::string config_hash;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::size_t tp = 0; // propagation readout
    std::size_t fp = 0;
    std::size_t tp_synaptic = 0;
    std::size_t fp_synaptic = 0;
    double dprop_mean = 0.0;
    double max_reverse_overlap = 0.0;
    double min_truth_dprop = 0.0;
    double late_overlap = 0.0;
};

struct ConditionSummary {
    std::string condition;
    std::string config_hash;
    std::size_t runs = 0;
    std::size_t failures = 0;
    double tp_mean = 0.0;
    double fp_mean = 0.0;
    double dprop_mean = 0.0;
    double dprop_sd = 0.0;
    /// Fraction of runs with perfect precision and recall on every enabled readout.
    double pass_rate = 0.0;
};

struct RobustnessSummary {
    std::string config_hash;
    std::vector<ConditionSummary> conditions;
    std::vector<RobustnessRun> runs;
};

/// One grid cell: a condition label and the config it runs with.
struct Condition {
    std::string label;
    RunConfig config;
};

/// Expands the configured protocols into conditions (R3 separations, R1 source offset,
/// R2 bind jitter) applied on top of `base`.
std::vector<Condition> robustness_conditions(const RunConfig& base);

/// Runs every (condition, seed) cell on `threads` workers and aggregates per condition.
/// Per-run failures are recorded, never thrown.
RobustnessSummary run_grid(const std::vector<Condition>& conditions, const std::vector<std::uint64_t>& seeds,
                           std::size_t threads, const std::string& base_hash);
RobustnessSummary run_robustness(const RunConfig& base);

/// Aggregates completed runs per condition; throws Error when one condition mixes hashes.
std::vector<ConditionSummary> aggregate(const std::vector<RobustnessRun>& runs);
RobustnessRun summarize_run(const RunReport& report);

struct FoldReport {
    std::size_t n_folds = 0;
    std::vector<std::vector<std::size_t>> assignments; // held-out row indices per fold
    std::vector<RunReport> reports;
    double precision_mean = 0.0;
    double precision_var = 0.0;
};

/// Deterministic partition of `rows` row indices into `n_folds` held-out sets.
std::vector<std::vector<std::size_t>> fold_partition(std::size_t rows, std::size_t n_folds, std::uint64_t seed);
FoldReport run_folds(const RunConfig& cfg, std::size_t n_folds);

struct DiagnoseReport {
    std::vector<std::uint64_t> seeds;
    std::vector<double> adaptive_late;
    std::vector<double> parallel_late;
    double adaptive_median = 0.0;
    double parallel_median = 0.0;
};

/// adaptive_soft vs parallel_baseline late-round overlap on matched seeds.
DiagnoseReport run_diagnose(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds);

double median(std::vector<double> v);

} // namespace asmc
