#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "asmc/assembly.hpp"
#include "asmc/brain.hpp"
#include "asmc/encoding.hpp"
#include "asmc/scm.hpp"

namespace asmc {

enum class ScheduleMode { adaptive_soft, parallel_baseline };

std::string to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(const std::string& text);

struct GainSchedule {
    ScheduleMode mode = ScheduleMode::adaptive_soft;
    double warm_beta = 0.09;
    double max_beta = 0.16;
    std::size_t ramp_steps = 20;
    double overlap_thr = 0.9;
    std::size_t stable_window = 3;
    std::size_t warmup_cap = 15;

    double beta_start() const noexcept { return warm_beta > 0.06 ? warm_beta : 0.06; }
    void validate() const;
};

/// beta_s = beta_start + (s-1)/(R-1) * (max_beta - beta_start), 1 <= s <= R.
double ramp_beta(const GainSchedule& schedule, std::size_t s);

struct BindingConfig {
    /// Co-activations per link per schedule step (T).
    std::size_t exposures_per_step = 5;
    /// Supervised links, visited in this order every round.
    std::vector<Edge> links;
    GainSchedule schedule;
    /// When false every bind gain is replaced by the connectome's baseline (null control).
    bool enabled = true;
    /// Per-link multiplicative jitter half-width on the bind gain (0.2 = +-20%).
    double jitter = 0.0;
    std::uint64_t jitter_seed = 0;
    /// Rounds of the parallel baseline; 0 means formation rounds + ramp_steps.
    std::size_t parallel_rounds = 0;

    void validate(const DirectedGraph& graph) const;
};

struct BindingRecord {
    std::size_t link = 0; // position in BindingConfig::links
    std::size_t round = 0; // 1-based binding round
    std::string phase;     // warm, ramp or parallel
    std::size_t step = 0;  // 1-based step within the phase
    double beta = 0.0;     // gain applied to the forward connectome
    /// Overlap of the last co-activation winners with the stored assemblies.
    double source_overlap = 0.0;
    double target_overlap = 0.0;
    /// Mean cross-assembly weights after the episode.
    double fwd_mean = 0.0;
    double rev_mean = 0.0;
};

struct BindingLog {
    std::vector<BindingRecord> records;
    /// Nominal (pre-jitter) gain of every binding round, in order.
    std::vector<double> round_betas;
    std::size_t warm_rounds = 0;
    bool stabilized = false;
    std::vector<double> link_jitter;
};

/// One DIRECT episode on link u -> v. Raises the forward gain to `beta`, then T times
/// co-activates: the positive stimulus of v together with stored A_u is projected into v,
/// and the positive stimulus of u together with stored A_v is projected into u (reverse
/// connectome at its baseline gain). Restores the forward gain afterwards. Every
/// co-activation is recorded as an exposure of the positive value.
BindingRecord bind_link(Brain& brain, AssemblyStore& store, const Encoder& encoder, Rng& rng, const Edge& link,
                        double beta, std::size_t exposures);

/// Runs the configured schedule. Each round is one formation pass followed by one bind
/// episode per link. adaptive_soft: warm rounds at warm_beta until the positive assemblies
/// of every bound variable held overlap >= overlap_thr for stable_window consecutive rounds
/// (or warmup_cap rounds), then ramp steps 1..R. parallel_baseline: max_beta every round.
BindingLog run_binding(Brain& brain, AssemblyStore& store, const Encoder& encoder, Rng& rng,
                       const BindingConfig& cfg);

/// Variables incident to at least one link, ascending.
std::vector<std::size_t> bound_variables(const std::vector<Edge>& links);

} // namespace asmc
