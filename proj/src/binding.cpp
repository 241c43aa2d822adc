#include "asmc/binding.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "asmc/errors.hpp"

namespace asmc {

std::string to_string(ScheduleMode mode) {
    return mode == ScheduleMode::adaptive_soft ? "adaptive_soft" : "parallel_baseline";
}

ScheduleMode parse_schedule_mode(const std::string& text) {
    if (text == "adaptive_soft") return ScheduleMode::adaptive_soft;
    if (text == "parallel_baseline") return ScheduleMode::parallel_baseline;
    throw ConfigError("unknown schedule mode: " + text);
}

void GainSchedule::validate() const {
    if (!(warm_beta >= 0.0) || !std::isfinite(warm_beta)) throw ConfigError("warm_beta must be finite and >= 0");
    if (!(max_beta >= warm_beta) || !std::isfinite(max_beta)) throw ConfigError("schedule needs warm_beta <= max_beta");
    if (beta_start() > max_beta) throw ConfigError("schedule needs max(warm_beta, 0.06) <= max_beta");
    if (ramp_steps < 2) throw ConfigError("ramp_steps must be >= 2");
    if (!(overlap_thr >= 0.0 && overlap_thr <= 1.0)) throw ConfigError("overlap_thr must lie in [0, 1]");
    if (stable_window < 1) throw ConfigError("stable_window must be >= 1");
    if (warmup_cap < 1) throw ConfigError("warmup_cap must be >= 1");
}

double ramp_beta(const GainSchedule& schedule, std::size_t s) {
    if (s < 1 || s > schedule.ramp_steps) throw ConfigError("ramp step out of range");
    const double b0 = schedule.beta_start();
    if (s == schedule.ramp_steps) return schedule.max_beta;
    return b0 + static_cast<double>(s - 1) / static_cast<double>(schedule.ramp_steps - 1) * (schedule.max_beta - b0);
}

void BindingConfig::validate(const DirectedGraph& graph) const {
    schedule.validate();
    if (exposures_per_step < 1) throw ConfigError("exposures_per_step must be >= 1");
    if (!(jitter >= 0.0 && jitter < 1.0)) throw ConfigError("bind jitter must lie in [0, 1)");
    std::set<Edge> seen;
    for (const Edge& e : links) {
        if (e.parent >= graph.size() || e.child >= graph.size()) throw ConfigError("binding link out of range");
        if (!graph.has_edge(e.parent, e.child))
            throw ConfigError("binding link " + graph.node(e.parent).name + " -> " + graph.node(e.child).name +
                              " is not a ground-truth edge");
        if (!seen.insert(e).second) throw ConfigError("duplicate binding link");
    }
}

std::vector<std::size_t> bound_variables(const std::vector<Edge>& links) {
    std::set<std::size_t> vars;
    for (const Edge& e : links) {
        vars.insert(e.parent);
        vars.insert(e.child);
    }
    return {vars.begin(), vars.end()};
}

namespace {

double block_mean(const Brain& brain, std::size_t from, std::size_t to, const WinnerSet& rows, const WinnerSet& cols) {
    return brain.connectome_submatrix(from, to, rows, cols).mean();
}

} // namespace

BindingRecord bind_link(Brain& brain, AssemblyStore& store, const Encoder& encoder, Rng& rng, const Edge& link,
                        double beta, std::size_t exposures) {
    const std::size_t u = link.parent;
    const std::size_t v = link.child;
    const Assembly& au = store.positive(u);
    const Assembly& av = store.positive(v);
    if (beta < brain.connectome(u, v).baseline_beta) throw ConfigError("bind gain below the baseline gain");

    BindingRecord rec;
    rec.beta = beta;
    WinnerSet last_u = au.winners;
    WinnerSet last_v = av.winners;
    brain.update_plasticity(u, v, beta);
    for (std::size_t t = 0; t < exposures; ++t) {
        const Source fwd[] = {encoder.encode(av.value, rng), au.winners};
        last_v = brain.project(fwd, v, true);
        store.record_exposure(av.value, last_v);

        const Source rev[] = {encoder.encode(au.value, rng), av.winners};
        last_u = brain.project(rev, u, true);
        store.record_exposure(au.value, last_u);
    }
    brain.restore_plasticity(u, v);

    rec.source_overlap = winner_overlap(last_u, au.winners);
    rec.target_overlap = winner_overlap(last_v, av.winners);
    rec.fwd_mean = block_mean(brain, u, v, au.winners, av.winners);
    rec.rev_mean = block_mean(brain, v, u, av.winners, au.winners);
    return rec;
}

BindingLog run_binding(Brain& brain, AssemblyStore& store, const Encoder& encoder, Rng& rng,
                       const BindingConfig& cfg) {
    const auto& sched = cfg.schedule;
    sched.validate();
    if (cfg.exposures_per_step < 1) throw ConfigError("exposures_per_step must be >= 1");

    BindingLog log;
    Rng jrng(mix_seed(cfg.jitter_seed, stream::jitter));
    for (std::size_t l = 0; l < cfg.links.size(); ++l)
        log.link_jitter.push_back(cfg.jitter > 0.0 ? 1.0 + cfg.jitter * (2.0 * uniform01(jrng) - 1.0) : 1.0);

    std::size_t round = 0;
    auto bind_round = [&](const char* phase, std::size_t step, double nominal) {
        ++round;
        log.round_betas.push_back(cfg.enabled ? nominal : brain.config().baseline_beta);
        for (std::size_t l = 0; l < cfg.links.size(); ++l) {
            const Edge& e = cfg.links[l];
            const double beta = cfg.enabled ? nominal * log.link_jitter[l] : brain.connectome(e.parent, e.child).baseline_beta;
            BindingRecord rec = bind_link(brain, store, encoder, rng, e, beta, cfg.exposures_per_step);
            rec.link = l;
            rec.round = round;
            rec.phase = phase;
            rec.step = step;
            log.records.push_back(std::move(rec));
        }
        store.close_round();
    };

    if (sched.mode == ScheduleMode::parallel_baseline) {
        const std::size_t rounds =
            cfg.parallel_rounds ? cfg.parallel_rounds : store.config().rounds + sched.ramp_steps;
        for (std::size_t r = 1; r <= rounds; ++r) {
            store.formation_pass(brain, encoder, rng);
            bind_round("parallel", r, sched.max_beta);
        }
        brain.restore_plasticity();
        return log;
    }

    const auto watched = bound_variables(cfg.links);
    std::size_t streak = 0;
    while (true) {
        store.formation_pass(brain, encoder, rng);
        streak = store.min_positive_overlap(watched) >= sched.overlap_thr ? streak + 1 : 0;
        ++log.warm_rounds;
        bind_round("warm", log.warm_rounds, sched.warm_beta);
        if (streak >= sched.stable_window) {
            log.stabilized = true;
            break;
        }
        if (log.warm_rounds >= sched.warmup_cap) break;
    }
    for (std::size_t s = 1; s <= sched.ramp_steps; ++s) {
        store.formation_pass(brain, encoder, rng);
        bind_round("ramp", s, ramp_beta(sched, s));
    }
    brain.restore_plasticity();
    return log;
}

} // namespace asmc
