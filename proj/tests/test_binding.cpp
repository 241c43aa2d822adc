#include <gtest/gtest.h>

#include <cmath>

#include "asmc/binding.hpp"
#include "asmc/errors.hpp"

using namespace asmc;

namespace {

BrainConfig small_config(std::uint64_t seed = 1) {
    BrainConfig c;
    c.n_per_area = 200;
    c.k = 20;
    c.seed = seed;
    return c;
}

// a -> b, c unrelated.
DirectedGraph chain() { return DirectedGraph::from_names({{"a", 2, 1}, {"b", 2, 1}, {"c", 2, 1}}, {{"a", "b"}}); }

struct Rig {
    DirectedGraph graph = chain();
    Brain brain{small_config(), {"a", "b", "c"}};
    AssemblyStore store{graph, FormationConfig{}};
    Encoder enc{RateEncodingConfig{0.3, 0.02, 200}};
    Rng rng{5};

    explicit Rig(int passes = 15) {
        for (int i = 0; i < passes; ++i) {
            store.formation_pass(brain, enc, rng);
            store.close_round();
        }
    }
};

} // namespace

TEST(Schedule, RampEndpointsAndIncrement) {
    GainSchedule s;
    EXPECT_DOUBLE_EQ(s.beta_start(), 0.09);
    EXPECT_DOUBLE_EQ(ramp_beta(s, 1), 0.09);
    EXPECT_EQ(ramp_beta(s, 20), 0.16);
    for (std::size_t i = 1; i < 20; ++i)
        EXPECT_NEAR(ramp_beta(s, i + 1) - ramp_beta(s, i), 0.07 / 19.0, 1e-12);
    EXPECT_NEAR(0.07 / 19.0, 0.0036842, 1e-7);
    EXPECT_THROW(ramp_beta(s, 0), ConfigError);
    EXPECT_THROW(ramp_beta(s, 21), ConfigError);
    s.warm_beta = 0.03;
    EXPECT_DOUBLE_EQ(s.beta_start(), 0.06);
    EXPECT_DOUBLE_EQ(ramp_beta(s, 1), 0.06);
}

TEST(Schedule, Validation) {
    GainSchedule s;
    s.max_beta = 0.05;
    EXPECT_THROW(s.validate(), ConfigError);
    s = GainSchedule{};
    s.ramp_steps = 1;
    EXPECT_THROW(s.validate(), ConfigError);
    s = GainSchedule{};
    s.warmup_cap = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_EQ(parse_schedule_mode("parallel_baseline"), ScheduleMode::parallel_baseline);
    EXPECT_EQ(to_string(ScheduleMode::adaptive_soft), "adaptive_soft");
    EXPECT_THROW(parse_schedule_mode("fast"), ConfigError);
}

TEST(Config, LinksMustBeTrueEdges) {
    const auto g = chain();
    BindingConfig c;
    c.links = {{0, 1}};
    EXPECT_NO_THROW(c.validate(g));
    c.links = {{1, 0}};
    EXPECT_THROW(c.validate(g), ConfigError);
    c.links = {{0, 1}, {0, 1}};
    EXPECT_THROW(c.validate(g), ConfigError);
    c.links = {{0, 7}};
    EXPECT_THROW(c.validate(g), ConfigError);
    c.links = {{0, 1}};
    c.jitter = 1.0;
    EXPECT_THROW(c.validate(g), ConfigError);
}

TEST(BoundVariables, SortedUnique) {
    EXPECT_EQ(bound_variables({{3, 1}, {1, 0}, {3, 0}}), (std::vector<std::size_t>{0, 1, 3}));
    EXPECT_TRUE(bound_variables({}).empty());
}

TEST(BindLink, ForwardExceedsReverse) {
    Rig s;
    BindingRecord rec;
    for (int i = 0; i < 5; ++i) rec = bind_link(s.brain, s.store, s.enc, s.rng, {0, 1}, 0.16, 5);
    EXPECT_GT(rec.fwd_mean / rec.rev_mean, 1.0);
    // Independent block means from the submatrix accessor.
    const auto& au = s.store.positive(0).winners;
    const auto& av = s.store.positive(1).winners;
    EXPECT_DOUBLE_EQ(rec.fwd_mean, s.brain.connectome_submatrix(0, 1, au, av).mean());
    EXPECT_DOUBLE_EQ(rec.rev_mean, s.brain.connectome_submatrix(1, 0, av, au).mean());
    EXPECT_EQ(rec.beta, 0.16);
}

TEST(BindLink, TouchesOnlyTheLinkAreas) {
    Rig s;
    const Brain before = s.brain;
    bind_link(s.brain, s.store, s.enc, s.rng, {0, 1}, 0.16, 5);
    for (std::size_t f = 0; f < 3; ++f)
        for (std::size_t t = 0; t < 3; ++t) {
            if (f == t) continue;
            const bool may_change = (f == 0 && t == 1) || (f == 1 && t == 0);
            if (!may_change) EXPECT_EQ(s.brain.connectome(f, t).weights, before.connectome(f, t).weights) << f << t;
            EXPECT_EQ(s.brain.connectome(f, t).beta, s.brain.connectome(f, t).baseline_beta);
        }
    EXPECT_EQ(s.brain.input_connectome(2).weights, before.input_connectome(2).weights);
    EXPECT_NE(s.brain.connectome(0, 1).weights, before.connectome(0, 1).weights);
}

TEST(BindLink, ZeroExposuresIsNoOp) {
    Rig s;
    const Brain before = s.brain;
    bind_link(s.brain, s.store, s.enc, s.rng, {0, 1}, 0.16, 0);
    EXPECT_TRUE(s.brain.same_state(before));
}

TEST(BindLink, RejectsGainBelowBaseline) {
    Rig s;
    EXPECT_THROW(bind_link(s.brain, s.store, s.enc, s.rng, {0, 1}, 0.0001, 5), ConfigError);
}

TEST(BindLink, NeedsFormedAssemblies) {
    Rig s(0);
    EXPECT_THROW(bind_link(s.brain, s.store, s.enc, s.rng, {0, 1}, 0.16, 5), StageError);
}

TEST(RunBinding, AdaptiveBetaSequence) {
    Rig s(30);
    BindingConfig c;
    c.links = {{0, 1}};
    const auto log = run_binding(s.brain, s.store, s.enc, s.rng, c);
    ASSERT_GE(log.warm_rounds, 1u);
    ASSERT_LE(log.warm_rounds, 15u);
    ASSERT_EQ(log.round_betas.size(), log.warm_rounds + 20);
    for (std::size_t i = 0; i < log.warm_rounds; ++i) EXPECT_EQ(log.round_betas[i], 0.09);
    for (std::size_t sidx = 1; sidx <= 20; ++sidx)
        EXPECT_NEAR(log.round_betas[log.warm_rounds + sidx - 1], 0.09 + (sidx - 1) * 0.07 / 19.0, 1e-12);
    for (std::size_t i = 1; i < log.round_betas.size(); ++i) EXPECT_GE(log.round_betas[i], log.round_betas[i - 1]);
    EXPECT_EQ(log.round_betas.back(), 0.16);
    EXPECT_EQ(log.records.size(), log.round_betas.size());
    EXPECT_EQ(log.records.front().phase, "warm");
    EXPECT_EQ(log.records.back().phase, "ramp");
    EXPECT_EQ(log.records.back().step, 20u);
    if (log.stabilized) {
        // the last three warm rounds closed a window of formation overlaps >= 0.9
        const auto& f = s.store.formation_trace(0, 1);
        const std::size_t last_warm = 30 + log.warm_rounds;
        for (std::size_t i = last_warm - 3; i < last_warm; ++i) EXPECT_GE(f[i], 0.9);
    }
    for (std::size_t f = 0; f < 3; ++f)
        for (std::size_t t = 0; t < 3; ++t)
            if (f != t) EXPECT_EQ(s.brain.connectome(f, t).beta, s.brain.connectome(f, t).baseline_beta);
}

TEST(RunBinding, CapBindsWhenWindowIsUnreachable) {
    Rig s(30);
    BindingConfig c;
    c.links = {{0, 1}};
    c.schedule.stable_window = 20;
    c.schedule.warmup_cap = 3;
    const auto log = run_binding(s.brain, s.store, s.enc, s.rng, c);
    EXPECT_EQ(log.warm_rounds, 3u);
    EXPECT_FALSE(log.stabilized);
    EXPECT_EQ(log.round_betas.size(), 23u);
}

TEST(RunBinding, ParallelIsConstant) {
    Rig s(0);
    BindingConfig c;
    c.links = {{0, 1}};
    c.schedule.mode = ScheduleMode::parallel_baseline;
    c.parallel_rounds = 12;
    const auto log = run_binding(s.brain, s.store, s.enc, s.rng, c);
    EXPECT_EQ(log.round_betas, std::vector<double>(12, 0.16));
    EXPECT_EQ(log.warm_rounds, 0u);
    EXPECT_EQ(s.store.passes(), 12u);

    Rig d(0);
    c.parallel_rounds = 0;
    EXPECT_EQ(run_binding(d.brain, d.store, d.enc, d.rng, c).round_betas.size(), 30u + 20u);
}

TEST(RunBinding, DisabledUsesBaseline) {
    Rig s(30);
    BindingConfig c;
    c.links = {{0, 1}};
    c.enabled = false;
    const auto log = run_binding(s.brain, s.store, s.enc, s.rng, c);
    for (double b : log.round_betas) EXPECT_EQ(b, 0.0003);
    for (const auto& r : log.records) EXPECT_EQ(r.beta, 0.0003);
}

TEST(RunBinding, JitterBoundedAndSeeded) {
    BindingConfig c;
    c.links = {{0, 1}};
    c.jitter = 0.2;
    c.jitter_seed = 42;
    c.schedule.mode = ScheduleMode::parallel_baseline;
    c.parallel_rounds = 2;
    Rig a(0), b(0);
    const auto la = run_binding(a.brain, a.store, a.enc, a.rng, c);
    const auto lb = run_binding(b.brain, b.store, b.enc, b.rng, c);
    ASSERT_EQ(la.link_jitter.size(), 1u);
    EXPECT_EQ(la.link_jitter, lb.link_jitter);
    EXPECT_GE(la.link_jitter[0], 0.8);
    EXPECT_LE(la.link_jitter[0], 1.2);
    EXPECT_DOUBLE_EQ(la.records[0].beta, 0.16 * la.link_jitter[0]);
    EXPECT_TRUE(a.brain.same_state(b.brain));
}
