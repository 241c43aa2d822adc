#include <gtest/gtest.h>

#include <algorithm>

#include "asmc/assembly.hpp"
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

DirectedGraph two_vars() {
    return DirectedGraph::from_names({{"a", 2, 1}, {"b", 3, 2}}, {{"a", "b"}});
}

Encoder rate_encoder(std::size_t n = 200) { return Encoder(RateEncodingConfig{0.3, 0.02, n}); }

} // namespace

TEST(Overlap, HandCases) {
    EXPECT_DOUBLE_EQ(winner_overlap(WinnerSet(0, {1, 2, 3}), WinnerSet(0, {2, 3, 4})), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(winner_overlap(WinnerSet(0, {5, 1}), WinnerSet(0, {1, 5})), 1.0);
    EXPECT_DOUBLE_EQ(winner_overlap(WinnerSet(0, {1, 2}), WinnerSet(0, {3, 4})), 0.0);
    EXPECT_THROW(winner_overlap(WinnerSet(0, {1}), WinnerSet(1, {1})), ConfigError);
    EXPECT_THROW(winner_overlap(WinnerSet(0, {1}), WinnerSet(0, {1, 2})), ConfigError);
    EXPECT_THROW(winner_overlap(WinnerSet(0, {}), WinnerSet(0, {})), ConfigError);
}

TEST(FormAssembly, SingleRoundTraceIsZero) {
    Brain brain(small_config(), {"a"});
    Rng rng(1);
    FormationConfig cfg;
    cfg.rounds = 1;
    const auto [a, trace] = form_assembly(brain, {0, 1, Polarity::positive}, rate_encoder(), rng, cfg);
    EXPECT_EQ(trace.overlaps, std::vector<double>{0.0});
    EXPECT_EQ(a.winners.size(), 20u);
    EXPECT_EQ(a.rounds_to_stabilize, 0u);
    EXPECT_EQ(trace.label, "a=1");
}

TEST(FormAssembly, Converges) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        BrainConfig bc;
        bc.seed = seed;
        Brain brain(bc, {"a"});
        Rng rng(seed + 100);
        FormationConfig fc;
        fc.rounds = 60;
        const auto [a, trace] = form_assembly(brain, {0, 1, Polarity::positive}, rate_encoder(1000), rng, fc);
        ASSERT_EQ(trace.overlaps.size(), 60u);
        EXPECT_GE(trace.overlaps.back(), 0.9);
        EXPECT_GT(a.rounds_to_stabilize, 0u);
        // rounds_to_stabilize is the first round closing a window of 3 overlaps >= 0.9
        const std::size_t r = a.rounds_to_stabilize;
        for (std::size_t i = r - 3; i < r; ++i) EXPECT_GE(trace.overlaps[i], 0.9);
        for (std::size_t end = 3; end < r; ++end) {
            bool all = true;
            for (std::size_t i = end - 3; i < end; ++i) all = all && trace.overlaps[i] >= 0.9;
            EXPECT_FALSE(all);
        }
    }
}

TEST(FormAssembly, Deterministic) {
    auto run = [] {
        Brain brain(small_config(7), {"a"});
        Rng rng(3);
        return form_assembly(brain, {0, 0, Polarity::negative}, rate_encoder(), rng, FormationConfig{});
    };
    const auto x = run(), y = run();
    EXPECT_EQ(x.first.winners, y.first.winners);
    EXPECT_EQ(x.second.overlaps, y.second.overlaps);
}

TEST(FormAssembly, IndexCodeWithoutPlasticityIsFixedPoint) {
    auto cfg = small_config();
    cfg.input_beta = 0.0;
    Brain brain(cfg, {"a"});
    Rng rng(1);
    const Encoder enc(IndexEncoder({30, 10}, 200, {2}, 5));
    FormationConfig fc;
    fc.rounds = 6;
    const auto [a, trace] = form_assembly(brain, {0, 1, Polarity::positive}, enc, rng, fc);
    EXPECT_EQ(trace.overlaps, (std::vector<double>{0, 1, 1, 1, 1, 1}));
    EXPECT_EQ(a.rounds_to_stabilize, 4u);
}

TEST(FormAssembly, EncoderSizeMismatch) {
    Brain brain(small_config(), {"a"});
    Rng rng(1);
    EXPECT_THROW(form_assembly(brain, {0, 1, Polarity::positive}, rate_encoder(100), rng, FormationConfig{}),
                 ConfigError);
    EXPECT_THROW(form_assembly(brain, {3, 1, Polarity::positive}, rate_encoder(), rng, FormationConfig{}),
                 ConfigError);
    FormationConfig bad;
    bad.rounds = 0;
    EXPECT_THROW(form_assembly(brain, {0, 1, Polarity::positive}, rate_encoder(), rng, bad), ConfigError);
}

TEST(StabilityMatrixTest, PadsRaggedRows) {
    const std::vector<StabilityTrace> traces = {{"x=0", {0.0, 0.5, 1.0}}, {"x=1", {0.0}}, {"y=0", {}}};
    const auto m = stability_matrix(traces);
    EXPECT_EQ(m.labels, (std::vector<std::string>{"x=0", "x=1", "y=0"}));
    ASSERT_EQ(m.values.size(), 3u);
    for (const auto& row : m.values) EXPECT_EQ(row.size(), 3u);
    EXPECT_EQ(m.values[1], (std::vector<double>{0.0, -1.0, -1.0}));
    EXPECT_EQ(m.values[2], (std::vector<double>{-1.0, -1.0, -1.0}));
    EXPECT_TRUE(stability_matrix(std::vector<StabilityTrace>{}).values.empty());
}

TEST(Store, FormationPassBookkeeping) {
    const auto g = two_vars();
    Brain brain(small_config(), {"a", "b"});
    AssemblyStore store(g, FormationConfig{});
    EXPECT_THROW(store.positive(0), StageError);
    EXPECT_FALSE(store.formed(1, 2));
    Rng rng(9);
    const auto enc = rate_encoder();
    for (int r = 0; r < 12; ++r) {
        store.formation_pass(brain, enc, rng);
        store.close_round();
    }
    EXPECT_EQ(store.passes(), 12u);
    for (std::size_t v = 0; v < 2; ++v)
        for (std::size_t c = 0; c < store.cardinality(v); ++c) {
            EXPECT_TRUE(store.formed(v, c));
            EXPECT_EQ(store.formation_trace(v, c).size(), 12u);
            EXPECT_EQ(store.formation_trace(v, c).front(), 0.0);
            // formation passes are the only exposures here, so both traces coincide
            EXPECT_EQ(store.exposure_trace(v, c).overlaps, store.formation_trace(v, c));
        }
    EXPECT_EQ(store.positive(1).value, (ValueCategory{1, 2, Polarity::positive}));
    EXPECT_EQ(store.category(1, 0).polarity, Polarity::negative);
    EXPECT_EQ(store.exposure_trace(1, 2).label, "b=2");
    EXPECT_EQ(store.exposure_traces().size(), 5u);

    const std::size_t vars[] = {0, 1};
    const double oracle_min =
        std::min(store.formation_trace(0, 1).back(), store.formation_trace(1, 2).back());
    EXPECT_EQ(store.min_positive_overlap(vars), oracle_min);

    const auto& t0 = store.exposure_trace(0, 1).overlaps;
    const auto& t1 = store.exposure_trace(1, 2).overlaps;
    double s = 0;
    for (std::size_t i = 8; i < 12; ++i) s += t0[i] + t1[i];
    EXPECT_NEAR(store.late_overlap(vars, 4), s / 8.0, 1e-15);
    EXPECT_THROW(store.late_overlap(vars, 0), ConfigError);
}

TEST(Store, FormationKeepsGainsAtBaseline) {
    Brain brain(small_config(), {"a", "b"});
    AssemblyStore store(two_vars(), FormationConfig{});
    Rng rng(2);
    store.formation_pass(brain, rate_encoder(), rng);
    for (std::size_t f = 0; f < 2; ++f) {
        EXPECT_EQ(brain.connectome(f, 1 - f).beta, brain.connectome(f, 1 - f).baseline_beta);
        EXPECT_EQ(brain.input_connectome(f).beta, brain.input_connectome(f).baseline_beta);
    }
}

TEST(Store, ExposureAveraging) {
    Brain brain(small_config(), {"a", "b"});
    AssemblyStore store(two_vars(), FormationConfig{});
    const ValueCategory a1{0, 1, Polarity::positive};
    std::vector<Neuron> base(20);
    for (Neuron i = 0; i < 20; ++i) base[i] = i;
    auto shifted = base;
    shifted[0] = 100;
    shifted[1] = 101;
    store.record_exposure(a1, WinnerSet(0, base));    // first ever: 0
    store.record_exposure(a1, WinnerSet(0, shifted)); // 18/20
    store.close_round();
    store.record_exposure(a1, WinnerSet(0, shifted)); // 1
    store.close_round();
    store.close_round(); // no exposure, no entry
    EXPECT_EQ(store.exposure_trace(0, 1).overlaps, (std::vector<double>{0.45, 1.0}));
    EXPECT_TRUE(store.exposure_trace(1, 0).overlaps.empty());
    EXPECT_THROW(store.record_exposure(a1, WinnerSet(1, base)), ConfigError);
    EXPECT_THROW(store.record_exposure({0, 2, Polarity::positive}, WinnerSet(0, base)), ConfigError);
}
