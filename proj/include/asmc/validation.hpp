#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "asmc/scm.hpp"

namespace asmc {

struct AdjustmentSet {
    std::size_t x = 0;
    std::size_t y = 0;
    std::vector<std::size_t> z;
};

/// Z = parents(X) without Y.
AdjustmentSet parent_adjustment(const DirectedGraph& graph, std::size_t x, std::size_t y);
/// Throws ConfigError unless Z excludes X, Y and every descendant of X.
void check_adjustment(const DirectedGraph& graph, const AdjustmentSet& adj);

/// E[Y = y_pos | do(X = x1)] - E[Y = y_pos | do(X = x0)] by backdoor adjustment over the
/// empirical frequencies of `table`. Throws ConfigError on an empty table or a stratum z
/// with P(z) > 0 that never shows X = x0 or X = x1.
double backdoor_estimate(const ObservationTable& table, const DirectedGraph& graph, const AdjustmentSet& adj,
                         std::size_t x0, std::size_t x1, std::size_t y_pos);
/// Same formula over an exact joint distribution.
double backdoor_estimate(const JointDistribution& joint, const DirectedGraph& graph, const AdjustmentSet& adj,
                         std::size_t x0, std::size_t x1, std::size_t y_pos);
/// Plug-in standard error of the table estimate (stratum weights treated as fixed).
double backdoor_sigma(const ObservationTable& table, const DirectedGraph& graph, const AdjustmentSet& adj,
                      std::size_t x0, std::size_t x1, std::size_t y_pos);

/// P(Y = y_pos | do(X = x1)) - P(Y = y_pos | do(X = x0)). Exact enumeration when `n_rows`
/// is empty, otherwise two sampled interventional tables.
double oracle_ate(const ScmDefinition& scm, std::size_t x, std::size_t x0, std::size_t x1, std::size_t y,
                  std::size_t y_pos, std::optional<std::size_t> n_rows = std::nullopt, std::uint64_t seed = 0);

struct CounterfactualResult {
    std::size_t units = 0;
    std::size_t eligible = 0; // units whose outcome indicator changed
    std::size_t agree = 0;
    /// agree / eligible; empty when no unit changed.
    std::optional<double> rate;
};

/// For each sampled unit, flips X (to its positive value, or to 0 when already positive),
/// re-propagates the unit's noise, and checks that the direction of the change of
/// [Y = positive] agrees with the sign of the exact oracle ATE of the positive value.
CounterfactualResult counterfactual_consistency(const ScmDefinition& scm, std::size_t x, std::size_t y,
                                                std::size_t n_units, std::uint64_t seed);

struct AteReport {
    std::size_t x = 0;
    std::size_t y = 0;
    std::vector<std::size_t> z;
    std::size_t x0 = 0; // reference treatment value
    std::size_t x1 = 0; // positive treatment value
    double estimated = 0.0;
    double oracle = 0.0;
    double sigma = 0.0;
    double tolerance = 0.0; // max(0.02, 3 sigma)
    double abs_error = 0.0;
    bool sign_match = false;
    bool magnitude_match = false;
    CounterfactualResult counterfactual;
};

/// Backdoor estimate on `table`, exact oracle and counterfactual check for one pair.
AteReport validate_pair(const ScmDefinition& scm, const ObservationTable& table, std::size_t x, std::size_t y,
                        std::size_t cf_units, std::uint64_t seed);

} // namespace asmc
