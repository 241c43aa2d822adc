#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "asmc/assembly.hpp"
#include "asmc/brain.hpp"
#include "asmc/scm.hpp"

namespace asmc {

enum class Readout { synaptic, propagation };

std::string to_string(Readout r);

struct PairScore {
    std::size_t from = 0;
    std::size_t to = 0;
    std::string name; // "u->v"
    Readout readout = Readout::synaptic;
    double s_fwd = 0.0;
    double s_rev = 0.0;
    double delta = 0.0;
    std::size_t rank = 0; // 1-based position after sorting; 0 = unranked
};

struct TopKResult {
    Readout readout = Readout::synaptic;
    std::size_t k = 0;
    std::vector<PairScore> ranked;   // every pair, sorted, with ranks
    std::vector<PairScore> selected; // first K survivors of the ratio filter
    std::size_t tp = 0;
    std::size_t fp = 0;
    double precision = 0.0;
    double recall = 0.0;
    /// Set when fewer than K pairs survive the ratio filter.
    std::string warning;
};

/// Mean W_{u->v} over the A_u x A_v block, the same for v -> u, and their difference.
PairScore synaptic_score(const Brain& brain, std::size_t u, std::size_t v, const WinnerSet& a_u,
                         const WinnerSet& a_v);

/// top-k of input_to_v[i] = sum_{j in A_u} W_{u->v}[j, i]. Pure read.
WinnerSet propagate_analytic(const Brain& brain, std::size_t u, std::size_t v, const WinnerSet& a_u);

/// overlap(u->v) - overlap(v->u) with overlaps taken against the stored assemblies.
PairScore propagation_delta(const Brain& brain, std::size_t u, std::size_t v, const WinnerSet& a_u,
                            const WinnerSet& a_v);

/// Scores every ordered pair (u != v) in (u, v) declaration order using `assemblies[i]`.
std::vector<PairScore> score_all_pairs(const Brain& brain, const std::vector<WinnerSet>& assemblies, Readout readout,
                                       const std::vector<std::string>& names);

/// Sorts by delta descending (ties: lexicographic pair name), drops pairs with
/// s_fwd / s_rev < ratio_threshold, keeps the first K and scores them against `truth`.
TopKResult rank_and_select(std::vector<PairScore> scores, std::size_t k, double ratio_threshold,
                           const std::vector<Edge>& truth);

double precision_at_k(std::size_t tp, std::size_t fp);
double recall_at_k(std::size_t tp, std::size_t gt_count);

} // namespace asmc
