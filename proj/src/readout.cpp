#include "asmc/readout.hpp"

#include <algorithm>
#include <set>

#include "asmc/errors.hpp"

namespace asmc {

std::string to_string(Readout r) { return r == Readout::synaptic ? "synaptic" : "propagation"; }

PairScore synaptic_score(const Brain& brain, std::size_t u, std::size_t v, const WinnerSet& a_u,
                         const WinnerSet& a_v) {
    PairScore s;
    s.from = u;
    s.to = v;
    s.readout = Readout::synaptic;
    s.s_fwd = brain.connectome_submatrix(u, v, a_u, a_v).mean();
    s.s_rev = brain.connectome_submatrix(v, u, a_v, a_u).mean();
    s.delta = s.s_fwd - s.s_rev;
    return s;
}

WinnerSet propagate_analytic(const Brain& brain, std::size_t u, std::size_t v, const WinnerSet& a_u) {
    if (a_u.area() != u) throw ConfigError("source assembly does not live in the source area");
    const auto input = brain.input_from(a_u, v);
    return WinnerSet(v, select_top_k(input, brain.area(v).k));
}

PairScore propagation_delta(const Brain& brain, std::size_t u, std::size_t v, const WinnerSet& a_u,
                            const WinnerSet& a_v) {
    PairScore s;
    s.from = u;
    s.to = v;
    s.readout = Readout::propagation;
    s.s_fwd = winner_overlap(propagate_analytic(brain, u, v, a_u), a_v);
    s.s_rev = winner_overlap(propagate_analytic(brain, v, u, a_v), a_u);
    s.delta = s.s_fwd - s.s_rev;
    return s;
}

std::vector<PairScore> score_all_pairs(const Brain& brain, const std::vector<WinnerSet>& assemblies, Readout readout,
                                       const std::vector<std::string>& names) {
    const std::size_t n = assemblies.size();
    if (names.size() != n) throw ConfigError("one name per assembly required");
    std::vector<PairScore> out;
    if (readout == Readout::synaptic) {
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v)
                if (u != v) out.push_back(synaptic_score(brain, u, v, assemblies[u], assemblies[v]));
    } else {
        // One propagation per ordered pair; reuse it for both orientations.
        std::vector<double> ov(n * n, 0.0);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v)
                if (u != v) ov[u * n + v] = winner_overlap(propagate_analytic(brain, u, v, assemblies[u]), assemblies[v]);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) {
                if (u == v) continue;
                PairScore s;
                s.from = u;
                s.to = v;
                s.readout = Readout::propagation;
                s.s_fwd = ov[u * n + v];
                s.s_rev = ov[v * n + u];
                s.delta = s.s_fwd - s.s_rev;
                out.push_back(s);
            }
    }
    for (auto& s : out) s.name = names[s.from] + "->" + names[s.to];
    return out;
}

double precision_at_k(std::size_t tp, std::size_t fp) {
    if (tp + fp == 0) throw ConfigError("precision@K undefined for K = 0");
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall_at_k(std::size_t tp, std::size_t gt_count) {
    if (gt_count == 0) throw ConfigError("recall@K undefined without ground-truth links");
    return static_cast<double>(tp) / static_cast<double>(gt_count);
}

namespace {

bool passes_ratio(const PairScore& s, double threshold) {
    if (s.s_rev == 0.0) return s.s_fwd > 0.0;
    return s.s_fwd / s.s_rev >= threshold;
}

} // namespace

TopKResult rank_and_select(std::vector<PairScore> scores, std::size_t k, double ratio_threshold,
                           const std::vector<Edge>& truth) {
    if (k < 1) throw ConfigError("K must be >= 1");
    TopKResult res;
    res.k = k;
    if (!scores.empty()) res.readout = scores.front().readout;
    std::stable_sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
        return a.delta != b.delta ? a.delta > b.delta : a.name < b.name;
    });
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i].rank = i + 1;

    const std::set<Edge> gt(truth.begin(), truth.end());
    for (const auto& s : scores) {
        if (res.selected.size() == k) break;
        if (!passes_ratio(s, ratio_threshold)) continue;
        res.selected.push_back(s);
        if (gt.count(Edge{s.from, s.to}))
            ++res.tp;
        else
            ++res.fp;
    }
    if (res.selected.size() < k)
        res.warning = "only " + std::to_string(res.selected.size()) + " of K=" + std::to_string(k) +
                      " pairs pass the ratio threshold";
    res.precision = res.selected.empty() ? 0.0 : precision_at_k(res.tp, res.fp);
    res.recall = gt.empty() ? 0.0 : recall_at_k(res.tp, gt.size());
    res.ranked = std::move(scores);
    return res;
}

} // namespace asmc
