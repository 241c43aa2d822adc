#include "asmc/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "asmc/errors.hpp"
#include "asmc/rng.hpp"

namespace asmc {

AdjustmentSet parent_adjustment(const DirectedGraph& graph, std::size_t x, std::size_t y) {
    AdjustmentSet adj{x, y, {}};
    for (std::size_t p : graph.parents(x))
        if (p != y) adj.z.push_back(p);
    std::sort(adj.z.begin(), adj.z.end());
    return adj;
}

void check_adjustment(const DirectedGraph& graph, const AdjustmentSet& adj) {
    if (adj.x >= graph.size() || adj.y >= graph.size()) throw ConfigError("adjustment on unknown variable");
    if (adj.x == adj.y) throw ConfigError("treatment and outcome must differ");
    for (std::size_t z : adj.z) {
        if (z >= graph.size()) throw ConfigError("adjustment set names an unknown variable");
        if (z == adj.x || z == adj.y) throw ConfigError("adjustment set must exclude treatment and outcome");
        if (graph.reaches(adj.x, z))
            throw ConfigError("adjustment set contains " + graph.node(z).name + ", a descendant of the treatment");
    }
}

namespace {

struct Cell {
    double n = 0.0;
    double y = 0.0;
};

struct Strata {
    std::map<std::vector<std::size_t>, std::pair<Cell, Cell>> cells; // z -> (x0 cell, x1 cell)
    std::map<std::vector<std::size_t>, double> z_weight;
    double total = 0.0;
};

template <class Rows>
Strata stratify(const Rows& rows, const AdjustmentSet& adj, std::size_t x0, std::size_t x1, std::size_t y_pos) {
    Strata s;
    std::vector<std::size_t> key(adj.z.size());
    rows([&](const auto& state, double w) {
        for (std::size_t i = 0; i < adj.z.size(); ++i) key[i] = state[adj.z[i]];
        s.total += w;
        s.z_weight[key] += w;
        const std::size_t xv = state[adj.x];
        if (xv != x0 && xv != x1) return;
        auto& pair = s.cells[key];
        Cell& c = xv == x1 ? pair.second : pair.first;
        c.n += w;
        if (static_cast<std::size_t>(state[adj.y]) == y_pos) c.y += w;
    });
    return s;
}

double adjust(const Strata& s, const DirectedGraph& graph, const AdjustmentSet& adj) {
    if (!(s.total > 0.0)) throw ConfigError("backdoor estimate needs a nonempty table");
    double ate = 0.0;
    for (const auto& [z, wz] : s.z_weight) {
        if (!(wz > 0.0)) continue;
        auto it = s.cells.find(z);
        if (it == s.cells.end() || !(it->second.first.n > 0.0) || !(it->second.second.n > 0.0))
            throw ConfigError("positivity violation: an adjustment stratum lacks a treatment level for " +
                              graph.node(adj.x).name);
        const auto& [c0, c1] = it->second;
        ate += (wz / s.total) * (c1.y / c1.n - c0.y / c0.n);
    }
    return ate;
}

void check_values(const DirectedGraph& graph, const AdjustmentSet& adj, std::size_t x0, std::size_t x1,
                  std::size_t y_pos) {
    check_adjustment(graph, adj);
    if (x0 >= graph.node(adj.x).cardinality || x1 >= graph.node(adj.x).cardinality)
        throw ConfigError("treatment value out of range");
    if (x0 == x1) throw ConfigError("treatment values must differ");
    if (y_pos >= graph.node(adj.y).cardinality) throw ConfigError("outcome value out of range");
}

auto table_rows(const ObservationTable& t) {
    return [&t](auto&& fn) {
        for (std::size_t r = 0; r < t.rows(); ++r) fn(t.row(r), 1.0);
    };
}

auto joint_rows(const JointDistribution& j) {
    return [&j](auto&& fn) {
        for (std::size_t i = 0; i < j.states.size(); ++i) fn(j.states[i], j.probabilities[i]);
    };
}

} // namespace

double backdoor_estimate(const ObservationTable& table, const DirectedGraph& graph, const AdjustmentSet& adj,
                         std::size_t x0, std::size_t x1, std::size_t y_pos) {
    check_values(graph, adj, x0, x1, y_pos);
    if (table.cols() != graph.size()) throw ConfigError("table does not match the graph");
    return adjust(stratify(table_rows(table), adj, x0, x1, y_pos), graph, adj);
}

double backdoor_estimate(const JointDistribution& joint, const DirectedGraph& graph, const AdjustmentSet& adj,
                         std::size_t x0, std::size_t x1, std::size_t y_pos) {
    check_values(graph, adj, x0, x1, y_pos);
    return adjust(stratify(joint_rows(joint), adj, x0, x1, y_pos), graph, adj);
}

double backdoor_sigma(const ObservationTable& table, const DirectedGraph& graph, const AdjustmentSet& adj,
                      std::size_t x0, std::size_t x1, std::size_t y_pos) {
    check_values(graph, adj, x0, x1, y_pos);
    const Strata s = stratify(table_rows(table), adj, x0, x1, y_pos);
    if (!(s.total > 0.0)) throw ConfigError("backdoor estimate needs a nonempty table");
    double var = 0.0;
    for (const auto& [z, wz] : s.z_weight) {
        auto it = s.cells.find(z);
        if (it == s.cells.end()) continue;
        const double pz = wz / s.total;
        for (const Cell* c : {&it->second.first, &it->second.second}) {
            if (!(c->n > 0.0)) continue;
            const double p = c->y / c->n;
            var += pz * pz * p * (1.0 - p) / c->n;
        }
    }
    return std::sqrt(var);
}

double oracle_ate(const ScmDefinition& scm, std::size_t x, std::size_t x0, std::size_t x1, std::size_t y,
                  std::size_t y_pos, std::optional<std::size_t> n_rows, std::uint64_t seed) {
    const auto& g = scm.graph();
    if (x >= g.size() || y >= g.size()) throw ConfigError("oracle ATE on unknown variable");
    if (y_pos >= g.node(y).cardinality) throw ConfigError("outcome value out of range");
    auto mean_y = [&](std::size_t xv, std::uint64_t stream_seed) {
        Intervention iv;
        iv.assignments[x] = xv;
        if (!n_rows) {
            const auto j = enumerate_joint(scm, iv);
            double p = 0.0;
            for (std::size_t i = 0; i < j.states.size(); ++i)
                if (j.states[i][y] == y_pos) p += j.probabilities[i];
            return p;
        }
        if (*n_rows == 0) throw ConfigError("oracle ATE needs n_rows >= 1");
        const auto t = sample_interventional(scm, iv, *n_rows, stream_seed);
        std::size_t hits = 0;
        for (std::size_t r = 0; r < t.rows(); ++r) hits += t.at(r, y) == y_pos;
        return static_cast<double>(hits) / static_cast<double>(t.rows());
    };
    const std::uint64_t base = mix_seed(seed, stream::oracle);
    return mean_y(x1, base + 1) - mean_y(x0, base);
}

namespace {

std::size_t reference_value(const VariableSpec& v) { return v.positive_value == 0 ? 1 : 0; }

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace

CounterfactualResult counterfactual_consistency(const ScmDefinition& scm, std::size_t x, std::size_t y,
                                                std::size_t n_units, std::uint64_t seed) {
    const auto& g = scm.graph();
    if (x >= g.size() || y >= g.size() || x == y) throw ConfigError("counterfactual check needs distinct known variables");
    const auto& xs = g.node(x);
    const std::size_t y_pos = g.node(y).positive_value;
    const int truth = sign_of(oracle_ate(scm, x, reference_value(xs), xs.positive_value, y, y_pos));

    CounterfactualResult out;
    out.units = n_units;
    const NoisyTable units = sample_with_noise(scm, {}, n_units, mix_seed(seed, stream::counterfactual));
    for (std::size_t r = 0; r < n_units; ++r) {
        const std::size_t xf = units.table.at(r, x);
        const std::size_t target = xf == xs.positive_value ? (xs.positive_value == 0 ? 1 : 0) : xs.positive_value;
        const int direction = target == xs.positive_value ? 1 : -1;
        Intervention iv;
        iv.assignments[x] = target;
        const auto [factual, cf] = sample_counterfactual(scm, units.noise_row(r), iv);
        const int dy = static_cast<int>(cf[y] == y_pos) - static_cast<int>(factual[y] == y_pos);
        if (dy == 0) continue;
        ++out.eligible;
        if (dy * direction == truth) ++out.agree;
    }
    if (out.eligible > 0) out.rate = static_cast<double>(out.agree) / static_cast<double>(out.eligible);
    return out;
}

AteReport validate_pair(const ScmDefinition& scm, const ObservationTable& table, std::size_t x, std::size_t y,
                        std::size_t cf_units, std::uint64_t seed) {
    const auto& g = scm.graph();
    const AdjustmentSet adj = parent_adjustment(g, x, y);
    AteReport rep;
    rep.x = x;
    rep.y = y;
    rep.z = adj.z;
    rep.x1 = g.node(x).positive_value;
    rep.x0 = reference_value(g.node(x));
    const std::size_t y_pos = g.node(y).positive_value;
    rep.estimated = backdoor_estimate(table, g, adj, rep.x0, rep.x1, y_pos);
    rep.sigma = backdoor_sigma(table, g, adj, rep.x0, rep.x1, y_pos);
    rep.oracle = oracle_ate(scm, x, rep.x0, rep.x1, y, y_pos);
    rep.tolerance = std::max(0.02, 3.0 * rep.sigma);
    rep.abs_error = std::abs(rep.estimated - rep.oracle);
    rep.sign_match = rep.estimated * rep.oracle > 0.0 ||
                     (std::abs(rep.estimated) <= rep.tolerance && std::abs(rep.oracle) <= rep.tolerance);
    rep.magnitude_match = rep.abs_error <= rep.tolerance;
    rep.counterfactual = counterfactual_consistency(scm, x, y, cf_units, seed);
    return rep;
}

} // namespace asmc
