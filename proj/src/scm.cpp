#include "asmc/scm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "asmc/errors.hpp"
#include "asmc/rng.hpp"

namespace asmc {

DirectedGraph::DirectedGraph(std::vector<VariableSpec> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::set<std::string> names;
    for (const auto& v : nodes_) {
        if (v.name.empty()) throw ConfigError("variable name must be non-empty");
        if (!names.insert(v.name).second) throw ConfigError("duplicate variable: " + v.name);
        if (v.cardinality < 2) throw ConfigError("variable " + v.name + " needs cardinality >= 2");
        if (v.cardinality > 65535) throw ConfigError("variable " + v.name + " has too many states");
        if (v.positive_value >= v.cardinality)
            throw ConfigError("positive_value of " + v.name + " is out of range");
    }
    const std::size_t n = nodes_.size();
    parents_.assign(n, {});
    children_.assign(n, {});
    std::set<Edge> seen;
    for (const Edge& e : edges_) {
        if (e.parent >= n || e.child >= n) throw GraphError("edge endpoint out of range");
        if (e.parent == e.child) throw GraphError("self-loop on " + nodes_[e.parent].name);
        if (!seen.insert(e).second)
            throw GraphError("duplicate edge " + nodes_[e.parent].name + " -> " + nodes_[e.child].name);
        parents_[e.child].push_back(e.parent);
        children_[e.parent].push_back(e.child);
    }

    std::vector<std::size_t> indegree(n);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = parents_[i].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push(i);
    while (!ready.empty()) {
        const std::size_t i = ready.top();
        ready.pop();
        topo_.push_back(i);
        for (std::size_t c : children_[i])
            if (--indegree[c] == 0) ready.push(c);
    }
    if (topo_.size() != n) throw GraphError("cycle detected in edge list");
}

DirectedGraph DirectedGraph::from_names(std::vector<VariableSpec> nodes,
                                        const std::vector<std::pair<std::string, std::string>>& edges) {
    auto lookup = [&](const std::string& name) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].name == name) return i;
        throw GraphError("unknown variable in edge list: " + name);
    };
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const auto& [u, v] : edges) out.push_back({lookup(u), lookup(v)});
    return DirectedGraph(std::move(nodes), std::move(out));
}

std::optional<std::size_t> DirectedGraph::find(std::string_view name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].name == name) return i;
    return std::nullopt;
}

std::size_t DirectedGraph::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw ConfigError("unknown variable: " + std::string(name));
}

bool DirectedGraph::reaches(std::size_t from, std::size_t to) const {
    std::vector<char> seen(size(), 0);
    std::vector<std::size_t> stack(children_.at(from).begin(), children_.at(from).end());
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        if (i == to) return true;
        if (seen[i]) continue;
        seen[i] = 1;
        stack.insert(stack.end(), children_[i].begin(), children_[i].end());
    }
    return false;
}

bool DirectedGraph::has_edge(std::size_t parent, std::size_t child) const {
    return std::find(edges_.begin(), edges_.end(), Edge{parent, child}) != edges_.end();
}

std::vector<std::size_t> DirectedGraph::cardinalities() const {
    std::vector<std::size_t> out;
    for (const auto& v : nodes_) out.push_back(v.cardinality);
    return out;
}

std::vector<std::string> DirectedGraph::names() const {
    std::vector<std::string> out;
    for (const auto& v : nodes_) out.push_back(v.name);
    return out;
}

ScmDefinition::ScmDefinition(DirectedGraph graph) : graph_(std::move(graph)), mechanisms_(graph_.size()) {}

void ScmDefinition::set_mechanism(std::size_t node, Cpt cpt) {
    if (node >= graph_.size()) throw ConfigError("mechanism for unknown node");
    const auto& spec = graph_.node(node);
    std::size_t expected = 1;
    for (std::size_t p : graph_.parents(node)) expected *= graph_.node(p).cardinality;
    if (cpt.rows.size() != expected)
        throw ConfigError("mechanism of " + spec.name + " has " + std::to_string(cpt.rows.size()) +
                          " rows; parent arity requires " + std::to_string(expected));
    for (const auto& row : cpt.rows) {
        if (row.size() != spec.cardinality)
            throw ConfigError("mechanism row of " + spec.name + " has the wrong number of states");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("mechanism of " + spec.name + " has p outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("mechanism row of " + spec.name + " does not sum to 1");
    }
    mechanisms_[node] = std::move(cpt);
}

const Cpt& ScmDefinition::mechanism(std::size_t node) const {
    const auto& m = mechanisms_.at(node);
    if (!m) throw ConfigError("missing mechanism for " + graph_.node(node).name);
    return *m;
}

bool ScmDefinition::complete() const {
    return std::all_of(mechanisms_.begin(), mechanisms_.end(), [](const auto& m) { return m.has_value(); });
}

std::size_t ScmDefinition::parent_config(std::size_t node, std::span<const std::size_t> state) const {
    std::size_t r = 0;
    for (std::size_t p : graph_.parents(node)) r = r * graph_.node(p).cardinality + state[p];
    return r;
}

std::size_t ScmDefinition::draw(std::size_t node, std::span<const std::size_t> state, double u) const {
    const auto& row = mechanism(node).rows[parent_config(node, state)];
    double cum = 0.0;
    for (std::size_t s = 0; s + 1 < row.size(); ++s) {
        cum += row[s];
        if (u < cum) return s;
    }
    return row.size() - 1;
}

double ScmDefinition::probability(std::size_t node, std::span<const std::size_t> state, std::size_t value) const {
    return mechanism(node).rows[parent_config(node, state)].at(value);
}

Intervention ScmDefinition::intervention(const std::vector<std::pair<std::string, std::size_t>>& clamps) const {
    Intervention out;
    for (const auto& [name, value] : clamps) out.assignments[graph_.index_of(name)] = value;
    check(out);
    return out;
}

void ScmDefinition::check(const Intervention& intervention) const {
    for (const auto& [var, value] : intervention.assignments) {
        if (var >= graph_.size()) throw ConfigError("intervention on unknown variable");
        if (value >= graph_.node(var).cardinality)
            throw ConfigError("intervention state out of range for " + graph_.node(var).name);
    }
}

void ObservationTable::append(std::span<const std::size_t> values) {
    if (values.size() != cols()) throw ConfigError("row width does not match the table");
    for (std::size_t c = 0; c < values.size(); ++c)
        if (values[c] >= columns_[c].cardinality)
            throw ConfigError("cell out of range in column " + columns_[c].name);
    for (std::size_t v : values) cells_.push_back(static_cast<std::uint16_t>(v));
}

ObservationTable ObservationTable::subset(std::span<const std::size_t> row_indices) const {
    ObservationTable out(columns_);
    out.cells_.reserve(row_indices.size() * cols());
    for (std::size_t r : row_indices) {
        if (r >= rows()) throw ConfigError("row index out of range");
        auto src = row(r);
        out.cells_.insert(out.cells_.end(), src.begin(), src.end());
    }
    return out;
}

std::vector<std::size_t> propagate(const ScmDefinition& scm, std::span<const double> noise,
                                   const Intervention& intervention) {
    const auto& g = scm.graph();
    if (noise.size() != g.size()) throw ConfigError("noise record missing or of the wrong width");
    scm.check(intervention);
    std::vector<std::size_t> state(g.size(), 0);
    for (std::size_t node : g.topological_order()) {
        if (auto it = intervention.assignments.find(node); it != intervention.assignments.end())
            state[node] = it->second;
        else
            state[node] = scm.draw(node, state, noise[node]);
    }
    return state;
}

NoisyTable sample_with_noise(const ScmDefinition& scm, const Intervention& intervention, std::size_t n_rows,
                             std::uint64_t seed) {
    if (!scm.complete()) {
        for (std::size_t i = 0; i < scm.graph().size(); ++i) scm.mechanism(i); // throws with the name
    }
    scm.check(intervention);
    const std::size_t w = scm.graph().size();
    NoisyTable out{ObservationTable(scm.graph().nodes()), {}};
    out.noise.resize(n_rows * w);
    Rng rng(mix_seed(seed, stream::table));
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::span<double> u(out.noise.data() + r * w, w);
        for (double& x : u) x = uniform01(rng);
        out.table.append(propagate(scm, u, intervention));
    }
    return out;
}

ObservationTable sample_observational(const ScmDefinition& scm, std::size_t n_rows, std::uint64_t seed) {
    return sample_with_noise(scm, {}, n_rows, seed).table;
}

ObservationTable sample_interventional(const ScmDefinition& scm, const Intervention& intervention,
                                       std::size_t n_rows, std::uint64_t seed) {
    return sample_with_noise(scm, intervention, n_rows, seed).table;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
sample_counterfactual(const ScmDefinition& scm, std::span<const double> unit_noise, const Intervention& intervention) {
    return {propagate(scm, unit_noise, {}), propagate(scm, unit_noise, intervention)};
}

JointDistribution enumerate_joint(const ScmDefinition& scm, const Intervention& intervention) {
    const auto& g = scm.graph();
    scm.check(intervention);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!intervention.assignments.count(i)) scm.mechanism(i);

    std::size_t total = 1;
    for (const auto& v : g.nodes()) {
        total *= v.cardinality;
        if (total > (std::size_t{1} << 22)) throw ConfigError("joint state space too large to enumerate");
    }
    JointDistribution out;
    std::vector<std::size_t> state(g.size(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (std::size_t i = g.size(); i-- > 0;) {
            state[i] = rest % g.node(i).cardinality;
            rest /= g.node(i).cardinality;
        }
        double p = 1.0;
        for (std::size_t i = 0; i < g.size() && p > 0.0; ++i) {
            if (auto it = intervention.assignments.find(i); it != intervention.assignments.end())
                p *= state[i] == it->second ? 1.0 : 0.0;
            else
                p *= scm.probability(i, state, state[i]);
        }
        if (p > 0.0) {
            out.states.push_back(state);
            out.probabilities.push_back(p);
        }
    }
    return out;
}

} // namespace asmc
