#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asmc {

struct VariableSpec {
    std::string name;
    std::size_t cardinality = 2;
    /// Polarity map entry: the intervention-relevant state.
    std::size_t positive_value = 1;

    friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

struct Edge {
    std::size_t parent = 0;
    std::size_t child = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Ordered variables and ordered directed edges; acyclic by construction.
class DirectedGraph {
public:
    DirectedGraph() = default;
    /// Throws GraphError on cycles, self-loops, duplicate edges or out-of-range endpoints,
    /// ConfigError on invalid variable specs.
    DirectedGraph(std::vector<VariableSpec> nodes, std::vector<Edge> edges);

    static DirectedGraph from_names(std::vector<VariableSpec> nodes,
                                    const std::vector<std::pair<std::string, std::string>>& edges);

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<VariableSpec>& nodes() const noexcept { return nodes_; }
    const VariableSpec& node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws ConfigError for unknown names.
    std::size_t index_of(std::string_view name) const;

    /// Parents in edge-list order; this order also indexes mechanism rows.
    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
    /// Kahn order, always taking the lowest declared index available.
    const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }
    /// True if there is a directed path of length >= 1 from `from` to `to`.
    bool reaches(std::size_t from, std::size_t to) const;
    bool has_edge(std::size_t parent, std::size_t child) const;

    std::vector<std::size_t> cardinalities() const;
    std::vector<std::string> names() const;

    friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

private:
    std::vector<VariableSpec> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::size_t> topo_;
};

/// Conditional probability table. Row r lists P(state | parent configuration r), where r is
/// the mixed-radix number of the parent states with the first parent most significant.
struct Cpt {
    std::vector<std::vector<double>> rows;

    friend bool operator==(const Cpt&, const Cpt&) = default;
};

/// Clamp assignments: variable index -> state.
struct Intervention {
    std::map<std::size_t, std::size_t> assignments;

    bool empty() const noexcept { return assignments.empty(); }
};

class ScmDefinition {
public:
    ScmDefinition() = default;
    explicit ScmDefinition(DirectedGraph graph);

    const DirectedGraph& graph() const noexcept { return graph_; }

    /// Validates row count against parent arity and that every row sums to 1 +- 1e-12.
    void set_mechanism(std::size_t node, Cpt cpt);
    bool has_mechanism(std::size_t node) const { return mechanisms_.at(node).has_value(); }
    const Cpt& mechanism(std::size_t node) const;
    bool complete() const;

    /// Index of the CPT row selected by the parent states inside a full assignment.
    std::size_t parent_config(std::size_t node, std::span<const std::size_t> state) const;
    /// Inverse-CDF draw of `node` given the parent states and one uniform noise value.
    std::size_t draw(std::size_t node, std::span<const std::size_t> state, double u) const;
    /// Probability that `node` takes `value` given the parent states in `state`.
    double probability(std::size_t node, std::span<const std::size_t> state, std::size_t value) const;

    /// Builds an intervention from variable names; validates names and states.
    Intervention intervention(const std::vector<std::pair<std::string, std::size_t>>& clamps) const;
    void check(const Intervention& intervention) const;

    friend bool operator==(const ScmDefinition&, const ScmDefinition&) = default;

private:
    DirectedGraph graph_;
    std::vector<std::optional<Cpt>> mechanisms_;
};

/// Categorical samples; columns follow the graph's declared variable order.
class ObservationTable {
public:
    ObservationTable() = default;
    explicit ObservationTable(std::vector<VariableSpec> columns) : columns_(std::move(columns)) {}

    const std::vector<VariableSpec>& columns() const noexcept { return columns_; }
    std::size_t cols() const noexcept { return columns_.size(); }
    std::size_t rows() const noexcept { return columns_.empty() ? 0 : cells_.size() / columns_.size(); }

    std::size_t at(std::size_t r, std::size_t c) const { return cells_.at(r * cols() + c); }
    std::span<const std::uint16_t> row(std::size_t r) const {
        return {cells_.data() + r * cols(), cols()};
    }

    /// Throws ConfigError when the width or a state is out of range.
    void append(std::span<const std::size_t> values);
    ObservationTable subset(std::span<const std::size_t> row_indices) const;

    friend bool operator==(const ObservationTable&, const ObservationTable&) = default;

private:
    std::vector<VariableSpec> columns_;
    std::vector<std::uint16_t> cells_;
};

/// Samples plus the exogenous noise that produced them (one uniform per node per row).
struct NoisyTable {
    ObservationTable table;
    std::vector<double> noise; // rows x nodes, node order = declaration order

    std::span<const double> noise_row(std::size_t r) const {
        const std::size_t w = table.cols();
        return {noise.data() + r * w, w};
    }
};

/// Deterministic forward pass: clamped nodes take their assignment, every other node draws
/// from its mechanism with its own noise value, in topological order.
std::vector<std::size_t> propagate(const ScmDefinition& scm, std::span<const double> noise,
                                   const Intervention& intervention);

NoisyTable sample_with_noise(const ScmDefinition& scm, const Intervention& intervention, std::size_t n_rows,
                             std::uint64_t seed);
ObservationTable sample_observational(const ScmDefinition& scm, std::size_t n_rows, std::uint64_t seed);
ObservationTable sample_interventional(const ScmDefinition& scm, const Intervention& intervention,
                                       std::size_t n_rows, std::uint64_t seed);

/// Abduction by noise reuse: returns (factual, counterfactual) rows for one unit's noise.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
sample_counterfactual(const ScmDefinition& scm, std::span<const double> unit_noise, const Intervention& intervention);

/// Exact joint distribution (optionally under an intervention) by enumerating every state.
struct JointDistribution {
    std::vector<std::vector<std::size_t>> states;
    std::vector<double> probabilities;
};
JointDistribution enumerate_joint(const ScmDefinition& scm, const Intervention& intervention = {});

// Spec JSON: {"variables":[{"name","cardinality","positive_value"}], "edges":[["u","v"],...],
// optional "mechanisms":{"name":[[p0,p1,...], ...]}}. Array order is significant.
ScmDefinition load_spec(std::string_view json_text);
std::string emit_spec(const ScmDefinition& scm);

/// CSV with a header of variable names and integer state cells.
void write_table_csv(const ObservationTable& table, std::ostream& out);
ObservationTable read_table_csv(std::istream& in, const DirectedGraph& graph);

ScmDefinition builtin_alzheimer_scm();
/// Education / student-dropout fixture; same machinery, no acceptance targets.
ScmDefinition builtin_dropout_scm();
/// "alzheimer" or "dropout"; throws ConfigError otherwise.
ScmDefinition builtin_scm(std::string_view name);

} // namespace asmc
