#include <algorithm>

#include "asmc/errors.hpp"
#include "asmc/scm.hpp"

namespace asmc {

namespace {

struct LinearMechanism {
    std::string child;
    double base = 0.0;
    /// Parent name -> signed shift of P(child = positive) when the parent is fully positive.
    std::vector<std::pair<std::string, double>> effects;
};

// Binary child; a parent's activation is state / (cardinality - 1) oriented towards its
// positive value, so a graded parent shifts probability proportionally.
Cpt linear_cpt(const DirectedGraph& g, std::size_t child, const LinearMechanism& m) {
    const auto& parents = g.parents(child);
    if (parents.size() != m.effects.size()) throw ConfigError("fixture effect list does not match parents");
    std::size_t rows = 1;
    for (std::size_t p : parents) rows *= g.node(p).cardinality;

    const auto& spec = g.node(child);
    Cpt cpt;
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t rest = r;
        double p1 = m.base;
        for (std::size_t q = parents.size(); q-- > 0;) {
            const auto& ps = g.node(parents[q]);
            const std::size_t state = rest % ps.cardinality;
            rest /= ps.cardinality;
            if (g.index_of(m.effects[q].first) != parents[q]) throw ConfigError("fixture parent order mismatch");
            const double top = static_cast<double>(ps.cardinality - 1);
            const double act = ps.positive_value == 0 ? (top - state) / top : state / top;
            p1 += m.effects[q].second * act;
        }
        p1 = std::clamp(p1, 0.05, 0.95);
        std::vector<double> row(spec.cardinality, 0.0);
        row[spec.positive_value] = p1;
        row[spec.positive_value == 0 ? 1 : 0] = 1.0 - p1;
        cpt.rows.push_back(std::move(row));
    }
    return cpt;
}

ScmDefinition build(std::vector<VariableSpec> vars, const std::vector<std::pair<std::string, std::string>>& edges,
                    const std::vector<std::pair<std::string, std::vector<double>>>& roots,
                    const std::vector<LinearMechanism>& children) {
    ScmDefinition scm(DirectedGraph::from_names(std::move(vars), edges));
    const auto& g = scm.graph();
    for (const auto& [name, dist] : roots) scm.set_mechanism(g.index_of(name), Cpt{{dist}});
    for (const auto& m : children) {
        const std::size_t c = g.index_of(m.child);
        scm.set_mechanism(c, linear_cpt(g, c, m));
    }
    return scm;
}

} // namespace

ScmDefinition builtin_alzheimer_scm() {
    std::vector<VariableSpec> vars = {
        {"APOE4", 2, 1},       {"Education", 3, 2},    {"PhysicalActivity", 2, 1}, {"Diet", 2, 1},
        {"SleepQuality", 2, 1}, {"Cholesterol", 2, 1},  {"Inflammation", 2, 1},    {"Amyloid", 2, 1},
        {"Tau", 2, 1},         {"CognitiveDecline", 2, 1},
    };
    std::vector<std::pair<std::string, std::string>> edges = {
        {"APOE4", "Amyloid"},
        {"Education", "PhysicalActivity"},
        {"Education", "Diet"},
        {"PhysicalActivity", "Cholesterol"},
        {"Diet", "Cholesterol"},
        {"SleepQuality", "Inflammation"},
        {"Cholesterol", "Inflammation"},
        {"Inflammation", "Amyloid"},
        {"Amyloid", "Tau"},
        {"Tau", "CognitiveDecline"},
        {"Amyloid", "CognitiveDecline"},
        {"Education", "CognitiveDecline"},
    };
    return build(std::move(vars), edges,
                 {{"APOE4", {0.75, 0.25}}, {"Education", {0.3, 0.4, 0.3}}, {"SleepQuality", {0.4, 0.6}}},
                 {
                     {"PhysicalActivity", 0.25, {{"Education", 0.45}}},
                     {"Diet", 0.3, {{"Education", 0.4}}},
                     {"Cholesterol", 0.75, {{"PhysicalActivity", -0.3}, {"Diet", -0.3}}},
                     {"Inflammation", 0.35, {{"SleepQuality", -0.25}, {"Cholesterol", 0.35}}},
                     {"Amyloid", 0.15, {{"APOE4", 0.4}, {"Inflammation", 0.3}}},
                     {"Tau", 0.15, {{"Amyloid", 0.6}}},
                     {"CognitiveDecline", 0.3, {{"Tau", 0.3}, {"Amyloid", 0.2}, {"Education", -0.25}}},
                 });
}

ScmDefinition builtin_dropout_scm() {
    std::vector<VariableSpec> vars = {
        {"SocioEconomic", 2, 1}, {"PriorGrades", 3, 2}, {"FamilySupport", 2, 1},
        {"Engagement", 2, 1},    {"Attendance", 2, 1},  {"Dropout", 2, 1},
    };
    std::vector<std::pair<std::string, std::string>> edges = {
        {"SocioEconomic", "PriorGrades"}, {"SocioEconomic", "FamilySupport"}, {"PriorGrades", "Engagement"},
        {"FamilySupport", "Engagement"},  {"Engagement", "Attendance"},       {"Attendance", "Dropout"},
        {"PriorGrades", "Dropout"},
    };
    ScmDefinition scm(DirectedGraph::from_names(std::move(vars), edges));
    const auto& g = scm.graph();
    scm.set_mechanism(g.index_of("SocioEconomic"), Cpt{{{0.5, 0.5}}});
    scm.set_mechanism(g.index_of("PriorGrades"), Cpt{{{0.4, 0.4, 0.2}, {0.2, 0.4, 0.4}}});
    const std::vector<LinearMechanism> rest = {
        {"FamilySupport", 0.3, {{"SocioEconomic", 0.4}}},
        {"Engagement", 0.2, {{"PriorGrades", 0.35}, {"FamilySupport", 0.3}}},
        {"Attendance", 0.25, {{"Engagement", 0.55}}},
        {"Dropout", 0.7, {{"Attendance", -0.35}, {"PriorGrades", -0.3}}},
    };
    for (const auto& m : rest) {
        const std::size_t c = g.index_of(m.child);
        scm.set_mechanism(c, linear_cpt(g, c, m));
    }
    return scm;
}

ScmDefinition builtin_scm(std::string_view name) {
    if (name == "alzheimer") return builtin_alzheimer_scm();
    if (name == "dropout") return builtin_dropout_scm();
    throw ConfigError("unknown builtin SCM: " + std::string(name));
}

} // namespace asmc
