#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "asmc/errors.hpp"
#include "asmc/scm.hpp"

namespace asmc {

using nlohmann::json;

ScmDefinition load_spec(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("variables") || !doc["variables"].is_array())
        throw ConfigError("spec needs a \"variables\" array");

    std::vector<VariableSpec> vars;
    try {
        for (const auto& v : doc["variables"]) {
            VariableSpec s;
            s.name = v.at("name").get<std::string>();
            s.cardinality = v.at("cardinality").get<std::size_t>();
            if (!v.contains("positive_value")) throw ConfigError("missing polarity entry for " + s.name);
            s.positive_value = v.at("positive_value").get<std::size_t>();
            vars.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed variable entry: ") + e.what());
    }

    std::vector<std::pair<std::string, std::string>> edges;
    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) throw ConfigError("\"edges\" must be an array");
        for (const auto& e : doc["edges"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
                throw ConfigError("each edge must be a [\"parent\", \"child\"] pair");
            edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
    }

    ScmDefinition scm(DirectedGraph::from_names(std::move(vars), edges));
    if (doc.contains("mechanisms")) {
        const auto& mech = doc["mechanisms"];
        if (!mech.is_object()) throw ConfigError("\"mechanisms\" must be an object keyed by variable");
        for (const auto& [name, rows] : mech.items()) {
            Cpt cpt;
            try {
                cpt.rows = rows.get<std::vector<std::vector<double>>>();
            } catch (const json::exception& e) {
                throw ConfigError("mechanism of " + name + " must be a list of probability rows");
            }
            scm.set_mechanism(scm.graph().index_of(name), std::move(cpt));
        }
    }
    return scm;
}

std::string emit_spec(const ScmDefinition& scm) {
    const auto& g = scm.graph();
    json doc;
    doc["variables"] = json::array();
    for (const auto& v : g.nodes())
        doc["variables"].push_back({{"name", v.name}, {"cardinality", v.cardinality}, {"positive_value", v.positive_value}});
    doc["edges"] = json::array();
    for (const auto& e : g.edges()) doc["edges"].push_back({g.node(e.parent).name, g.node(e.child).name});
    json mech = json::object();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (scm.has_mechanism(i)) mech[g.node(i).name] = scm.mechanism(i).rows;
    if (!mech.empty()) doc["mechanisms"] = std::move(mech);
    return doc.dump(2) + "\n";
}

void write_table_csv(const ObservationTable& table, std::ostream& out) {
    for (std::size_t c = 0; c < table.cols(); ++c) out << (c ? "," : "") << table.columns()[c].name;
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        auto row = table.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

ObservationTable read_table_csv(std::istream& in, const DirectedGraph& graph) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("table CSV is empty");
    const auto header = split_csv(line);
    if (header != graph.names()) throw ConfigError("table CSV header must list the variables in declared order");

    ObservationTable table(graph.nodes());
    std::vector<std::size_t> values(graph.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != graph.size())
            throw ConfigError("table CSV line " + std::to_string(line_no) + " has the wrong number of cells");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::size_t pos = 0;
            unsigned long v = 0;
            try {
                v = std::stoul(cells[c], &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != cells[c].size() || cells[c][0] == '-')
                throw ConfigError("table CSV line " + std::to_string(line_no) + ": non-integer cell");
            values[c] = v;
        }
        table.append(values);
    }
    return table;
}

} // namespace asmc
