#include "asmc/outputs.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "asmc/errors.hpp"

namespace asmc {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("output", "cannot write " + path.string());
    return out;
}

void prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw StageError("output", "cannot create directory " + dir.string());
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw StageError("output", "failed writing " + path.string());
}

json topk_json(const TopKResult& t) {
    json j;
    j["readout"] = to_string(t.readout);
    j["k"] = t.k;
    j["tp"] = t.tp;
    j["fp"] = t.fp;
    j["precision_at_k"] = t.precision;
    j["recall_at_k"] = t.recall;
    j["warning"] = t.warning;
    j["selected"] = json::array();
    for (const auto& s : t.selected) j["selected"].push_back(s.name);
    j["pairs"] = json::array();
    for (const auto& s : t.ranked)
        j["pairs"].push_back({{"pair", s.name}, {"s_fwd", s.s_fwd}, {"s_rev", s.s_rev}, {"delta", s.delta}, {"rank", s.rank}});
    return j;
}

json counterfactual_json(const CounterfactualResult& c) {
    return {{"units", c.units},
            {"eligible", c.eligible},
            {"agree", c.agree},
            {"rate", c.rate ? json(*c.rate) : json(nullptr)}};
}

void write_summary_csv(const std::vector<ConditionSummary>& rows, const std::string& hash,
                       const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "# config_hash: " << hash << "\n";
    out << "condition,runs,tp_mean,fp_mean,dprop_mean,dprop_sd\n";
    for (const auto& c : rows)
        out << c.condition << ',' << c.runs << ',' << num(c.tp_mean) << ',' << num(c.fp_mean) << ','
            << num(c.dprop_mean) << ',' << num(c.dprop_sd) << '\n';
    finish(out, path);
}

} // namespace

void write_json(const json& doc, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    finish(out, path);
}

json report_json(const RunReport& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["run_id"] = r.run_id;
    j["config_hash"] = r.config_hash;
    j["condition"] = r.condition;
    j["seed"] = r.seed;
    j["variables"] = r.variables;
    auto edges = [&](const std::vector<Edge>& es) {
        json a = json::array();
        for (const auto& e : es) a.push_back({r.variables[e.parent], r.variables[e.child]});
        return a;
    };
    j["ground_truth"] = edges(r.truth);
    j["links"] = edges(r.links);
    j["table_rows"] = r.table_rows;
    j["readouts"] = json::object();
    if (r.synaptic) j["readouts"]["synaptic"] = topk_json(*r.synaptic);
    if (r.propagation) j["readouts"]["propagation"] = topk_json(*r.propagation);
    j["truth_dprop_mean"] = r.mean_truth_dprop();

    json b;
    b["warm_rounds"] = r.binding.warm_rounds;
    b["stabilized"] = r.binding.stabilized;
    b["round_betas"] = r.binding.round_betas;
    b["link_jitter"] = r.binding.link_jitter;
    b["records"] = r.binding.records.size();
    j["binding"] = b;
    j["formation"] = {{"rounds", r.formation_rounds}, {"late_overlap", r.late_overlap}};

    j["validation"] = json::array();
    for (const auto& v : r.validation) {
        json z = json::array();
        for (std::size_t i : v.z) z.push_back(r.variables[i]);
        j["validation"].push_back({{"x", r.variables[v.x]},
                                   {"y", r.variables[v.y]},
                                   {"z", z},
                                   {"x_reference", v.x0},
                                   {"x_treated", v.x1},
                                   {"estimated_ate", v.estimated},
                                   {"oracle_ate", v.oracle},
                                   {"sigma", v.sigma},
                                   {"tolerance", v.tolerance},
                                   {"abs_error", v.abs_error},
                                   {"sign_match", v.sign_match},
                                   {"magnitude_match", v.magnitude_match},
                                   {"counterfactual", counterfactual_json(v.counterfactual)}});
    }
    j["warnings"] = r.warnings;
    j["runtime_ms"] = r.runtime_ms;
    return j;
}

json summary_json(const RobustnessSummary& s) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["config_hash"] = s.config_hash;
    j["conditions"] = json::array();
    for (const auto& c : s.conditions)
        j["conditions"].push_back({{"condition", c.condition},
                                   {"config_hash", c.config_hash},
                                   {"runs", c.runs},
                                   {"failures", c.failures},
                                   {"tp_mean", c.tp_mean},
                                   {"fp_mean", c.fp_mean},
                                   {"dprop_mean", c.dprop_mean},
                                   {"dprop_sd", c.dprop_sd},
                                   {"pass_rate", c.pass_rate}});
    j["runs"] = json::array();
    for (const auto& r : s.runs)
        j["runs"].push_back({{"condition", r.condition},
                             {"config_hash", r.config_hash},
                             {"seed", r.seed},
                             {"ok", r.ok},
                             {"error", r.error},
                             {"tp", r.tp},
                             {"fp", r.fp},
                             {"tp_synaptic", r.tp_synaptic},
                             {"fp_synaptic", r.fp_synaptic},
                             {"dprop_mean", r.dprop_mean},
                             {"min_truth_dprop", r.min_truth_dprop},
                             {"max_reverse_overlap", r.max_reverse_overlap},
                             {"late_overlap", r.late_overlap}});
    return j;
}

json folds_json(const FoldReport& f) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["n_folds"] = f.n_folds;
    j["precision_mean"] = f.precision_mean;
    j["precision_var"] = f.precision_var;
    j["folds"] = json::array();
    for (std::size_t i = 0; i < f.reports.size(); ++i) {
        const auto& r = f.reports[i];
        json e{{"fold", i}, {"held_out_rows", f.assignments[i].size()}, {"seed", r.seed}, {"config_hash", r.config_hash}};
        if (r.synaptic) e["synaptic"] = {{"precision", r.synaptic->precision}, {"recall", r.synaptic->recall}};
        if (r.propagation) e["propagation"] = {{"precision", r.propagation->precision}, {"recall", r.propagation->recall}};
        j["folds"].push_back(e);
    }
    return j;
}

json diagnose_json(const DiagnoseReport& d, const std::string& config_hash) {
    return {{"schema_version", kSchemaVersion},
            {"config_hash", config_hash},
            {"seeds", d.seeds},
            {"adaptive_soft_late_overlap", d.adaptive_late},
            {"parallel_baseline_late_overlap", d.parallel_late},
            {"adaptive_soft_median", d.adaptive_median},
            {"parallel_baseline_median", d.parallel_median}};
}

void emit_outputs(const RunReport& r, const std::filesystem::path& dir) {
    prepare_dir(dir);
    write_json(report_json(r), dir / "report.json");

    {
        const auto path = dir / "ranked_pairs.csv";
        auto out = open_out(path);
        out << "# config_hash: " << r.config_hash << "\n";
        out << "pair,readout,s_fwd,s_rev,delta,rank,selected,is_ground_truth\n";
        for (const auto* t : {r.synaptic ? &*r.synaptic : nullptr, r.propagation ? &*r.propagation : nullptr}) {
            if (!t) continue;
            for (const auto& s : t->ranked) {
                bool sel = false;
                for (const auto& q : t->selected) sel = sel || (q.from == s.from && q.to == s.to);
                bool gt = false;
                for (const auto& e : r.truth) gt = gt || (e.parent == s.from && e.child == s.to);
                out << s.name << ',' << to_string(t->readout) << ',' << num(s.s_fwd) << ',' << num(s.s_rev) << ','
                    << num(s.delta) << ',' << s.rank << ',' << (sel ? 1 : 0) << ',' << (gt ? 1 : 0) << '\n';
            }
        }
        finish(out, path);
    }
    {
        const auto path = dir / "binding_trajectory.csv";
        auto out = open_out(path);
        out << "# config_hash: " << r.config_hash << "\n";
        out << "link,round,phase,step,beta,fwd_mean,rev_mean,overlap\n";
        for (const auto& rec : r.binding.records) {
            const Edge& e = r.links[rec.link];
            out << r.variables[e.parent] << "->" << r.variables[e.child] << ',' << rec.round << ',' << rec.phase << ','
                << rec.step << ',' << num(rec.beta) << ',' << num(rec.fwd_mean) << ',' << num(rec.rev_mean) << ','
                << num(rec.target_overlap) << '\n';
        }
        finish(out, path);
    }
    {
        const auto path = dir / "stability_heatmap.csv";
        auto out = open_out(path);
        out << "# config_hash: " << r.config_hash << "\n";
        out << "assembly,round,overlap\n";
        const auto m = stability_matrix(r.stability);
        for (std::size_t a = 0; a < m.labels.size(); ++a)
            for (std::size_t c = 0; c < m.values[a].size(); ++c)
                if (m.values[a][c] != StabilityMatrix::padding)
                    out << m.labels[a] << ',' << c + 1 << ',' << num(m.values[a][c]) << '\n';
        finish(out, path);
    }
    write_summary_csv(aggregate({summarize_run(r)}), r.config_hash, dir / "robustness_summary.csv");
}

void emit_outputs(const RobustnessSummary& s, const std::filesystem::path& dir) {
    prepare_dir(dir);
    write_json(summary_json(s), dir / "robustness.json");
    write_summary_csv(s.conditions, s.config_hash, dir / "robustness_summary.csv");
}

void emit_outputs(const FoldReport& f, const std::filesystem::path& dir) {
    prepare_dir(dir);
    write_json(folds_json(f), dir / "folds.json");
    for (std::size_t i = 0; i < f.reports.size(); ++i) emit_outputs(f.reports[i], dir / ("fold" + std::to_string(i)));
}

} // namespace asmc
