#include "asmc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "asmc/errors.hpp"

namespace asmc {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

using NamePairs = std::vector<std::pair<std::string, std::string>>;

NamePairs read_pairs(const json& obj, const char* key, const std::string& where) {
    NamePairs out;
    if (!obj.contains(key)) return out;
    const auto& arr = obj.at(key);
    if (!arr.is_array()) throw ConfigError(where + "." + key + " must be an array of [from, to] pairs");
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
            throw ConfigError(where + "." + key + " must be an array of [from, to] pairs");
        out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
    return out;
}

json pairs_json(const NamePairs& pairs) {
    json arr = json::array();
    for (const auto& [a, b] : pairs) arr.push_back({a, b});
    return arr;
}

} // namespace

void RunConfig::validate() const {
    brain.validate();
    schedule.validate();
    if (encoder.mode == EncoderMode::rate) {
        encoder.rate.validate();
        if (encoder.separation && !(*encoder.separation > 1.0)) throw ConfigError("separation factor must be > 1");
    } else {
        encoder.index.validate();
    }
    if (formation_rounds < 1) throw ConfigError("formation.rounds must be >= 1");
    if (exposures_per_step < 1) throw ConfigError("binding.exposures_per_step must be >= 1");
    if (!(bind_jitter >= 0.0 && bind_jitter < 1.0)) throw ConfigError("binding.jitter must lie in [0, 1)");
    if (readout.k && *readout.k == 0) throw ConfigError("readout.k must be >= 1");
    if (!(readout.ratio_threshold > 0.0) || !std::isfinite(readout.ratio_threshold))
        throw ConfigError("readout.ratio_threshold must be positive");
    if (!readout.synaptic && !readout.propagation) throw ConfigError("at least one readout must be enabled");
    if (table_path.empty() && table_rows < 1) throw ConfigError("table.rows must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    for (const auto& p : robustness.protocols)
        if (p != "R1" && p != "R2" && p != "R3") throw ConfigError("unknown robustness protocol " + p);
    for (double f : robustness.separations)
        if (!(f > 1.0)) throw ConfigError("robustness separations must be > 1");
    if (!(robustness.r2_jitter >= 0.0 && robustness.r2_jitter < 1.0))
        throw ConfigError("robustness.r2_jitter must lie in [0, 1)");
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(doc, "config",
              {"condition", "seed", "scm", "table", "encoder", "brain", "formation", "schedule", "binding", "readout",
               "validation", "robustness", "folds", "threads"});
    RunConfig c;
    read(doc, "condition", c.condition, "config");
    read(doc, "seed", c.seed, "config");
    read(doc, "folds", c.folds, "config");
    read(doc, "threads", c.threads, "config");

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };

    if (doc.contains("scm")) {
        const auto& s = doc["scm"];
        only_keys(s, "scm", {"builtin", "spec"});
        read(s, "builtin", c.builtin, "scm");
        std::string spec;
        read(s, "spec", spec, "scm");
        if (!spec.empty()) c.spec_path = resolve(spec);
    }
    if (doc.contains("table")) {
        const auto& t = doc["table"];
        only_keys(t, "table", {"path", "rows"});
        std::string path;
        read(t, "path", path, "table");
        if (!path.empty()) c.table_path = resolve(path);
        read(t, "rows", c.table_rows, "table");
    }
    if (doc.contains("encoder")) {
        const auto& e = doc["encoder"];
        only_keys(e, "encoder", {"mode", "p_positive", "p_negative", "separation", "base_k", "step", "seed_offset"});
        std::string mode = "rate";
        read(e, "mode", mode, "encoder");
        if (mode == "rate")
            c.encoder.mode = EncoderMode::rate;
        else if (mode == "index")
            c.encoder.mode = EncoderMode::index;
        else
            throw ConfigError("encoder.mode must be \"rate\" or \"index\"");
        read(e, "p_positive", c.encoder.rate.p_positive, "encoder");
        read(e, "p_negative", c.encoder.rate.p_negative, "encoder");
        if (e.contains("separation") && !e["separation"].is_null()) {
            double f = 0.0;
            read(e, "separation", f, "encoder");
            c.encoder.separation = f;
        }
        read(e, "base_k", c.encoder.index.base_k, "encoder");
        read(e, "step", c.encoder.index.step, "encoder");
        read(e, "seed_offset", c.encoder.seed_offset, "encoder");
    }
    if (doc.contains("brain")) {
        const auto& b = doc["brain"];
        only_keys(b, "brain", {"n_per_area", "k", "n_input", "connect_p", "w_init", "baseline_beta", "input_beta"});
        read(b, "n_per_area", c.brain.n_per_area, "brain");
        read(b, "k", c.brain.k, "brain");
        read(b, "n_input", c.brain.n_input, "brain");
        read(b, "connect_p", c.brain.connect_p, "brain");
        read(b, "w_init", c.brain.w_init, "brain");
        read(b, "baseline_beta", c.brain.baseline_beta, "brain");
        read(b, "input_beta", c.brain.input_beta, "brain");
    }
    if (doc.contains("formation")) {
        const auto& f = doc["formation"];
        only_keys(f, "formation", {"rounds"});
        read(f, "rounds", c.formation_rounds, "formation");
    }
    if (doc.contains("schedule")) {
        const auto& s = doc["schedule"];
        only_keys(s, "schedule",
                  {"mode", "warm_beta", "max_beta", "ramp_steps", "overlap_thr", "stable_window", "warmup_cap"});
        std::string mode = to_string(c.schedule.mode);
        read(s, "mode", mode, "schedule");
        c.schedule.mode = parse_schedule_mode(mode);
        read(s, "warm_beta", c.schedule.warm_beta, "schedule");
        read(s, "max_beta", c.schedule.max_beta, "schedule");
        read(s, "ramp_steps", c.schedule.ramp_steps, "schedule");
        read(s, "overlap_thr", c.schedule.overlap_thr, "schedule");
        read(s, "stable_window", c.schedule.stable_window, "schedule");
        read(s, "warmup_cap", c.schedule.warmup_cap, "schedule");
    }
    if (doc.contains("binding")) {
        const auto& b = doc["binding"];
        only_keys(b, "binding", {"exposures_per_step", "enabled", "jitter", "parallel_rounds", "links"});
        read(b, "exposures_per_step", c.exposures_per_step, "binding");
        read(b, "enabled", c.binding_enabled, "binding");
        read(b, "jitter", c.bind_jitter, "binding");
        read(b, "parallel_rounds", c.parallel_rounds, "binding");
        c.links = read_pairs(b, "links", "binding");
    }
    if (doc.contains("readout")) {
        const auto& r = doc["readout"];
        only_keys(r, "readout", {"k", "ratio_threshold", "which"});
        if (r.contains("k") && !r["k"].is_null()) {
            std::size_t k = 0;
            read(r, "k", k, "readout");
            c.readout.k = k;
        }
        read(r, "ratio_threshold", c.readout.ratio_threshold, "readout");
        std::string which = "both";
        read(r, "which", which, "readout");
        if (which == "both") {
            c.readout.synaptic = c.readout.propagation = true;
        } else if (which == "synaptic") {
            c.readout.synaptic = true;
            c.readout.propagation = false;
        } else if (which == "propagation") {
            c.readout.synaptic = false;
            c.readout.propagation = true;
        } else {
            throw ConfigError("readout.which must be synaptic, propagation or both");
        }
    }
    if (doc.contains("validation")) {
        const auto& v = doc["validation"];
        only_keys(v, "validation", {"enabled", "pairs", "cf_units"});
        read(v, "enabled", c.validation.enabled, "validation");
        c.validation.pairs = read_pairs(v, "pairs", "validation");
        read(v, "cf_units", c.validation.cf_units, "validation");
    }
    if (doc.contains("robustness")) {
        const auto& r = doc["robustness"];
        only_keys(r, "robustness", {"protocols", "seeds", "separations", "r1_seed_offset", "r2_jitter"});
        read(r, "protocols", c.robustness.protocols, "robustness");
        read(r, "seeds", c.robustness.seeds, "robustness");
        read(r, "separations", c.robustness.separations, "robustness");
        read(r, "r1_seed_offset", c.robustness.r1_seed_offset, "robustness");
        read(r, "r2_jitter", c.robustness.r2_jitter, "robustness");
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& c, bool include_seed) {
    json doc;
    doc["condition"] = c.condition;
    if (include_seed) doc["seed"] = c.seed;
    doc["scm"] = {{"builtin", c.builtin}, {"spec", c.spec_path.generic_string()}};
    doc["table"] = {{"path", c.table_path.generic_string()}, {"rows", c.table_rows}};
    json enc = {{"mode", c.encoder.mode == EncoderMode::rate ? "rate" : "index"},
                {"p_positive", c.encoder.rate.p_positive},
                {"p_negative", c.encoder.rate.p_negative},
                {"base_k", c.encoder.index.base_k},
                {"step", c.encoder.index.step},
                {"seed_offset", c.encoder.seed_offset}};
    enc["separation"] = c.encoder.separation ? json(*c.encoder.separation) : json(nullptr);
    doc["encoder"] = enc;
    doc["brain"] = {{"n_per_area", c.brain.n_per_area}, {"k", c.brain.k},
                    {"n_input", c.brain.n_input},       {"connect_p", c.brain.connect_p},
                    {"w_init", c.brain.w_init},         {"baseline_beta", c.brain.baseline_beta},
                    {"input_beta", c.brain.input_beta}};
    doc["formation"] = {{"rounds", c.formation_rounds}};
    doc["schedule"] = {{"mode", to_string(c.schedule.mode)},
                       {"warm_beta", c.schedule.warm_beta},
                       {"max_beta", c.schedule.max_beta},
                       {"ramp_steps", c.schedule.ramp_steps},
                       {"overlap_thr", c.schedule.overlap_thr},
                       {"stable_window", c.schedule.stable_window},
                       {"warmup_cap", c.schedule.warmup_cap}};
    doc["binding"] = {{"exposures_per_step", c.exposures_per_step},
                      {"enabled", c.binding_enabled},
                      {"jitter", c.bind_jitter},
                      {"parallel_rounds", c.parallel_rounds},
                      {"links", pairs_json(c.links)}};
    const char* which = c.readout.synaptic && c.readout.propagation ? "both"
                        : c.readout.synaptic                         ? "synaptic"
                                                                     : "propagation";
    doc["readout"] = {{"k", c.readout.k ? json(*c.readout.k) : json(nullptr)},
                      {"ratio_threshold", c.readout.ratio_threshold},
                      {"which", which}};
    doc["validation"] = {{"enabled", c.validation.enabled},
                         {"pairs", pairs_json(c.validation.pairs)},
                         {"cf_units", c.validation.cf_units}};
    doc["robustness"] = {{"protocols", c.robustness.protocols},
                         {"seeds", c.robustness.seeds},
                         {"separations", c.robustness.separations},
                         {"r1_seed_offset", c.robustness.r1_seed_offset},
                         {"r2_jitter", c.robustness.r2_jitter}};
    doc["folds"] = c.folds;
    doc["threads"] = c.threads;
    return doc.dump();
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

// Worker count never changes results, so it stays out of the hash.
RunConfig hashable(RunConfig cfg) {
    cfg.threads = 1;
    return cfg;
}

} // namespace

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a(config_to_json(hashable(cfg), false))); }

std::string run_id(const RunConfig& cfg) { return hex64(fnv1a(config_to_json(hashable(cfg), true))); }

} // namespace asmc
