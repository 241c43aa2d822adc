#include "asmc/assembly.hpp"

#include <algorithm>

#include "asmc/errors.hpp"

namespace asmc {

double winner_overlap(const WinnerSet& a, const WinnerSet& b) {
    if (a.area() != b.area()) throw ConfigError("overlap between winner sets of different areas");
    if (a.size() != b.size()) throw ConfigError("overlap between winner sets of different cardinality");
    if (a.empty()) throw ConfigError("overlap of empty winner sets is undefined");
    std::size_t shared = 0;
    auto x = a.indices().begin();
    auto y = b.indices().begin();
    while (x != a.indices().end() && y != b.indices().end()) {
        if (*x < *y) {
            ++x;
        } else if (*y < *x) {
            ++y;
        } else {
            ++shared;
            ++x;
            ++y;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(a.size());
}

void FormationConfig::validate() const {
    if (rounds < 1) throw ConfigError("formation rounds must be >= 1");
    if (!(overlap_thr >= 0.0 && overlap_thr <= 1.0)) throw ConfigError("overlap_thr must lie in [0, 1]");
    if (stable_window < 1) throw ConfigError("stable_window must be >= 1");
}

namespace {

void check_encoder(const Brain& brain, const Encoder& encoder, std::size_t variable) {
    if (variable >= brain.area_count()) throw ConfigError("no area for variable " + std::to_string(variable));
    if (encoder.input_size() != brain.config().input_size())
        throw ConfigError("encoder size does not match the brain's stimulus channel");
}

Polarity polarity_of(const VariableSpec& v, std::size_t value) {
    return value == v.positive_value ? Polarity::positive : Polarity::negative;
}

} // namespace

AssemblyStore::AssemblyStore(const DirectedGraph& graph, FormationConfig cfg) : graph_(graph), cfg_(cfg) {
    cfg_.validate();
    slots_.resize(graph_.size());
    for (std::size_t v = 0; v < graph_.size(); ++v) {
        const auto& spec = graph_.node(v);
        slots_[v].resize(spec.cardinality);
        for (std::size_t c = 0; c < spec.cardinality; ++c) {
            Slot& s = slots_[v][c];
            s.assembly.area = AreaId{spec.name, v};
            s.assembly.value = {v, c, polarity_of(spec, c)};
            s.exposure.label = spec.name + "=" + std::to_string(c);
        }
    }
}

AssemblyStore::Slot& AssemblyStore::slot(std::size_t variable, std::size_t value) {
    if (variable >= slots_.size() || value >= slots_[variable].size())
        throw ConfigError("unknown (variable, value) pair");
    return slots_[variable][value];
}

const AssemblyStore::Slot& AssemblyStore::slot(std::size_t variable, std::size_t value) const {
    return const_cast<AssemblyStore*>(this)->slot(variable, value);
}

ValueCategory AssemblyStore::category(std::size_t variable, std::size_t value) const {
    return slot(variable, value).assembly.value;
}

void AssemblyStore::expose(Slot& s, const WinnerSet& winners) {
    s.round_sum += s.last_exposure ? winner_overlap(*s.last_exposure, winners) : 0.0;
    ++s.round_count;
    s.last_exposure = winners;
}

void AssemblyStore::formation_pass(Brain& brain, const Encoder& encoder, Rng& rng) {
    ++passes_;
    for (std::size_t v = 0; v < slots_.size(); ++v) {
        check_encoder(brain, encoder, v);
        for (auto& s : slots_[v]) {
            const Source src = encoder.encode(s.assembly.value, rng);
            WinnerSet w = brain.project(std::span<const Source>(&src, 1), v, true);
            s.formation.push_back(s.formed ? winner_overlap(s.assembly.winners, w) : 0.0);
            expose(s, w);
            s.assembly.winners = std::move(w);
            s.formed = true;
            if (s.assembly.rounds_to_stabilize == 0 && s.formation.size() >= cfg_.stable_window &&
                std::all_of(s.formation.end() - static_cast<std::ptrdiff_t>(cfg_.stable_window), s.formation.end(),
                            [&](double x) { return x >= cfg_.overlap_thr; }))
                s.assembly.rounds_to_stabilize = passes_;
        }
    }
}

void AssemblyStore::record_exposure(const ValueCategory& value, const WinnerSet& winners) {
    Slot& s = slot(value.variable, value.value_index);
    if (winners.area() != value.variable) throw ConfigError("exposure recorded against the wrong area");
    expose(s, winners);
}

void AssemblyStore::close_round() {
    for (auto& row : slots_)
        for (auto& s : row) {
            if (s.round_count == 0) continue;
            s.exposure.overlaps.push_back(s.round_sum / static_cast<double>(s.round_count));
            s.round_sum = 0.0;
            s.round_count = 0;
        }
}

bool AssemblyStore::formed(std::size_t variable, std::size_t value) const { return slot(variable, value).formed; }

const Assembly& AssemblyStore::assembly(std::size_t variable, std::size_t value) const {
    const Slot& s = slot(variable, value);
    if (!s.formed) throw StageError("formation", "assembly " + s.exposure.label + " has not been formed");
    return s.assembly;
}

const Assembly& AssemblyStore::positive(std::size_t variable) const {
    if (variable >= graph_.size()) throw ConfigError("unknown variable index");
    return assembly(variable, graph_.node(variable).positive_value);
}

const std::vector<double>& AssemblyStore::formation_trace(std::size_t variable, std::size_t value) const {
    return slot(variable, value).formation;
}

const StabilityTrace& AssemblyStore::exposure_trace(std::size_t variable, std::size_t value) const {
    return slot(variable, value).exposure;
}

std::vector<StabilityTrace> AssemblyStore::exposure_traces() const {
    std::vector<StabilityTrace> out;
    for (const auto& row : slots_)
        for (const auto& s : row) out.push_back(s.exposure);
    return out;
}

double AssemblyStore::min_positive_overlap(std::span<const std::size_t> variables) const {
    double m = 1.0;
    for (std::size_t v : variables) {
        const auto& f = slot(v, graph_.node(v).positive_value).formation;
        m = std::min(m, f.empty() ? 0.0 : f.back());
    }
    return m;
}

double AssemblyStore::late_overlap(std::span<const std::size_t> variables, std::size_t window) const {
    if (window < 1) throw ConfigError("late-overlap window must be >= 1");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t v : variables) {
        const auto& o = slot(v, graph_.node(v).positive_value).exposure.overlaps;
        const std::size_t start = o.size() > window ? o.size() - window : 0;
        for (std::size_t i = start; i < o.size(); ++i, ++n) sum += o[i];
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::pair<Assembly, StabilityTrace> form_assembly(Brain& brain, const ValueCategory& value, const Encoder& encoder,
                                                  Rng& rng, const FormationConfig& cfg) {
    cfg.validate();
    check_encoder(brain, encoder, value.variable);
    Assembly a{brain.area(value.variable).id, value, {}, 0};
    StabilityTrace trace{a.area.name + "=" + std::to_string(value.value_index), {}};
    std::size_t streak = 0;
    for (std::size_t r = 1; r <= cfg.rounds; ++r) {
        const Source src = encoder.encode(value, rng);
        WinnerSet w = brain.project(std::span<const Source>(&src, 1), value.variable, true);
        const double ov = r == 1 ? 0.0 : winner_overlap(a.winners, w);
        trace.overlaps.push_back(ov);
        streak = ov >= cfg.overlap_thr ? streak + 1 : 0;
        if (a.rounds_to_stabilize == 0 && streak >= cfg.stable_window) a.rounds_to_stabilize = r;
        a.winners = std::move(w);
    }
    return {std::move(a), std::move(trace)};
}

StabilityMatrix stability_matrix(std::span<const StabilityTrace> traces) {
    StabilityMatrix m;
    std::size_t width = 0;
    for (const auto& t : traces) width = std::max(width, t.overlaps.size());
    for (const auto& t : traces) {
        m.labels.push_back(t.label);
        auto row = t.overlaps;
        row.resize(width, StabilityMatrix::padding);
        m.values.push_back(std::move(row));
    }
    return m;
}

} // namespace asmc
