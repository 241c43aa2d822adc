#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asmc/brain.hpp"
#include "asmc/encoding.hpp"
#include "asmc/scm.hpp"

namespace asmc {

/// |a ∩ b| / k. Throws ConfigError when the sets differ in area or cardinality, or are empty.
double winner_overlap(const WinnerSet& a, const WinnerSet& b);

struct Assembly {
    AreaId area;
    ValueCategory value;
    WinnerSet winners;
    /// Round at which overlap first held >= threshold for the stable window; 0 if never.
    std::size_t rounds_to_stabilize = 0;
};

/// Per-round overlap values for one assembly.
struct StabilityTrace {
    std::string label;
    std::vector<double> overlaps;
};

struct FormationConfig {
    std::size_t rounds = 30;
    double overlap_thr = 0.9;
    std::size_t stable_window = 3;

    void validate() const;
};

/// Assemblies for every (variable, value) of a graph, kept up to date by repeated exposure.
///
/// Two traces are kept per assembly. The formation trace holds, per formation pass, the
/// overlap of the new winners with the previously stored assembly. The exposure trace
/// holds, per round, the mean overlap between consecutive winner sets over every exposure
/// of that value in the round (formation passes and co-activations alike); it is what the
/// stability heatmap shows and what measures winner drift. A first-ever exposure counts 0.
class AssemblyStore {
public:
    AssemblyStore(const DirectedGraph& graph, FormationConfig cfg);

    /// Presents every (variable, value) once, in declared order, projecting the encoded
    /// stimulus into the variable's area with plasticity on. Stores the winners.
    void formation_pass(Brain& brain, const Encoder& encoder, Rng& rng);
    /// Counts a projection of `value` outside a formation pass as an exposure.
    void record_exposure(const ValueCategory& value, const WinnerSet& winners);
    /// Ends the current round of the exposure trace.
    void close_round();

    std::size_t variables() const noexcept { return slots_.size(); }
    std::size_t cardinality(std::size_t variable) const { return slots_.at(variable).size(); }
    ValueCategory category(std::size_t variable, std::size_t value) const;
    bool formed(std::size_t variable, std::size_t value) const;
    /// Throws StageError("formation") for an unformed assembly.
    const Assembly& assembly(std::size_t variable, std::size_t value) const;
    const Assembly& positive(std::size_t variable) const;

    const std::vector<double>& formation_trace(std::size_t variable, std::size_t value) const;
    const StabilityTrace& exposure_trace(std::size_t variable, std::size_t value) const;
    std::vector<StabilityTrace> exposure_traces() const;
    std::size_t passes() const noexcept { return passes_; }
    const FormationConfig& config() const noexcept { return cfg_; }

    /// Minimum over `variables` of the last formation overlap of their positive assemblies.
    double min_positive_overlap(std::span<const std::size_t> variables) const;
    /// Mean exposure overlap of the positive assemblies of `variables` over the last `window` rounds.
    double late_overlap(std::span<const std::size_t> variables, std::size_t window) const;

private:
    struct Slot {
        Assembly assembly;
        bool formed = false;
        std::vector<double> formation;
        StabilityTrace exposure;
        std::optional<WinnerSet> last_exposure;
        double round_sum = 0.0;
        std::size_t round_count = 0;
    };
    Slot& slot(std::size_t variable, std::size_t value);
    const Slot& slot(std::size_t variable, std::size_t value) const;
    void expose(Slot& s, const WinnerSet& winners);

    DirectedGraph graph_;
    FormationConfig cfg_;
    std::vector<std::vector<Slot>> slots_;
    std::size_t passes_ = 0;
};

/// Forms a single assembly in isolation: `rounds` exposures of `value`, each projecting the
/// encoded stimulus into the value's area with plasticity on. The trace holds
/// overlap(winners_t, winners_{t-1}) with the first round recorded as 0.
std::pair<Assembly, StabilityTrace> form_assembly(Brain& brain, const ValueCategory& value, const Encoder& encoder,
                                                  Rng& rng, const FormationConfig& cfg);

/// Rectangular assembly x round export; ragged rows are padded with `padding`.
struct StabilityMatrix {
    static constexpr double padding = -1.0;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;
};
StabilityMatrix stability_matrix(std::span<const StabilityTrace> traces);

} // namespace asmc
