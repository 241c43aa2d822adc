#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asmc/matrix.hpp"
#include "asmc/rng.hpp"

namespace asmc {

using Neuron = std::uint32_t;

/// Name plus ordinal position in the brain's fixed area ordering.
struct AreaId {
    std::string name;
    std::size_t index = 0;

    friend bool operator==(const AreaId&, const AreaId&) = default;
};

/// Sorted, duplicate-free set of active neuron indices in one area.
class WinnerSet {
public:
    WinnerSet() = default;

    /// Sorts `indices`; throws ConfigError on duplicates.
    WinnerSet(std::size_t area, std::vector<Neuron> indices);

    std::size_t area() const noexcept { return area_; }
    std::span<const Neuron> indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    bool contains(Neuron n) const;

    friend bool operator==(const WinnerSet&, const WinnerSet&) = default;

private:
    std::size_t area_ = 0;
    std::vector<Neuron> indices_;
};

/// Pattern injected through an area's stimulus channel. `area` is the receiving area;
/// `active` indexes the stimulus neurons (range [0, n_input)).
struct ExternalInput {
    std::size_t area = 0;
    std::vector<Neuron> active;
};

/// A projection source: either the active winners of another area or a stimulus pattern.
using Source = std::variant<WinnerSet, ExternalInput>;

struct BrainConfig {
    std::size_t n_per_area = 1000;
    std::size_t k = 100;
    /// Stimulus channel size per area; 0 means n_per_area.
    std::size_t n_input = 0;
    double connect_p = 0.1;
    double w_init = 1.0;
    /// Plasticity gain of inter-area connectomes outside binding windows.
    double baseline_beta = 0.0003;
    /// Plasticity gain of stimulus -> area connectomes (assembly formation).
    double input_beta = 0.1;
    std::uint64_t seed = 0;

    std::size_t input_size() const noexcept { return n_input == 0 ? n_per_area : n_input; }
    void validate() const;
};

struct NeuronArea {
    AreaId id;
    std::size_t n = 0;
    std::size_t k = 0;
    std::optional<WinnerSet> current_winners;
};

/// Directed synapses from one neuron population onto an area.
struct Connectome {
    /// Source area index, or no value for a stimulus channel.
    std::optional<std::size_t> from;
    std::size_t to = 0;
    WeightMatrix weights;
    double beta = 0.0;
    double baseline_beta = 0.0;
};

/// k highest entries of `input`, ties broken towards the lowest index; result sorted ascending.
std::vector<Neuron> select_top_k(std::span<const double> input, std::size_t k);

/// W[j,i] *= (1 + beta) for every j in `src`, i in `dst`. No-op when beta == 0.
void hebbian_update(Connectome& connectome, std::span<const Neuron> src, std::span<const Neuron> dst);

/// Read-only copy of a rows x cols slice of a connectome.
class Submatrix {
public:
    Submatrix(std::size_t rows, std::size_t cols) : values_(rows, cols) {}

    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t cols() const noexcept { return values_.cols(); }
    float operator()(std::size_t r, std::size_t c) const { return values_(r, c); }
    double mean() const;

private:
    friend class Brain;
    WeightMatrix values_;
};

/// Neuron areas joined by dense connectomes for every ordered pair of distinct areas, plus a
/// stimulus channel per area. Single-threaded mutable state; movable between threads.
class Brain {
public:
    /// Builds every connectome from the seeded RNG. Throws ConfigError on invalid
    /// parameters or duplicate area names.
    Brain(BrainConfig config, const std::vector<std::string>& area_names);

    const BrainConfig& config() const noexcept { return config_; }
    std::size_t area_count() const noexcept { return areas_.size(); }
    const NeuronArea& area(std::size_t index) const;
    const AreaId& area_id(std::string_view name) const;

    const Connectome& connectome(std::size_t from, std::size_t to) const;
    const Connectome& input_connectome(std::size_t area) const;

    /// Sums each target neuron's input over all sources, keeps the k strongest (lowest index
    /// on ties), applies Hebbian plasticity on every contributing connectome when
    /// `plasticity_on`, and stores the result as the target's current winners.
    WinnerSet project(std::span<const Source> sources, std::size_t target, bool plasticity_on);

    /// Per-neuron input to `to` when only `src` is active. Pure read.
    std::vector<double> input_from(const WinnerSet& src, std::size_t to) const;

    /// Direct weight access for constructing hand-built brains. Shape is fixed.
    WeightMatrix& weights(std::size_t from, std::size_t to) { return mutable_connectome(from, to).weights; }
    WeightMatrix& input_weights(std::size_t area);

    void update_plasticity(std::size_t from, std::size_t to, double new_beta);
    /// Resets one connectome's beta to its baseline.
    void restore_plasticity(std::size_t from, std::size_t to);
    /// Resets every connectome's beta to its baseline.
    void restore_plasticity();

    Submatrix connectome_submatrix(std::size_t from, std::size_t to, const WinnerSet& rows,
                                   const WinnerSet& cols) const;

    /// True when both brains hold bit-identical weights and gains.
    bool same_state(const Brain& other) const;

private:
    std::size_t pair_index(std::size_t from, std::size_t to) const;
    Connectome& mutable_connectome(std::size_t from, std::size_t to);
    void check_area(std::size_t index) const;

    BrainConfig config_;
    std::vector<NeuronArea> areas_;
    std::vector<Connectome> connectomes_; // [from * A + to], diagonal slots unused
    std::vector<Connectome> inputs_;
};

} // namespace asmc
