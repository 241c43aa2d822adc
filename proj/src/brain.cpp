#include "asmc/brain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "asmc/errors.hpp"

namespace asmc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Bernoulli(p) presence per entry by geometric gap sampling; same draws as p * size trials.
void fill_random(WeightMatrix& m, double p, float w, Rng& rng) {
    auto data = m.data();
    if (p <= 0.0) return;
    if (p >= 1.0) {
        std::fill(data.begin(), data.end(), w);
        return;
    }
    const double log_q = std::log1p(-p);
    std::size_t pos = 0;
    while (true) {
        const double gap = std::floor(std::log1p(-uniform01(rng)) / log_q);
        if (gap >= static_cast<double>(data.size() - pos)) break;
        pos += static_cast<std::size_t>(gap);
        data[pos] = w;
        if (++pos >= data.size()) break;
    }
}

void accumulate_rows(const WeightMatrix& w, std::span<const Neuron> rows, std::vector<double>& acc) {
    for (Neuron j : rows) {
        if (j >= w.rows()) throw ConfigError("source neuron index out of range");
        auto r = w.row(j);
        for (std::size_t i = 0; i < r.size(); ++i) acc[i] += r[i];
    }
}

} // namespace

WinnerSet::WinnerSet(std::size_t area, std::vector<Neuron> indices)
    : area_(area), indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
        throw ConfigError("winner set contains duplicate neuron indices");
}

bool WinnerSet::contains(Neuron n) const {
    return std::binary_search(indices_.begin(), indices_.end(), n);
}

void BrainConfig::validate() const {
    if (n_per_area < 1) throw ConfigError("n_per_area must be >= 1");
    if (k < 1 || k > n_per_area) throw ConfigError("k must satisfy 1 <= k <= n_per_area");
    if (!(connect_p >= 0.0 && connect_p <= 1.0)) throw ConfigError("connect_p must lie in [0, 1]");
    if (!(w_init >= 0.0) || !std::isfinite(w_init)) throw ConfigError("w_init must be finite and >= 0");
    if (!(baseline_beta >= 0.0) || !std::isfinite(baseline_beta))
        throw ConfigError("baseline_beta must be finite and >= 0");
    if (!(input_beta >= 0.0) || !std::isfinite(input_beta))
        throw ConfigError("input_beta must be finite and >= 0");
}

std::vector<Neuron> select_top_k(std::span<const double> input, std::size_t k) {
    std::vector<Neuron> order(input.size());
    std::iota(order.begin(), order.end(), Neuron{0});
    k = std::min(k, order.size());
    auto stronger = [&](Neuron a, Neuron b) {
        return input[a] != input[b] ? input[a] > input[b] : a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), stronger);
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

void hebbian_update(Connectome& connectome, std::span<const Neuron> src, std::span<const Neuron> dst) {
    if (connectome.beta == 0.0) return;
    auto& w = connectome.weights;
    for (Neuron j : src)
        if (j >= w.rows()) throw ConfigError("hebbian_update: source index out of range");
    for (Neuron i : dst)
        if (i >= w.cols()) throw ConfigError("hebbian_update: target index out of range");
    const auto factor = static_cast<float>(1.0 + connectome.beta);
    for (Neuron j : src) {
        auto r = w.row(j);
        for (Neuron i : dst) r[i] *= factor;
    }
}

double Submatrix::mean() const {
    if (values_.size() == 0) return 0.0;
    double s = 0.0;
    for (float v : values_.data()) s += v;
    return s / static_cast<double>(values_.size());
}

Brain::Brain(BrainConfig config, const std::vector<std::string>& area_names) : config_(config) {
    config_.validate();
    std::set<std::string> seen;
    for (std::size_t i = 0; i < area_names.size(); ++i) {
        if (!seen.insert(area_names[i]).second)
            throw ConfigError("duplicate area name: " + area_names[i]);
        areas_.push_back({AreaId{area_names[i], i}, config_.n_per_area, config_.k, std::nullopt});
    }

    Rng rng(mix_seed(config_.seed, stream::connectivity));
    const auto w = static_cast<float>(config_.w_init);
    const std::size_t a = areas_.size();
    connectomes_.resize(a * a);
    for (std::size_t from = 0; from < a; ++from) {
        for (std::size_t to = 0; to < a; ++to) {
            if (from == to) continue;
            Connectome& c = connectomes_[from * a + to];
            c.from = from;
            c.to = to;
            c.weights = WeightMatrix(config_.n_per_area, config_.n_per_area);
            c.beta = c.baseline_beta = config_.baseline_beta;
            fill_random(c.weights, config_.connect_p, w, rng);
        }
    }
    inputs_.resize(a);
    for (std::size_t to = 0; to < a; ++to) {
        Connectome& c = inputs_[to];
        c.to = to;
        c.weights = WeightMatrix(config_.input_size(), config_.n_per_area);
        c.beta = c.baseline_beta = config_.input_beta;
        fill_random(c.weights, config_.connect_p, w, rng);
    }
}

void Brain::check_area(std::size_t index) const {
    if (index >= areas_.size()) throw ConfigError("unknown area index " + std::to_string(index));
}

const NeuronArea& Brain::area(std::size_t index) const {
    check_area(index);
    return areas_[index];
}

const AreaId& Brain::area_id(std::string_view name) const {
    for (const auto& a : areas_)
        if (a.id.name == name) return a.id;
    throw ConfigError("unknown area: " + std::string(name));
}

std::size_t Brain::pair_index(std::size_t from, std::size_t to) const {
    check_area(from);
    check_area(to);
    if (from == to) throw ConfigError("no connectome from an area onto itself");
    return from * areas_.size() + to;
}

const Connectome& Brain::connectome(std::size_t from, std::size_t to) const {
    return connectomes_[pair_index(from, to)];
}

Connectome& Brain::mutable_connectome(std::size_t from, std::size_t to) {
    return connectomes_[pair_index(from, to)];
}

const Connectome& Brain::input_connectome(std::size_t area) const {
    check_area(area);
    return inputs_[area];
}

WeightMatrix& Brain::input_weights(std::size_t area) {
    check_area(area);
    return inputs_[area].weights;
}

WinnerSet Brain::project(std::span<const Source> sources, std::size_t target, bool plasticity_on) {
    check_area(target);
    if (sources.empty()) throw ConfigError("projection needs at least one active source");

    NeuronArea& tgt = areas_[target];
    std::vector<double> input(tgt.n, 0.0);
    std::vector<Connectome*> used;
    used.reserve(sources.size());
    for (const Source& s : sources) {
        std::visit(overloaded{
                       [&](const WinnerSet& w) {
                           if (w.area() == target) throw ConfigError("self-projection is not supported");
                           Connectome& c = mutable_connectome(w.area(), target);
                           accumulate_rows(c.weights, w.indices(), input);
                           used.push_back(&c);
                       },
                       [&](const ExternalInput& e) {
                           if (e.area != target)
                               throw ConfigError("external input addressed to a different area");
                           Connectome& c = inputs_[target];
                           accumulate_rows(c.weights, e.active, input);
                           used.push_back(&c);
                       },
                   },
                   s);
    }

    WinnerSet winners(target, select_top_k(input, tgt.k));
    if (plasticity_on) {
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const auto rows = std::visit(
                overloaded{[](const WinnerSet& w) { return w.indices(); },
                           [](const ExternalInput& e) { return std::span<const Neuron>(e.active); }},
                sources[s]);
            hebbian_update(*used[s], rows, winners.indices());
        }
    }
    tgt.current_winners = winners;
    return winners;
}

std::vector<double> Brain::input_from(const WinnerSet& src, std::size_t to) const {
    const Connectome& c = connectome(src.area(), to);
    std::vector<double> input(areas_[to].n, 0.0);
    accumulate_rows(c.weights, src.indices(), input);
    return input;
}

void Brain::update_plasticity(std::size_t from, std::size_t to, double new_beta) {
    if (!(new_beta >= 0.0) || !std::isfinite(new_beta)) throw ConfigError("plasticity gain must be finite and >= 0");
    mutable_connectome(from, to).beta = new_beta;
}

void Brain::restore_plasticity(std::size_t from, std::size_t to) {
    Connectome& c = mutable_connectome(from, to);
    c.beta = c.baseline_beta;
}

void Brain::restore_plasticity() {
    for (auto& c : connectomes_) c.beta = c.baseline_beta;
    for (auto& c : inputs_) c.beta = c.baseline_beta;
}

Submatrix Brain::connectome_submatrix(std::size_t from, std::size_t to, const WinnerSet& rows,
                                      const WinnerSet& cols) const {
    const Connectome& c = connectome(from, to);
    Submatrix out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Neuron j = rows.indices()[r];
        if (j >= c.weights.rows()) throw ConfigError("submatrix row index out of range");
        for (std::size_t q = 0; q < cols.size(); ++q) {
            const Neuron i = cols.indices()[q];
            if (i >= c.weights.cols()) throw ConfigError("submatrix column index out of range");
            out.values_(r, q) = c.weights(j, i);
        }
    }
    return out;
}

bool Brain::same_state(const Brain& other) const {
    if (connectomes_.size() != other.connectomes_.size() || inputs_.size() != other.inputs_.size()) return false;
    auto eq = [](const Connectome& a, const Connectome& b) {
        return a.beta == b.beta && a.baseline_beta == b.baseline_beta && a.weights == b.weights;
    };
    for (std::size_t i = 0; i < connectomes_.size(); ++i)
        if (!eq(connectomes_[i], other.connectomes_[i])) return false;
    for (std::size_t i = 0; i < inputs_.size(); ++i)
        if (!eq(inputs_[i], other.inputs_[i])) return false;
    return true;
}

} // namespace asmc
