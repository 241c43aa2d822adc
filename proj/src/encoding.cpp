#include "asmc/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asmc/errors.hpp"

namespace asmc {

void RateEncodingConfig::validate() const {
    if (n < 1) throw ConfigError("rate encoding needs n >= 1");
    if (!(p_negative >= 0.0 && p_negative < p_positive && p_positive <= 1.0))
        throw ConfigError("rate encoding needs 0 <= p_negative < p_positive <= 1");
}

void IndexEncodingConfig::validate() const {
    if (base_k < 1) throw ConfigError("index encoding needs base_k >= 1");
}

ExternalInput encode_rate(const ValueCategory& value, const RateEncodingConfig& cfg, Rng& rng) {
    const double p = cfg.probability(value.polarity);
    ExternalInput out{value.variable, {}};
    out.active.reserve(static_cast<std::size_t>(p * static_cast<double>(cfg.n) * 1.2) + 8);
    for (std::size_t j = 0; j < cfg.n; ++j)
        if (uniform01(rng) < p) out.active.push_back(static_cast<Neuron>(j));
    return out;
}

RateEncodingConfig separation_scale(const RateEncodingConfig& cfg, double factor) {
    if (!(factor > 1.0)) throw ConfigError("separation factor must be > 1");
    RateEncodingConfig out = cfg;
    out.p_negative = std::isinf(factor) ? 0.0 : cfg.p_positive / factor;
    out.validate();
    return out;
}

IndexEncoder::IndexEncoder(IndexEncodingConfig cfg, std::size_t n_input,
                           const std::vector<std::size_t>& cardinalities, std::uint64_t seed)
    : cfg_(cfg), n_input_(n_input) {
    cfg_.validate();
    Rng rng(mix_seed(seed, stream::index_layout));
    for (std::size_t v = 0; v < cardinalities.size(); ++v) {
        std::size_t needed = 0;
        for (std::size_t i = 0; i < cardinalities[v]; ++i) needed += cfg_.size_for(i);
        if (needed > n_input)
            throw ConfigError("index encoding for variable " + std::to_string(v) + " needs " +
                              std::to_string(needed) + " stimulus neurons, only " + std::to_string(n_input) +
                              " available");
        std::vector<Neuron> perm(n_input);
        std::iota(perm.begin(), perm.end(), Neuron{0});
        std::shuffle(perm.begin(), perm.end(), rng);

        std::vector<ExternalInput> blocks;
        std::size_t offset = 0;
        for (std::size_t i = 0; i < cardinalities[v]; ++i) {
            const std::size_t size = cfg_.size_for(i);
            std::vector<Neuron> block(perm.begin() + static_cast<std::ptrdiff_t>(offset),
                                      perm.begin() + static_cast<std::ptrdiff_t>(offset + size));
            std::sort(block.begin(), block.end());
            blocks.push_back({v, std::move(block)});
            offset += size;
        }
        patterns_.push_back(std::move(blocks));
    }
}

const ExternalInput& IndexEncoder::encode(const ValueCategory& value) const {
    if (value.variable >= patterns_.size() || value.value_index >= patterns_[value.variable].size())
        throw ConfigError("index encoder has no pattern for the requested value");
    return patterns_[value.variable][value.value_index];
}

ExternalInput Encoder::encode(const ValueCategory& value, Rng& rng) const {
    if (const auto* rate = std::get_if<RateEncodingConfig>(&impl_)) return encode_rate(value, *rate, rng);
    return std::get<IndexEncoder>(impl_).encode(value);
}

std::size_t Encoder::input_size() const {
    if (const auto* rate = std::get_if<RateEncodingConfig>(&impl_)) return rate->n;
    return std::get<IndexEncoder>(impl_).input_size();
}

} // namespace asmc
