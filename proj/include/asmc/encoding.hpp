#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "asmc/brain.hpp"
#include "asmc/rng.hpp"

namespace asmc {

enum class Polarity { positive, negative };

/// One categorical state of a variable, tagged with its polarity from the polarity map.
struct ValueCategory {
    std::size_t variable = 0;
    std::size_t value_index = 0;
    Polarity polarity = Polarity::negative;

    friend bool operator==(const ValueCategory&, const ValueCategory&) = default;
};

struct RateEncodingConfig {
    double p_positive = 0.30;
    double p_negative = 0.02;
    /// Stimulus neurons per input channel.
    std::size_t n = 1000;

    void validate() const;
    double probability(Polarity p) const { return p == Polarity::positive ? p_positive : p_negative; }
};

struct IndexEncodingConfig {
    std::size_t base_k = 100;
    std::size_t step = 25;

    void validate() const;
    std::size_t size_for(std::size_t value_index) const { return base_k + value_index * step; }
};

/// Value-to-firing-rate: every stimulus neuron fires independently with the polarity's rate.
ExternalInput encode_rate(const ValueCategory& value, const RateEncodingConfig& cfg, Rng& rng);

/// Config whose p_positive : p_negative ratio equals `factor`, p_positive unchanged.
RateEncodingConfig separation_scale(const RateEncodingConfig& cfg, double factor);

/// Identity-preserving sparse index code. Each (variable, value) owns a fixed block of a
/// per-variable seeded permutation of the stimulus neurons; blocks never overlap.
class IndexEncoder {
public:
    /// Throws ConfigError when a variable's blocks do not fit in `n_input`.
    IndexEncoder(IndexEncodingConfig cfg, std::size_t n_input, const std::vector<std::size_t>& cardinalities,
                 std::uint64_t seed);

    const ExternalInput& encode(const ValueCategory& value) const;
    const IndexEncodingConfig& config() const noexcept { return cfg_; }
    std::size_t input_size() const noexcept { return n_input_; }

private:
    IndexEncodingConfig cfg_;
    std::size_t n_input_ = 0;
    std::vector<std::vector<ExternalInput>> patterns_; // [variable][value]
};

/// Either encoder behind one call.
class Encoder {
public:
    explicit Encoder(RateEncodingConfig rate) : impl_(rate) {}
    explicit Encoder(IndexEncoder index) : impl_(std::move(index)) {}

    ExternalInput encode(const ValueCategory& value, Rng& rng) const;
    /// Number of stimulus neurons the encoder addresses.
    std::size_t input_size() const;
    bool is_rate() const noexcept { return std::holds_alternative<RateEncodingConfig>(impl_); }

private:
    std::variant<RateEncodingConfig, IndexEncoder> impl_;
};

} // namespace asmc
