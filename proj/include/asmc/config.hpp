#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asmc/binding.hpp"
#include "asmc/brain.hpp"
#include "asmc/encoding.hpp"

namespace asmc {

enum class EncoderMode { rate, index };

struct EncoderSettings {
    EncoderMode mode = EncoderMode::rate;
    RateEncodingConfig rate;
    /// p_positive / p_negative; overrides rate.p_negative when set.
    std::optional<double> separation;
    IndexEncodingConfig index;
    /// Added to the run seed for the encoding stream (R1 source perturbation).
    std::uint64_t seed_offset = 0;
};

struct ReadoutSettings {
    /// Top-K size; empty means the number of ground-truth links.
    std::optional<std::size_t> k;
    double ratio_threshold = 1.05;
    bool synaptic = true;
    bool propagation = true;
};

struct ValidationSettings {
    bool enabled = true;
    /// (treatment, outcome) names; empty means every ground-truth edge.
    std::vector<std::pair<std::string, std::string>> pairs;
    std::size_t cf_units = 2000;
};

struct RobustnessSettings {
    std::vector<std::string> protocols = {"R3"};
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5};
    std::vector<double> separations = {15.0, 10.0, 6.7};
    std::uint64_t r1_seed_offset = 1000;
    double r2_jitter = 0.2;
};

struct RunConfig {
    std::string condition = "base";
    std::uint64_t seed = 0;
    /// Builtin SCM name, used when `spec_path` is empty.
    std::string builtin = "alzheimer";
    std::filesystem::path spec_path;
    std::filesystem::path table_path;
    std::size_t table_rows = 2000;
    EncoderSettings encoder;
    BrainConfig brain;
    std::size_t formation_rounds = 30;
    GainSchedule schedule;
    std::size_t exposures_per_step = 5;
    bool binding_enabled = true;
    double bind_jitter = 0.0;
    std::size_t parallel_rounds = 0;
    /// Supervised links by name; empty means every ground-truth edge.
    std::vector<std::pair<std::string, std::string>> links;
    ReadoutSettings readout;
    ValidationSettings validation;
    RobustnessSettings robustness;
    std::size_t folds = 5;
    std::size_t threads = 1;

    /// Range checks that do not need the SCM. Throws ConfigError.
    void validate() const;
};

/// Parses a config document; relative paths resolve against `base_dir`. Unknown keys are errors.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON of every field.
std::string config_to_json(const RunConfig& cfg, bool include_seed = true);
/// FNV-1a of the canonical JSON without the seed, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
/// FNV-1a of the canonical JSON including the seed.
std::string run_id(const RunConfig& cfg);

std::string hex64(std::uint64_t v);
std::uint64_t fnv1a(std::string_view text);

} // namespace asmc
