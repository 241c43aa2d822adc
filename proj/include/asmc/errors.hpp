#pragma once

#include <stdexcept>
#include <string>

namespace asmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed config files or spec documents.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A structural problem in a causal graph (cycle, unknown node, duplicate edge).
class GraphError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage failed. `stage()` names the stage so failures can be localised.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace asmc
