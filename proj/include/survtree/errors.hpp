#pragma once

#include <stdexcept>
#include <string>

namespace survtree {

// Problems with input data or files. CLI maps these to exit code 3.
class DataError : public std::runtime_error {
public:
    enum class Kind {
        MissingFile,
        MissingColumn,
        UnparseableCell,
        UnparseableEvent,
        UnparseableTime,
        NoRows,
        NoUncensoredSample,
        DegenerateFeatures,
        FeatureMismatch,
        DuplicateIndex,
        MissingIndex,
        NegativeLoss,
        DegenerateBaseline,
    };

    DataError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Bad configuration or usage. CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::string message) : std::runtime_error(std::move(message)) {}
};

// Internal invariant violation (corrupt dependency graph, missing certificate).
class StructureError : public std::logic_error {
public:
    explicit StructureError(std::string message) : std::logic_error(std::move(message)) {}
};

} // namespace survtree
