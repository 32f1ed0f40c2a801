#pragma once

#include <stdexcept>
#include <string>

namespace tscab {

// Caller passed a value outside an operation's documented domain.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An operation was invoked off its documented call protocol
// (e.g. a window update away from a window boundary).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlanningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plan was produced against an older placement version.
struct StalePlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tscab
