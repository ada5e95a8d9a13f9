#pragma once

#include <stdexcept>
#include <string>

namespace hmp {

// Base type for all errors thrown by the library. Subclasses exist so
// callers can distinguish bad input data from bad configuration or I/O.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or size of an operand does not match the operation's contract.
struct DimensionError : Error {
    using Error::Error;
};

// A value in a config file or config struct is missing, unknown or invalid.
struct ConfigError : Error {
    using Error::Error;
};

// A file could not be parsed at all (bad syntax, truncated stream).
struct ParseError : Error {
    using Error::Error;
};

// A file parsed but violates the schema; message names the offending field.
struct SchemaError : Error {
    using Error::Error;
};

// Checkpoint container is damaged or does not match the expected model.
struct CheckpointError : Error {
    using Error::Error;
};

// A numeric evaluation produced a non-finite value.
struct EvaluationError : Error {
    using Error::Error;
};

// An API was used outside its contract (e.g. backward from a non-scalar).
struct ContractError : Error {
    using Error::Error;
};

}  // namespace hmp
