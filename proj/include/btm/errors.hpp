#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace btm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
    using Error::Error;
};

struct DimError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct InvalidSegment : Error {
    using Error::Error;
};

struct DegenerateSegment : Error {
    using Error::Error;
};

struct UndefinedMetric : Error {
    using Error::Error;
};

struct InvalidSpec : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Carries the byte offset where decoding failed.
struct FormatError : Error {
    std::size_t offset;
    FormatError(const std::string& msg, std::size_t off)
        : Error(msg + " (byte offset " + std::to_string(off) + ")"), offset(off) {}
};

// Carries the epoch at which training produced a non-finite loss.
struct TrainingDiverged : Error {
    std::size_t epoch;
    TrainingDiverged(const std::string& msg, std::size_t ep)
        : Error(msg + " (epoch " + std::to_string(ep) + ")"), epoch(ep) {}
};

}  // namespace btm
