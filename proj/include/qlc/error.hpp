#pragma once

#include <stdexcept>
#include <string>

namespace qlc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain arguments.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Root search without a solution, e.g. a price outside arbitrage bounds.
class NoSolution : public Error {
public:
    using Error::Error;
};

/// File, schema or invariant problems while reading market data or dumps.
class LoadError : public Error {
public:
    using Error::Error;
};

/// Inconsistent configuration (strategy/input mismatch, missing observation time).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Calibration that diverged or whose inputs fail a precondition.
class CalibrationFailure : public Error {
public:
    using Error::Error;
};

/// Non-finite numbers produced by a solver or simulation.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// A denominator or estimate fell below its floor.
class DegenerateEstimate : public Error {
public:
    using Error::Error;
};

/// Kernel regression without enough local sample.
class BandwidthTooSmall : public Error {
public:
    using Error::Error;
};

}  // namespace qlc
