#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coarse {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Rejected construction parameter (unknown builtin, nonpositive eps, ...).
class ParamError : public Error {
public:
    using Error::Error;
};

// Malformed spec document or a metric that fails its axioms.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Operation invoked on mismatched spaces, scales or basepoints.
class ContractError : public Error {
public:
    using Error::Error;
};

// A consecutive gap exceeds the sequence scale.
class ScaleViolation : public Error {
public:
    ScaleViolation(const std::string& what, std::size_t index, double gap)
        : Error(what), index(index), gap(gap) {}

    std::size_t index;  // first offending position
    double gap;         // measured distance
};

// A lemma hypothesis does not hold (e.g. prepend with n < d(x0, y0)).
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

// Invalid run configuration (radius schedule, windows, ranges).
class ConfigError : public Error {
public:
    using Error::Error;
};

// An oracle broke its own contract (point outside its advertised ball).
class OracleContractError : public Error {
public:
    using Error::Error;
};

// Internal invariant failed (ambiguous containment, split image thread).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace coarse
