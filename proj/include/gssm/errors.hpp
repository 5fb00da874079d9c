#pragma once

#include <stdexcept>
#include <string>

namespace gssm {

/// Invalid argument or parameter outside the support of a density or model.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Observation records that contradict the observation equation
/// (a positive response with zero exposure, or the reverse).
class InconsistentObservation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: non-positive state parameters, floor violations.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, datasets).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gssm
