#pragma once

#include <stdexcept>
#include <string>

namespace qhist {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract input: bad dimensions, non-unitary evolution,
// non-orthonormal eigenbasis, outcome index out of range, ...
class ValidationError : public Error {
public:
    using Error::Error;
};

// Outcome enumeration would exceed the configured cap.
class CapExceeded : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Postselected normalization vanishes; no intermediate state exists.
class PostselectionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A computed quantity broke a numerical contract (probabilities not summing
// to one, negative density eigenvalue, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace qhist
