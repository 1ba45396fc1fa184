#pragma once

#include <stdexcept>
#include <string>

namespace udd {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad input: wrong dimensions, malformed files, out-of-range arguments.
/// The CLI maps these to exit code 2.
struct InputError : Error {
    using Error::Error;
};

/// Estimation cannot proceed because the data sits on or near a
/// non-identifiable point. The CLI maps these to exit code 3.
struct DegenerateError : Error {
    using Error::Error;
};

struct DimensionMismatch : InputError {
    using InputError::InputError;
};
struct InvalidDistribution : InputError {
    using InputError::InputError;
};
struct InvalidChannel : InputError {
    using InputError::InputError;
};
struct InvalidPermutation : InputError {
    using InputError::InputError;
};
struct NonBinaryAlphabet : InputError {
    using InputError::InputError;
};
struct OddK : InputError {
    using InputError::InputError;
};
struct AlphabetTooLarge : InputError {
    using InputError::InputError;
};
struct IndexOutOfRange : InputError {
    using InputError::InputError;
};
struct ParseError : InputError {
    using InputError::InputError;
};

struct DegenerateChannel : DegenerateError {
    using DegenerateError::DegenerateError;
};
struct DegenerateSource : DegenerateError {
    using DegenerateError::DegenerateError;
};
struct ConditioningOnNullEvent : DegenerateError {
    using DegenerateError::DegenerateError;
};
struct AllCopiesConstant : DegenerateError {
    using DegenerateError::DegenerateError;
};

}  // namespace udd
