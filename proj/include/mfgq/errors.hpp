#pragma once

#include <stdexcept>
#include <string>

namespace mfgq {

/// Bad input: a precondition of the called operation does not hold.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An algorithm ran but could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SignedMeasureError : public ValidationError {
public:
    SignedMeasureError() : ValidationError("operation requires an unsigned measure") {}
};

class EmptyMeasureError : public ValidationError {
public:
    EmptyMeasureError() : ValidationError("measure has no support points") {}
};

class OrderTooLargeError : public ValidationError {
public:
    OrderTooLargeError(std::size_t requested, std::size_t available)
        : ValidationError("requested " + std::to_string(requested) +
                          "-point rule but recurrence has effective order " +
                          std::to_string(available)) {}
};

class UnknownModelError : public ValidationError {
public:
    explicit UnknownModelError(const std::string& name) : ValidationError("unknown model: " + name) {}
};

class MissingFactoredFormError : public ValidationError {
public:
    MissingFactoredFormError() : ValidationError("second-order scheme requires a factored moment form") {}
};

class MeanFieldNotSupportedError : public ValidationError {
public:
    MeanFieldNotSupportedError()
        : ValidationError("multilevel Monte Carlo needs an ordinary SDE (no law dependence)") {}
};

class NoConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoSolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace mfgq
