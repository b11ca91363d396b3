#pragma once

#include <stdexcept>
#include <string>

namespace thermoscreen {

// Malformed input document (JSON syntax, wrong types, missing keys).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& context, const std::string& what)
        : std::runtime_error(context.empty() ? what : context + ": " + what), context_(context) {}

    const std::string& context() const noexcept { return context_; }

private:
    std::string context_;
};

// Well-formed input that breaks a domain invariant. `field` names the offender.
class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field), message_(what) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

// Too few samples, no contact, zero time span, etc.
class InsufficientDataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Heating-only model asked to fit a cooling curve.
class CoolingDirectionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Not enough examples for the requested basis / fold split.
class UnderdeterminedError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Single-class labels where both classes are required.
class DegenerateLabelsError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace thermoscreen
