#pragma once

#include <stdexcept>
#include <string>

namespace inls
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible range.
class ParameterDomainError : public Error
{
public:
    using Error::Error;
};

/// An iterative or adaptive numerical procedure failed to converge or
/// produced non-finite values.
class NumericFailure : public Error
{
public:
    using Error::Error;
};

/// The truncated radial domain cannot faithfully hold the data.
class TruncationWarning : public Error
{
public:
    using Error::Error;
};

/// A weight does not provide the derivatives an operation needs.
class UnsupportedWeight : public Error
{
public:
    using Error::Error;
};

/// Configuration or input validation error. `block()` names the offending
/// configuration section.
class ValidationError : public Error
{
public:
    ValidationError(std::string block, const std::string &what)
        : Error(block + ": " + what), block_(std::move(block))
    {
    }

    const std::string &block() const noexcept { return block_; }

private:
    std::string block_;
};

} // namespace inls
