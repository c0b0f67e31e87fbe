#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mmblock {

/// Invalid input. `field()` names the offending parameter.
class ParameterError : public std::invalid_argument
{
  public:
    ParameterError(std::string field, std::string const& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field))
    {
    }

    std::string const& field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// A quantity conditioned on a zero-probability event (no BS in coverage).
class UndefinedQuantity : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// Numerical routine failed to reach its tolerance.
class ConvergenceError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace mmblock
