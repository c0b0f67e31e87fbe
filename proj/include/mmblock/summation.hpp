#pragma once

#include <cmath>

namespace mmblock {

/// Neumaier's variant of Kahan compensated summation.
class CompensatedSum
{
  public:
    CompensatedSum& operator+=(double term) noexcept
    {
        double const t = sum_ + term;
        if (std::fabs(sum_) >= std::fabs(term))
            comp_ += (sum_ - t) + term;
        else
            comp_ += (term - t) + sum_;
        sum_ = t;
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace mmblock
