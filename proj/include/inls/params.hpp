#pragma once

#include <cmath>
#include <string>

#include "inls/error.hpp"

namespace inls
{

/// Exponents of the energy-critical inhomogeneous NLS in three dimensions.
///
/// The only free parameter is `b`; the nonlinearity power is p = 5 - 2b and
/// the half-power p0 = (p - 1)/2 = 2 - b. Construction through `make` rejects
/// b outside (0, 4/3).
class ProblemParams
{
public:
    static ProblemParams make(double b)
    {
        if (!std::isfinite(b) || !(b > 0.0) || !(b < 4.0 / 3.0)) {
            throw ParameterDomainError("b must lie in (0, 4/3), got " + std::to_string(b));
        }
        return ProblemParams(b);
    }

    double b() const noexcept { return b_; }
    double p() const noexcept { return 5.0 - 2.0 * b_; }
    double p0() const noexcept { return 2.0 - b_; }

    bool operator==(const ProblemParams &) const = default;

private:
    explicit ProblemParams(double b) : b_(b) {}

    double b_;
};

} // namespace inls
