#pragma once

#include <array>

namespace inls
{

/// Degree-9 smooth step on [0, 1]: S(0) = 0, S(1) = 1, with the first four
/// derivatives vanishing at both ends (C^4 when extended by constants).
///
/// S'(x) = 630 x^4 (1 - x)^4. Returns {S, S', S'', S''', S''''} at x; outside
/// [0, 1] the step is constant.
inline std::array<double, 5> smoothstep9(double x)
{
    if (x <= 0.0) {
        return {0.0, 0.0, 0.0, 0.0, 0.0};
    }
    if (x >= 1.0) {
        return {1.0, 0.0, 0.0, 0.0, 0.0};
    }
    const double x2 = x * x;
    const double s = x2 * x2 * x * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + 70.0 * x))));
    // With u = x (1 - x), u' = 1 - 2x, u'' = -2.
    const double u = x * (1.0 - x);
    const double du = 1.0 - 2.0 * x;
    const double u2 = u * u;
    const double d1 = 630.0 * u2 * u2;
    const double d2 = 2520.0 * u2 * u * du;
    const double d3 = 2520.0 * (3.0 * u2 * du * du - 2.0 * u2 * u);
    const double d4 = 15120.0 * u * du * (du * du - 3.0 * u);
    return {s, d1, d2, d3, d4};
}

/// Coefficients of S(x) = sum_k c[k] x^k.
inline constexpr std::array<double, 10> kSmoothstep9Coefficients = {
    0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0};

/// Cubic smooth step 3x^2 - 2x^3 on [0, 1], constant outside. Its slope
/// integral int S'^2 = 6/5 is close to the linear minimum of 1, which keeps
/// the gradient cost of a wide cutoff low.
inline double smoothstep3(double x)
{
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    return x * x * (3.0 - 2.0 * x);
}

} // namespace inls
