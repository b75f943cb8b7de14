#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "inls/error.hpp"

namespace inls::quad
{

struct Tolerance
{
    double rel = 1e-12;
    double abs = 1e-300;
    int max_intervals = 4000;
};

struct Result
{
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail
{

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for kNodes[1], kNodes[3], kNodes[5], kNodes[7].
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment
{
    double a, b, value, error;
    bool operator<(const Segment &o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F &f, double a, double b)
{
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = kKronrodWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kNodes[i];
        const double pair = f(centre - dx) + f(centre + dx);
        kronrod += kKronrodWeights[i] * pair;
        if (i % 2 == 1) {
            gauss += kGaussWeights[i / 2] * pair;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature on a finite interval.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below max(abs, rel * |integral|). The 7/15 difference is
/// used as the error estimate directly, which is conservative for smooth
/// integrands. Throws NumericFailure on non-finite values or when the
/// interval budget is exhausted.
template <class F>
Result integrate(const F &f, double a, double b, Tolerance tol = {})
{
    if (a == b) {
        return {};
    }
    std::priority_queue<detail::Segment> heap;
    auto first = detail::gk15(f, a, b);
    double total = first.value;
    double error = first.error;
    heap.push(first);
    int count = 1;
    while (error > std::max(tol.abs, tol.rel * std::abs(total))) {
        if (!std::isfinite(total) || !std::isfinite(error)) {
            throw NumericFailure("quadrature produced a non-finite value on [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "]");
        }
        if (count >= tol.max_intervals) {
            throw NumericFailure("quadrature did not converge on [" + std::to_string(a) + ", " +
                                 std::to_string(b) + "]: error estimate " + std::to_string(error));
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw NumericFailure("quadrature interval collapsed near " + std::to_string(mid));
        }
        const auto left = detail::gk15(f, worst.a, mid);
        const auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
        // Re-sum periodically so cancellation in the running totals cannot drift.
        if (count % 64 == 0) {
            auto copy = heap;
            total = 0.0;
            error = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                error += copy.top().error;
                copy.pop();
            }
        }
    }
    if (!std::isfinite(total)) {
        throw NumericFailure("quadrature produced a non-finite value");
    }
    return {total, error, count};
}

/// Integral over [a, infinity) for a > 0, via the substitution r = a / t on
/// the tail so that algebraically decaying integrands become bounded.
template <class F>
Result integrate_to_infinity(const F &f, double a, Tolerance tol = {})
{
    auto mapped = [&](double t) {
        if (t <= 0.0) {
            return 0.0;
        }
        const double r = a / t;
        return f(r) * a / (t * t);
    };
    return integrate(mapped, 0.0, 1.0, tol);
}

} // namespace inls::quad
