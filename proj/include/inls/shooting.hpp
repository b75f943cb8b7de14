#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "inls/coefficient.hpp"
#include "inls/error.hpp"
#include "inls/ground_state.hpp"

namespace inls
{

/// One accepted step of the radial ODE Q'' + (2/r) Q' + g Q^p = 0, with the
/// running integrals H(r) and V(r) carried along as extra components.
struct TrajectoryPoint
{
    double r = 0.0;
    double Q = 0.0;
    double dQ = 0.0;
    double H = 0.0;
    double V = 0.0;
};

struct ShootingResult
{
    double Q0 = 0.0;
    std::vector<TrajectoryPoint> trajectory;
    std::optional<double> first_zero;
    /// max over the trajectory of |V_integral - V_boundary|.
    double pohozaev_residual = 0.0;
};

struct ShootOptions
{
    double r0 = 1e-6;
    double rel_tol = 1e-12;
    double abs_tol = 1e-15;
    double zero_tol = 1e-10;
    std::size_t max_steps = 2'000'000;
};

/// Raised when the integrator cannot proceed; carries the partial trajectory.
class ShootingFailure : public NumericFailure
{
public:
    ShootingFailure(const std::string &what, ShootingResult partial)
        : NumericFailure(what), partial_(std::move(partial))
    {
    }
    const ShootingResult &partial() const noexcept { return partial_; }

private:
    ShootingResult partial_;
};

namespace detail
{

using OdeState = std::array<double, 4>;

inline OdeState shooting_rhs(const Coefficient &g, double r, const OdeState &y)
{
    const double b = g.params().b();
    const double p = g.params().p();
    const double q = y[0];
    const double aq = std::abs(q);
    // Odd extension |Q|^{p-1} Q keeps the right-hand side real past a zero.
    const double qp = aq == 0.0 ? 0.0 : std::pow(aq, p - 1.0) * q;
    const double source = std::pow(r, 3.0 - b) * g.scaled_deriv(r);
    return {y[1], -2.0 / r * y[1] - g(r) * qp, source,
            source * std::pow(aq, p + 1.0) / (p + 1.0)};
}

struct Hermite
{
    double r0, r1;
    double y0, y1, d0, d1;

    double operator()(double r) const
    {
        const double h = r1 - r0;
        const double t = (r - r0) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
               (t3 - t2) * h * d1;
    }

    double derivative(double r) const
    {
        const double h = r1 - r0;
        const double t = (r - r0) / h;
        const double t2 = t * t;
        return ((6 * t2 - 6 * t) * y0 + (6 * t - 6 * t2) * y1) / h + (3 * t2 - 4 * t + 1) * d0 +
               (3 * t2 - 2 * t) * d1;
    }
};

} // namespace detail

/// Sphere-boundary form of V(r) obtained from the Pohozaev identity on the
/// ball of radius r: r^3 Q'^2 / 2 + r^3 g Q^{p+1} / (p+1) + r^2 Q Q' / 2.
inline double pohozaev_boundary(const Coefficient &g, double r, double Q, double dQ)
{
    const double p = g.params().p();
    const double r2 = r * r;
    return 0.5 * r2 * r * dQ * dQ + r2 * r * g(r) * std::pow(std::abs(Q), p + 1.0) / (p + 1.0) +
           0.5 * r2 * Q * dQ;
}

/// Boundary expression with the constants 3, 1, 2 as displayed in the
/// original derivation. Kept for comparison only; it does not vanish for the
/// pure-power ground state.
inline double pohozaev_boundary_displayed(const Coefficient &g, double r, double Q, double dQ)
{
    const double p = g.params().p();
    const double r2 = r * r;
    return 3.0 * r2 * r * dQ * dQ + r2 * r * g(r) * std::pow(std::abs(Q), p + 1.0) +
           2.0 * r2 * Q * dQ;
}

/// Integrates Q'' + (2/r) Q' + g(r) Q^p = 0 with Q(0) = Q0, Q'(0) = 0 out to
/// r_max with an adaptive Dormand-Prince 5(4) scheme. The integration starts
/// at opts.r0 from the two-term Frobenius expansion
///   Q ~ Q0 - g~ Q0^p r^{2-b} / ((2-b)(3-b)),  g~ = lim_{r->0} r^b g(r),
/// and stops at the first sign change of Q, which is located by bisection on
/// the cubic Hermite interpolant of each step.
inline ShootingResult shoot(const Coefficient &g, double Q0, double r_max, ShootOptions opts = {})
{
    if (!(Q0 > 0.0) || !std::isfinite(Q0)) {
        throw ParameterDomainError("shooting height Q0 must be positive");
    }
    if (!(r_max > opts.r0)) {
        throw ParameterDomainError("r_max must exceed the start radius");
    }
    const double b = g.params().b();
    const double p = g.params().p();
    const double r0 = opts.r0;

    ShootingResult result;
    result.Q0 = Q0;

    const double frob = g.origin_limit() * std::pow(Q0, p) / ((2.0 - b) * (3.0 - b));
    const double H0 = compute_H(g, r0);
    detail::OdeState y{Q0 - frob * std::pow(r0, 2.0 - b), -frob * (2.0 - b) * std::pow(r0, 1.0 - b),
                       H0, H0 * std::pow(Q0, p + 1.0) / (p + 1.0)};
    double r = r0;
    result.trajectory.push_back({r, y[0], y[1], y[2], y[3]});

    // Dormand-Prince 5(4) tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto rhs = [&](double rr, const detail::OdeState &yy) { return detail::shooting_rhs(g, rr, yy); };
    auto combine = [](const detail::OdeState &base, double h,
                      std::initializer_list<std::pair<double, const detail::OdeState *>> terms) {
        detail::OdeState out = base;
        for (const auto &[coef, k] : terms) {
            for (int i = 0; i < 4; ++i) {
                out[i] += h * coef * (*k)[i];
            }
        }
        return out;
    };

    double h = 0.1 * r0;
    detail::OdeState k1 = rhs(r, y);
    std::size_t steps = 0;
    while (r < r_max) {
        if (++steps > opts.max_steps) {
            throw ShootingFailure("step budget exhausted at r = " + std::to_string(r), result);
        }
        h = std::min(h, r_max - r);
        if (h < 1e-14 * r) {
            throw ShootingFailure("step size underflow at r = " + std::to_string(r), result);
        }
        const auto k2 = rhs(r + c2 * h, combine(y, h, {{a21, &k1}}));
        const auto k3 = rhs(r + c3 * h, combine(y, h, {{a31, &k1}, {a32, &k2}}));
        const auto k4 = rhs(r + c4 * h, combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const auto k5 =
            rhs(r + c5 * h, combine(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const auto k6 = rhs(r + h, combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4},
                                                  {a65, &k5}}));
        const auto ynew =
            combine(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const auto k7 = rhs(r + h, ynew);

        double err = 0.0;
        bool finite = true;
        for (int i = 0; i < 4; ++i) {
            const double e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (e / sc) * (e / sc);
            finite = finite && std::isfinite(ynew[i]);
        }
        err = std::sqrt(err / 4.0);
        if (!finite || !std::isfinite(err)) {
            h *= 0.25;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        const double r_new = r + h;
        if (ynew[0] <= 0.0) {
            // Sign change inside this step: bisect the cubic dense output.
            const detail::Hermite q{r, r_new, y[0], ynew[0], y[1], ynew[1]};
            double lo = r;
            double hi = r_new;
            while (hi - lo > opts.zero_tol) {
                const double mid = 0.5 * (lo + hi);
                (q(mid) > 0.0 ? lo : hi) = mid;
            }
            const double zero = 0.5 * (lo + hi);
            result.first_zero = zero;
            const double t = (zero - r) / h;
            result.trajectory.push_back({zero, 0.0, q.derivative(zero), y[2] + t * (ynew[2] - y[2]),
                                         y[3] + t * (ynew[3] - y[3])});
            break;
        }
        r = r_new;
        y = ynew;
        k1 = k7;
        result.trajectory.push_back({r, y[0], y[1], y[2], y[3]});
        h *= std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
    }

    for (const auto &pt : result.trajectory) {
        const double vb = pohozaev_boundary(g, pt.r, pt.Q, pt.dQ);
        result.pohozaev_residual = std::max(result.pohozaev_residual, std::abs(pt.V - vb));
    }
    return result;
}

struct PohozaevCheck
{
    double v_integral = 0.0;
    double v_boundary = 0.0;
    double v_displayed = 0.0;
    double residual = 0.0;
};

/// V(r) computed two ways along a shot trajectory: the defining integral
/// (1/(p+1)) int_0^r s^{3-b} (s^b g)' Q^{p+1} ds, and the Pohozaev boundary
/// form. Returns both plus their absolute difference.
inline PohozaevCheck pohozaev_check(const Coefficient &g, const ShootingResult &shot, double r)
{
    const auto &tr = shot.trajectory;
    if (tr.empty() || r < tr.front().r || r > tr.back().r) {
        throw ParameterDomainError("radius outside the shot trajectory");
    }
    auto it = std::upper_bound(tr.begin(), tr.end(), r,
                               [](double x, const TrajectoryPoint &pt) { return x < pt.r; });
    std::size_t k = it == tr.begin() ? 0 : std::size_t(it - tr.begin()) - 1;
    if (k + 1 >= tr.size()) {
        k = tr.size() >= 2 ? tr.size() - 2 : 0;
    }
    double Q, dQ, V;
    if (tr.size() == 1 || r == tr[k].r) {
        Q = tr[k].Q;
        dQ = tr[k].dQ;
        V = tr[k].V;
    } else {
        const auto &a = tr[k];
        const auto &c = tr[k + 1];
        const auto fa = detail::shooting_rhs(g, a.r, {a.Q, a.dQ, a.H, a.V});
        const auto fc = detail::shooting_rhs(g, c.r, {c.Q, c.dQ, c.H, c.V});
        const detail::Hermite q{a.r, c.r, a.Q, c.Q, a.dQ, c.dQ};
        const detail::Hermite dq{a.r, c.r, a.dQ, c.dQ, fa[1], fc[1]};
        const detail::Hermite v{a.r, c.r, a.V, c.V, fa[3], fc[3]};
        Q = q(r);
        dQ = dq(r);
        V = v(r);
    }
    PohozaevCheck out;
    out.v_integral = V;
    out.v_boundary = pohozaev_boundary(g, r, Q, dQ);
    out.v_displayed = pohozaev_boundary_displayed(g, r, Q, dQ);
    out.residual = std::abs(out.v_integral - out.v_boundary);
    return out;
}

} // namespace inls
