#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "inls/coefficient.hpp"
#include "inls/params.hpp"
#include "inls/quadrature.hpp"

namespace inls
{

/// The explicit radial ground state Q_b(r) = (1 + r^{p0}/(p0+1))^{-1/p0} of
/// Delta Q + |x|^{-b} Q^p = 0, together with its threshold quantities.
///
/// Thresholds use the pure-power potential: they do not depend on the run's
/// coefficient g.
class GroundState
{
public:
    /// Radius separating the finite-interval quadrature from the mapped tail.
    static constexpr double kSplitRadius = 1e6;
    static constexpr double kQuadratureTolerance = 1e-13;

    explicit GroundState(const ProblemParams &params) : params_(params)
    {
        const double p0 = params.p0();
        const double p = params.p();
        const quad::Tolerance tol{kQuadratureTolerance, 1e-300, 20000};
        auto grad_integrand = [this](double r) {
            const double d = Qprime(r);
            return d * d * r * r;
        };
        auto potential_integrand = [this, p](double r) {
            return std::pow(r, 2.0 - params_.b()) * std::pow(Q(r), p + 1.0);
        };
        const double four_pi = 4.0 * std::numbers::pi;
        grad_norm_sq_ = four_pi * (quad::integrate(grad_integrand, 0.0, 1.0, tol).value +
                                   quad::integrate(grad_integrand, 1.0, kSplitRadius, tol).value +
                                   quad::integrate_to_infinity(grad_integrand, kSplitRadius, tol).value);
        potential_integral_ =
            four_pi * (quad::integrate(potential_integrand, 0.0, 1.0, tol).value +
                       quad::integrate(potential_integrand, 1.0, kSplitRadius, tol).value +
                       quad::integrate_to_infinity(potential_integrand, kSplitRadius, tol).value);
        // Leading-order tail beyond the split radius, from Q ~ (p0+1)^{1/p0} / r.
        tail_estimate_ = four_pi * std::pow(p0 + 1.0, 2.0 / p0) / kSplitRadius;
        threshold_energy_ = grad_norm_sq_ / 2.0 - potential_integral_ / (p + 1.0);
        best_constant_ = std::pow(potential_integral_, 1.0 / (p + 1.0)) / std::sqrt(grad_norm_sq_);
    }

    const ProblemParams &params() const noexcept { return params_; }

    double Q(double r) const
    {
        const double p0 = params_.p0();
        return std::pow(1.0 + std::pow(r, p0) / (p0 + 1.0), -1.0 / p0);
    }

    double Qprime(double r) const
    {
        if (r == 0.0) {
            return params_.p0() > 1.0 ? 0.0 : (params_.p0() == 1.0 ? -0.5 : -std::numeric_limits<double>::infinity());
        }
        const double p0 = params_.p0();
        const double x = std::pow(r, p0) / (p0 + 1.0);
        return -std::pow(r, p0 - 1.0) / (p0 + 1.0) * std::pow(1.0 + x, -1.0 / p0 - 1.0);
    }

    double Qsecond(double r) const
    {
        const double p0 = params_.p0();
        const double x = std::pow(r, p0) / (p0 + 1.0);
        const double base = 1.0 + x;
        return -(p0 - 1.0) * std::pow(r, p0 - 2.0) / (p0 + 1.0) * std::pow(base, -1.0 / p0 - 1.0) +
               std::pow(r, 2.0 * p0 - 2.0) / (p0 + 1.0) * std::pow(base, -1.0 / p0 - 2.0);
    }

    /// ||grad Q_b||^2 over R^3.
    double grad_norm_sq() const noexcept { return grad_norm_sq_; }
    /// Integral of |x|^{-b} Q_b^{p+1} over R^3.
    double potential_integral() const noexcept { return potential_integral_; }
    /// E(Q_b) with the pure-power potential.
    double threshold_energy() const noexcept { return threshold_energy_; }
    /// Sharp constant in || |x|^{-b/(p+1)} u ||_{p+1} <= C ||u||_{H^1-dot}.
    double best_constant() const noexcept { return best_constant_; }
    /// Leading-order estimate of the grad-norm tail beyond kSplitRadius.
    double tail_estimate() const noexcept { return tail_estimate_; }

    /// f(y) = y/2 - C^{p+1}/(p+1) y^{(p+1)/2}; maximal at y = ||Q_b||^2 with
    /// value threshold_energy().
    double trapping_function(double y) const
    {
        const double p = params_.p();
        return 0.5 * y - std::pow(best_constant_, p + 1.0) / (p + 1.0) * std::pow(y, 0.5 * (p + 1.0));
    }

private:
    ProblemParams params_;
    double grad_norm_sq_ = 0.0;
    double potential_integral_ = 0.0;
    double threshold_energy_ = 0.0;
    double best_constant_ = 0.0;
    double tail_estimate_ = 0.0;
};

inline GroundState build_ground_state(const ProblemParams &params) { return GroundState(params); }

/// Q'' + (2/r) Q' + r^{-b} Q^p for the explicit ground state.
inline double ode_residual(const GroundState &gs, double r)
{
    const double b = gs.params().b();
    const double p = gs.params().p();
    return gs.Qsecond(r) + 2.0 / r * gs.Qprime(r) + std::pow(r, -b) * std::pow(gs.Q(r), p);
}

/// E_g(Q_b) evaluated with the run's coefficient g instead of |x|^{-b}.
inline double energy_with_coefficient(const GroundState &gs, const Coefficient &g)
{
    const double p = gs.params().p();
    const double b = gs.params().b();
    const quad::Tolerance tol{1e-12, 1e-300, 20000};
    auto integrand = [&](double r) {
        return g.scaled(r) * std::pow(r, 2.0 - b) * std::pow(gs.Q(r), p + 1.0);
    };
    auto [lo, hi] = g.domain();
    double potential = 0.0;
    if (lo > 0.0 || std::isfinite(hi)) {
        potential = quad::integrate(integrand, lo, hi, tol).value;
    } else {
        potential = quad::integrate(integrand, 0.0, 1.0, tol).value +
                    quad::integrate(integrand, 1.0, GroundState::kSplitRadius, tol).value +
                    quad::integrate_to_infinity(integrand, GroundState::kSplitRadius, tol).value;
    }
    potential *= 4.0 * std::numbers::pi;
    return gs.grad_norm_sq() / 2.0 - potential / (p + 1.0);
}

/// H(r) = int_0^r s^{3-b} (s^b g)' ds.
inline double compute_H(const Coefficient &g, double r)
{
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw ParameterDomainError("compute_H needs a finite r >= 0");
    }
    if (r == 0.0) {
        return 0.0;
    }
    const double b = g.params().b();
    auto integrand = [&](double s) { return std::pow(s, 3.0 - b) * g.scaled_deriv(s); };
    const auto [lo, hi] = g.domain();
    if (lo > 0.0) {
        throw NumericFailure("H(r) needs the coefficient down to r = 0; table starts at " +
                             std::to_string(lo));
    }
    if (r > hi) {
        throw ParameterDomainError("H(r) requested beyond the coefficient table");
    }
    const quad::Tolerance tol{1e-12, 1e-300, 20000};
    return quad::integrate(integrand, 0.0, r, tol).value;
}

} // namespace inls
