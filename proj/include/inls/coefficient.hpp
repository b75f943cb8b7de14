#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "inls/detail/pchip.hpp"

#include "inls/error.hpp"
#include "inls/params.hpp"
#include "inls/smoothstep.hpp"

namespace inls
{

enum class Family
{
    PurePower,
    Rational,
    PiecewisePlateau,
    Tabulated,
    Zero,
};

inline std::string_view to_string(Family f)
{
    switch (f) {
    case Family::PurePower: return "pure_power";
    case Family::Rational: return "rational";
    case Family::PiecewisePlateau: return "plateau";
    case Family::Tabulated: return "tabulated";
    case Family::Zero: return "zero";
    }
    return "unknown";
}

inline Family family_from_string(std::string_view s)
{
    if (s == "pure_power" || s == "PurePower") return Family::PurePower;
    if (s == "rational" || s == "Rational") return Family::Rational;
    if (s == "plateau" || s == "PiecewisePlateau") return Family::PiecewisePlateau;
    if (s == "tabulated" || s == "Tabulated") return Family::Tabulated;
    if (s == "zero" || s == "Zero") return Family::Zero;
    throw ParameterDomainError("unknown coefficient family '" + std::string(s) + "'");
}

/// Family selection plus its parameters, as read from a run configuration.
struct CoefficientSpec
{
    Family family = Family::PurePower;
    double a = 1.0;
    double d = 0.0;
    double c = 1.0;
    std::vector<double> table_r;
    std::vector<double> table_g;

    bool operator==(const CoefficientSpec &) const = default;
};

/// Radial interaction coefficient g(r) = r^{-b} h(r).
///
/// Every family is stored through its scaled profile h(r) = r^b g(r), which is
/// bounded by the scaling condition and keeps the r^{-b} singularity out of
/// the family code. A coefficient is immutable; `rescaled(lambda)` returns the
/// coefficient lambda^b g(lambda r) whose profile is h(lambda r).
class Coefficient
{
public:
    static Coefficient pure_power(const ProblemParams &params)
    {
        return Coefficient(params, PurePower{}, 1.0, 1.0, true);
    }

    static Coefficient rational(double a, double d, double c, const ProblemParams &params)
    {
        if (!(a > 0.0) || !(c > 0.0) || !(d >= 0.0) || !(d <= c) || !std::isfinite(a) ||
            !std::isfinite(c)) {
            throw ParameterDomainError("rational family needs a > 0, 0 <= d <= c, c > 0");
        }
        return Coefficient(params, Rational{a, d, c}, a * d / c, a, true);
    }

    static Coefficient plateau(double a, const ProblemParams &params)
    {
        const double p0 = params.p0();
        if (!(a >= 0.0) || !(a < p0 + 1.0)) {
            throw ParameterDomainError("plateau family needs 0 <= a < p0 + 1");
        }
        const double outer = std::pow(p0 / (p0 + 1.0 - a), p0);
        return Coefficient(params, Plateau{a, outer}, std::min(a, outer), std::max(a, outer), true);
    }

    /// Tabulated g on strictly increasing radii r > 0. The scaled profile
    /// r^b g is interpolated by a monotone piecewise cubic; evaluation
    /// outside the table is an error.
    static Coefficient tabulated(std::vector<double> r, std::vector<double> g,
                                 const ProblemParams &params)
    {
        if (r.size() != g.size() || r.size() < 4) {
            throw ParameterDomainError("tabulated coefficient needs at least 4 (r, g) pairs");
        }
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (!(r[k] > 0.0) || !std::isfinite(g[k]) || !(g[k] >= 0.0)) {
                throw ParameterDomainError("tabulated coefficient needs r > 0 and finite g >= 0");
            }
            if (k > 0 && !(r[k] > r[k - 1])) {
                throw ParameterDomainError("tabulated radii must be strictly increasing");
            }
        }
        std::vector<double> h(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) {
            h[k] = std::pow(r[k], params.b()) * g[k];
        }
        const double lo = r.front();
        const double hi = r.back();
        auto interp = std::make_shared<const Pchip>(std::move(r), std::move(h));
        Coefficient coef(params, Table{interp, lo, hi}, 0.0, 0.0, false);
        // Bounds from dense sampling of the interpolant.
        double gi = std::numeric_limits<double>::infinity();
        double gs = -gi;
        const std::size_t count = 20001;
        for (std::size_t k = 0; k < count; ++k) {
            const double s = std::clamp(lo * std::pow(hi / lo, double(k) / double(count - 1)), lo, hi);
            const double v = (*interp)(s);
            gi = std::min(gi, v);
            gs = std::max(gs, v);
        }
        coef.gi_ = std::max(gi, 0.0);
        coef.gs_ = gs;
        return coef;
    }

    /// g identically zero (linear Schroedinger flow).
    static Coefficient zero(const ProblemParams &params)
    {
        return Coefficient(params, Zero{}, 0.0, 0.0, true);
    }

    const ProblemParams &params() const noexcept { return params_; }
    Family family() const noexcept
    {
        return std::visit([](const auto &f) { return f.tag; }, impl_);
    }
    /// True when bounds come from a closed form rather than sampling.
    bool closed_form() const noexcept { return closed_form_; }
    double gi() const noexcept { return gi_; }
    double gs() const noexcept { return gs_; }
    double scale() const noexcept { return scale_; }

    /// Radii over which the coefficient is defined (infinite for closed forms).
    std::pair<double, double> domain() const
    {
        if (const auto *t = std::get_if<Table>(&impl_)) {
            return {t->lo / scale_, t->hi / scale_};
        }
        return {0.0, std::numeric_limits<double>::infinity()};
    }

    /// h(r) = r^b g(r).
    double scaled(double r) const { return profile(scale_ * r).first; }

    /// d/dr (r^b g(r)).
    double scaled_deriv(double r) const { return scale_ * profile(scale_ * r).second; }

    /// lim_{r -> 0+} r^b g(r), or the innermost table value.
    double origin_limit() const
    {
        if (const auto *t = std::get_if<Table>(&impl_)) {
            return (*t->interp)(t->lo);
        }
        return profile(0.0).first;
    }

    double operator()(double r) const
    {
        if (family() == Family::Zero) {
            return 0.0;
        }
        return std::pow(r, -params_.b()) * scaled(r);
    }

    double deriv(double r) const
    {
        if (family() == Family::Zero) {
            return 0.0;
        }
        const double b = params_.b();
        const auto [h, dh] = profile(scale_ * r);
        return std::pow(r, -b - 1.0) * (r * scale_ * dh - b * h);
    }

    /// r g'(r) (that is x . grad g), computed without forming g' separately.
    double radial_derivative(double r) const
    {
        if (family() == Family::Zero) {
            return 0.0;
        }
        const double b = params_.b();
        const auto [h, dh] = profile(scale_ * r);
        return std::pow(r, -b) * (r * scale_ * dh - b * h);
    }

    Coefficient rescaled(double lambda) const
    {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw ParameterDomainError("rescaling factor must be positive");
        }
        Coefficient copy = *this;
        copy.scale_ = scale_ * lambda;
        return copy;
    }

private:
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

    struct PurePower
    {
        static constexpr Family tag = Family::PurePower;
    };
    struct Rational
    {
        static constexpr Family tag = Family::Rational;
        double a, d, c;
    };
    struct Plateau
    {
        static constexpr Family tag = Family::PiecewisePlateau;
        double a, outer;
    };
    struct Table
    {
        static constexpr Family tag = Family::Tabulated;
        std::shared_ptr<const Pchip> interp;
        double lo, hi;
    };
    struct Zero
    {
        static constexpr Family tag = Family::Zero;
    };
    using Impl = std::variant<PurePower, Rational, Plateau, Table, Zero>;

    Coefficient(const ProblemParams &params, Impl impl, double gi, double gs, bool closed)
        : params_(params), impl_(std::move(impl)), gi_(gi), gs_(gs), closed_form_(closed)
    {
    }

    // {h(s), h'(s)} in the unscaled variable s.
    std::pair<double, double> profile(double s) const
    {
        struct Visitor
        {
            double s;
            std::pair<double, double> operator()(const PurePower &) const { return {1.0, 0.0}; }
            std::pair<double, double> operator()(const Zero &) const { return {0.0, 0.0}; }
            std::pair<double, double> operator()(const Rational &f) const
            {
                const double den = s + f.c;
                return {f.a * (s + f.d) / den, f.a * (f.c - f.d) / (den * den)};
            }
            std::pair<double, double> operator()(const Plateau &f) const
            {
                const auto st = smoothstep9(s - 1.0);
                return {f.a + (f.outer - f.a) * st[0], (f.outer - f.a) * st[1]};
            }
            std::pair<double, double> operator()(const Table &f) const
            {
                // Tolerate roundoff at the table ends.
                const double slack = 1e-12 * f.hi;
                if (!(s >= f.lo - slack) || !(s <= f.hi + slack)) {
                    throw ParameterDomainError("tabulated coefficient evaluated at r = " +
                                               std::to_string(s) + " outside table [" +
                                               std::to_string(f.lo) + ", " +
                                               std::to_string(f.hi) + "]");
                }
                const double x = std::clamp(s, f.lo, f.hi);
                return {(*f.interp)(x), f.interp->prime(x)};
            }
        };
        return std::visit(Visitor{s}, impl_);
    }

    ProblemParams params_;
    Impl impl_;
    double gi_;
    double gs_;
    bool closed_form_;
    double scale_ = 1.0;
};

inline Coefficient make_coefficient(const CoefficientSpec &spec, const ProblemParams &params)
{
    switch (spec.family) {
    case Family::PurePower: return Coefficient::pure_power(params);
    case Family::Rational: return Coefficient::rational(spec.a, spec.d, spec.c, params);
    case Family::PiecewisePlateau: return Coefficient::plateau(spec.a, params);
    case Family::Tabulated: return Coefficient::tabulated(spec.table_r, spec.table_g, params);
    case Family::Zero: return Coefficient::zero(params);
    }
    throw ParameterDomainError("unknown coefficient family");
}

// ---------------------------------------------------------------------------
// Structural conditions

struct SamplingGrid
{
    double r_min = 0.0;
    double r_max = 0.0;
    std::size_t count = 0;

    bool operator==(const SamplingGrid &) const = default;
};

/// Worst-case slack of each condition over the sampling grid. Negative
/// values mean the condition is violated by that amount.
struct ConditionMargins
{
    double scaling = 0.0;     // min over r of min(h - gi, gs - h)
    double variational = 0.0; // p0 - g0
    double rigidity = 0.0;    // min over r of (r^b g)'
    std::optional<double> virial; // min over r of (p+1)(kg - rho) h - (r h' - b h)

    bool operator==(const ConditionMargins &) const = default;
};

struct CoefficientReport
{
    double gi = 0.0;
    double gs = 0.0;
    double gs_eff = 0.0;
    double g0 = 0.0;
    std::optional<double> kg;
    std::optional<double> rho_max;
    double rho = 0.0;
    double tolerance = 0.0;
    bool scaling_ok = false;
    bool variational_ok = false;
    bool rigidity_ok = false;
    std::optional<bool> virial_ok; // empty when kg is undefined
    /// sup over the grid of r^{1+b} |g'(r)|.
    double derivative_bound = 0.0;
    ConditionMargins margins;
    SamplingGrid grid;

    bool operator==(const CoefficientReport &) const = default;
};

inline constexpr double kClosedFormTolerance = 1e-12;
inline constexpr double kTabulatedTolerance = 1e-8;
inline constexpr std::size_t kConditionGridPoints = 20001;

inline std::vector<double> log_grid(double lo, double hi, std::size_t count)
{
    std::vector<double> r(count);
    const double ratio = std::log(hi / lo);
    for (std::size_t k = 0; k < count; ++k) {
        r[k] = lo * std::exp(ratio * double(k) / double(count - 1));
    }
    r.front() = lo;
    r.back() = hi;
    return r;
}

/// Evaluates the scaling, variational, rigidity and virial conditions on a
/// dense log grid. Every condition is normalised by r^b before comparison
/// with the tolerance, so the margins are comparable across the grid.
inline CoefficientReport check_conditions(const Coefficient &g, double rho,
                                          std::size_t count = kConditionGridPoints)
{
    if (!(rho >= 0.0) || !std::isfinite(rho)) {
        throw ParameterDomainError("rho must be finite and >= 0");
    }
    if (count < 10000) {
        throw ParameterDomainError("condition grid needs at least 10^4 points");
    }
    const ProblemParams &params = g.params();
    const double b = params.b();
    const double p = params.p();
    const double p0 = params.p0();

    CoefficientReport rep;
    rep.rho = rho;
    rep.tolerance = g.closed_form() ? kClosedFormTolerance : kTabulatedTolerance;
    rep.gi = g.gi();
    rep.gs = g.gs();
    rep.gs_eff = std::pow(rep.gs, 1.0 / p0);
    rep.g0 = rep.gs_eff * (p0 + 1.0 - rep.gi);
    rep.variational_ok = rep.g0 <= p0 + rep.tolerance;
    rep.margins.variational = p0 - rep.g0;
    if (rep.g0 < p0 + 1.0) {
        rep.kg = (p0 - rep.g0) / (p0 + 1.0 - rep.g0);
    }

    auto [lo, hi] = g.domain();
    lo = std::max(lo, 1e-6);
    hi = std::min(hi, 1e6);
    rep.grid = {lo, hi, count};
    const auto radii = log_grid(lo, hi, count);

    const double tol = rep.tolerance;
    double scaling_margin = std::numeric_limits<double>::infinity();
    double rigidity_margin = std::numeric_limits<double>::infinity();
    double virial_margin = std::numeric_limits<double>::infinity();
    double rho_inf = std::numeric_limits<double>::infinity();
    double deriv_bound = 0.0;
    bool monotone = true;
    bool nonnegative = true;
    double previous = -std::numeric_limits<double>::infinity();
    for (const double r : radii) {
        const double h = g.scaled(r);
        const double dh = g.scaled_deriv(r);
        nonnegative = nonnegative && h >= -tol;
        scaling_margin = std::min({scaling_margin, h - rep.gi, rep.gs - h});
        rigidity_margin = std::min(rigidity_margin, dh);
        monotone = monotone && h >= previous - tol;
        previous = h;
        // r^{1+b} g' = r h' - b h.
        const double radial = r * dh - b * h;
        deriv_bound = std::max(deriv_bound, std::abs(radial));
        if (rep.kg) {
            virial_margin = std::min(virial_margin, (p + 1.0) * (*rep.kg - rho) * h - radial);
        }
        if (h > 0.0) {
            rho_inf = std::min(rho_inf, -radial / ((p + 1.0) * h));
        }
    }
    rep.derivative_bound = deriv_bound;
    rep.margins.scaling = scaling_margin;
    rep.margins.rigidity = rigidity_margin;
    rep.scaling_ok = nonnegative && scaling_margin >= -tol && std::isfinite(deriv_bound);
    rep.rigidity_ok = rigidity_margin >= -tol && monotone;
    if (rep.kg) {
        rep.margins.virial = virial_margin;
        rep.virial_ok = virial_margin >= -tol;
        if (std::isfinite(rho_inf)) {
            rep.rho_max = std::max(0.0, *rep.kg + rho_inf);
        }
    }
    return rep;
}

} // namespace inls
