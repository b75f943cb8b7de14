#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>

#include "inls/error.hpp"
#include "inls/smoothstep.hpp"

namespace inls
{

enum class WeightKind
{
    QuadraticCutoff, // R^2 B(r/R), B(s) = s^2 on [0,1], 0 for s >= 10
    SmoothBeta,      // b' = R beta(r/R), beta(s) = s on [0,1], 0 for s >= 10
    Unbounded,       // |x|^2
    Custom,          // value and first derivative only
};

inline std::string_view to_string(WeightKind k)
{
    switch (k) {
    case WeightKind::QuadraticCutoff: return "quadratic_cutoff";
    case WeightKind::SmoothBeta: return "smooth_beta";
    case WeightKind::Unbounded: return "unbounded";
    case WeightKind::Custom: return "custom";
    }
    return "unknown";
}

inline WeightKind weight_kind_from_string(std::string_view s)
{
    if (s == "quadratic_cutoff") return WeightKind::QuadraticCutoff;
    if (s == "smooth_beta") return WeightKind::SmoothBeta;
    if (s == "unbounded") return WeightKind::Unbounded;
    throw ParameterDomainError("unknown virial weight '" + std::string(s) + "'");
}

namespace detail
{

// chi(s) = 1 on [0,1], 1 - S((s-1)/9) on [1,10], 0 beyond; derivatives in s.
inline std::array<double, 5> cutoff_chi(double s)
{
    const auto st = smoothstep9((s - 1.0) / 9.0);
    std::array<double, 5> chi{1.0 - st[0], 0.0, 0.0, 0.0, 0.0};
    double scale = 1.0;
    for (int k = 1; k < 5; ++k) {
        scale /= 9.0;
        chi[k] = -st[k] * scale;
    }
    return chi;
}

// Antiderivative of 9 (1 + 9x)(1 - S(x)) from 0, as polynomial coefficients in x.
inline const std::array<double, 12> &beta_integral_coefficients()
{
    static const std::array<double, 12> coeffs = [] {
        std::array<double, 10> one_minus{};
        for (int k = 0; k < 10; ++k) {
            one_minus[k] = -kSmoothstep9Coefficients[k];
        }
        one_minus[0] += 1.0;
        std::array<double, 11> prod{};
        for (int k = 0; k < 10; ++k) {
            prod[k] += 9.0 * one_minus[k];
            prod[k + 1] += 81.0 * one_minus[k];
        }
        std::array<double, 12> out{};
        for (int k = 0; k < 11; ++k) {
            out[k + 1] = prod[k] / double(k + 1);
        }
        return out;
    }();
    return coeffs;
}

inline double beta_antiderivative(double s)
{
    if (s <= 1.0) {
        return 0.5 * s * s;
    }
    const double x = std::min((s - 1.0) / 9.0, 1.0);
    const auto &c = beta_integral_coefficients();
    double acc = 0.0;
    for (int k = 11; k >= 0; --k) {
        acc = acc * x + c[k];
    }
    return 0.5 + acc;
}

} // namespace detail

/// beta(s) = s chi(s) and its first four derivatives.
inline std::array<double, 5> smooth_beta(double s)
{
    const auto chi = detail::cutoff_chi(s);
    std::array<double, 5> out{};
    out[0] = s * chi[0];
    for (int k = 1; k < 5; ++k) {
        out[k] = s * chi[k] + double(k) * chi[k - 1];
    }
    return out;
}

/// Radial virial weight b(r) with derivatives up to fourth order.
class VirialWeight
{
public:
    static VirialWeight unbounded() { return VirialWeight(WeightKind::Unbounded, 0.0); }

    static VirialWeight quadratic_cutoff(double scale)
    {
        check_scale(scale);
        return VirialWeight(WeightKind::QuadraticCutoff, scale);
    }

    static VirialWeight smooth_beta(double scale)
    {
        check_scale(scale);
        return VirialWeight(WeightKind::SmoothBeta, scale);
    }

    static VirialWeight custom(std::function<double(double)> b, std::function<double(double)> db)
    {
        VirialWeight w(WeightKind::Custom, 0.0);
        w.custom_b_ = std::move(b);
        w.custom_db_ = std::move(db);
        return w;
    }

    static VirialWeight make(WeightKind kind, double scale)
    {
        switch (kind) {
        case WeightKind::Unbounded: return unbounded();
        case WeightKind::QuadraticCutoff: return quadratic_cutoff(scale);
        case WeightKind::SmoothBeta: return smooth_beta(scale);
        case WeightKind::Custom: break;
        }
        throw UnsupportedWeight("custom weights need explicit evaluators");
    }

    WeightKind kind() const noexcept { return kind_; }
    double scale() const noexcept { return scale_; }
    bool has_fourth_derivative() const noexcept { return kind_ != WeightKind::Custom; }

    double value(double r) const
    {
        switch (kind_) {
        case WeightKind::Unbounded: return r * r;
        case WeightKind::QuadraticCutoff: {
            const double s = r / scale_;
            return scale_ * scale_ * s * s * detail::cutoff_chi(s)[0];
        }
        case WeightKind::SmoothBeta: return scale_ * scale_ * detail::beta_antiderivative(r / scale_);
        case WeightKind::Custom: return custom_b_(r);
        }
        return 0.0;
    }

    double first(double r) const
    {
        if (kind_ == WeightKind::Custom) {
            return custom_db_(r);
        }
        return derivatives(r)[1];
    }

    /// {b, b', b'', b''', b''''} at r.
    std::array<double, 5> derivatives(double r) const
    {
        switch (kind_) {
        case WeightKind::Unbounded: return {r * r, 2.0 * r, 2.0, 0.0, 0.0};
        case WeightKind::QuadraticCutoff: {
            const double R = scale_;
            const double s = r / R;
            const auto chi = detail::cutoff_chi(s);
            // Leibniz rule for s^2 chi(s).
            const double B0 = s * s * chi[0];
            const double B1 = s * s * chi[1] + 2.0 * s * chi[0];
            const double B2 = s * s * chi[2] + 4.0 * s * chi[1] + 2.0 * chi[0];
            const double B3 = s * s * chi[3] + 6.0 * s * chi[2] + 6.0 * chi[1];
            const double B4 = s * s * chi[4] + 8.0 * s * chi[3] + 12.0 * chi[2];
            return {R * R * B0, R * B1, B2, B3 / R, B4 / (R * R)};
        }
        case WeightKind::SmoothBeta: {
            const double R = scale_;
            const auto beta = inls::smooth_beta(r / R);
            return {value(r), R * beta[0], beta[1], beta[2] / R, beta[3] / (R * R)};
        }
        case WeightKind::Custom:
            throw UnsupportedWeight("custom weight provides only b and b'");
        }
        return {};
    }

    /// Delta b = b'' + 2 b' / r.
    double laplacian(double r) const
    {
        const auto d = derivatives(r);
        return d[2] + 2.0 * d[1] / r;
    }

    /// Delta^2 b = b'''' + 4 b''' / r for radial b.
    double bilaplacian(double r) const
    {
        const auto d = derivatives(r);
        return d[4] + 4.0 * d[3] / r;
    }

private:
    VirialWeight(WeightKind kind, double scale) : kind_(kind), scale_(scale) {}

    static void check_scale(double scale)
    {
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            throw ParameterDomainError("virial weight scale must be positive");
        }
    }

    WeightKind kind_;
    double scale_;
    std::function<double(double)> custom_b_;
    std::function<double(double)> custom_db_;
};

} // namespace inls
