#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "inls/coefficient.hpp"
#include "inls/error.hpp"
#include "inls/radial.hpp"
#include "inls/virial_weight.hpp"

namespace inls
{

/// Monitored functionals of a radial state. All integrals are over R^3.
struct DiagnosticsRecord
{
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double grad_norm_sq = 0.0;
    double potential = 0.0;   // int g |u|^{p+1}
    double lp1_norm = 0.0;    // ||u||_{L^{p+1}}
    double virial_V = 0.0;    // int |x|^2 |u|^2
    double z_r = 0.0;         // int b_r |u|^2 for the run's weight
    double z_r_prime = 0.0;
    double lvirial_rhs = 0.0;
    double strauss_ratio = 0.0;
    double s_increment = 0.0; // int over the last window of int |u|^10

    bool operator==(const DiagnosticsRecord &) const = default;
};

// The discrete functionals below are the ones conserved by the semi-discrete
// flow i w_t + D2 w + g |w/r|^{p-1} w = 0: mass 4 pi dr sum |w_j|^2 and the
// energy built from forward differences of w (with w_0 = w_{n+1} = 0).

inline double mass(const RadialState &s)
{
    double acc = 0.0;
    for (const auto &z : s.w) {
        acc += std::norm(z);
    }
    return 4.0 * std::numbers::pi * s.grid.dr() * acc;
}

/// ||grad u||^2 = 4 pi int |w_r|^2 dr, forward differences.
inline double grad_norm_sq(const RadialState &s)
{
    const std::size_t n = s.w.size();
    double acc = 0.0;
    Complex prev{};
    for (std::size_t i = 0; i < n; ++i) {
        acc += std::norm(s.w[i] - prev);
        prev = s.w[i];
    }
    acc += std::norm(prev);
    return 4.0 * std::numbers::pi * acc / s.grid.dr();
}

/// int g |u|^{p+1} dx.
inline double potential(const RadialState &s, const Coefficient &g)
{
    const double p = g.params().p();
    double acc = 0.0;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        const double r = s.grid.r(i);
        const double a = std::abs(s.w[i]);
        if (a == 0.0) {
            continue;
        }
        acc += g(r) * std::pow(a, p + 1.0) * std::pow(r, 1.0 - p);
    }
    return 4.0 * std::numbers::pi * s.grid.dr() * acc;
}

inline double energy(const RadialState &s, const Coefficient &g)
{
    return grad_norm_sq(s) / 2.0 - potential(s, g) / (g.params().p() + 1.0);
}

/// int |u|^10 dx, the integrand of the scattering-size proxy.
inline double l10_integrand(const RadialState &s)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        const double u2 = std::norm(s.w[i]) / (s.grid.r(i) * s.grid.r(i));
        const double u4 = u2 * u2;
        acc += u4 * u4 * u2 * s.grid.r(i) * s.grid.r(i);
    }
    return 4.0 * std::numbers::pi * s.grid.dr() * acc;
}

/// dz/dt = 2 Im int grad b . grad u conj(u) dx = 8 pi int b'(r) Im(conj(w) w_r) dr,
/// with b' at cell midpoints.
inline double z_prime(const RadialState &s, const VirialWeight &weight)
{
    const std::size_t n = s.w.size();
    const double dr = s.grid.dr();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double mid = (double(i) + 1.5) * dr;
        acc += weight.first(mid) * std::imag(std::conj(s.w[i]) * s.w[i + 1]);
    }
    return 8.0 * std::numbers::pi * acc;
}

/// Right side of the localized virial identity for a radial weight b:
///   4 int b'' |u_r|^2 - (2p-2)/(p+1) int (Delta b) g |u|^{p+1}
///   + 4/(p+1) int b' g' |u|^{p+1} - int (Delta^2 b) |u|^2.
/// The Hessian term uses int b'' |u_r|^2 r^2 dr = int b'' |w_r|^2 dr + int (b'''/r) |w|^2 dr.
inline double lvirial_rhs(const RadialState &s, const Coefficient &g, const VirialWeight &weight)
{
    if (!weight.has_fourth_derivative()) {
        throw UnsupportedWeight("localized virial identity needs the bi-Laplacian of the weight");
    }
    const double p = g.params().p();
    const std::size_t n = s.w.size();
    const double dr = s.grid.dr();

    double hessian = 0.0;
    Complex prev{};
    for (std::size_t i = 0; i <= n; ++i) {
        const Complex next = i < n ? s.w[i] : Complex{};
        const double mid = (double(i) + 0.5) * dr;
        hessian += weight.derivatives(mid)[2] * std::norm(next - prev);
        prev = next;
    }
    hessian /= dr * dr;

    double third = 0.0;
    double lap = 0.0;
    double cross = 0.0;
    double bilap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = s.grid.r(i);
        const double w2 = std::norm(s.w[i]);
        const auto d = weight.derivatives(r);
        third += d[3] / r * w2;
        bilap += (d[4] + 4.0 * d[3] / r) * w2;
        if (w2 == 0.0) {
            continue;
        }
        // |u|^{p+1} r^2 = |w|^{p+1} r^{1-p}.
        const double up = std::pow(w2, 0.5 * (p + 1.0)) * std::pow(r, 1.0 - p);
        lap += (d[2] + 2.0 * d[1] / r) * g(r) * up;
        cross += d[1] * g.deriv(r) * up;
    }
    const double four_pi_dr = 4.0 * std::numbers::pi * dr;
    return 4.0 * four_pi_dr * (hessian + third) - (2.0 * p - 2.0) / (p + 1.0) * four_pi_dr * lap +
           4.0 / (p + 1.0) * four_pi_dr * cross - four_pi_dr * bilap;
}

/// Assembles every monitored functional for one snapshot. `s_increment` is
/// the time integral of int |u|^10 over the window since the previous record,
/// accumulated by the caller.
inline DiagnosticsRecord record(const RadialState &s, const Coefficient &g, const VirialWeight &weight,
                                double s_increment = 0.0)
{
    const double p = g.params().p();
    const double dr = s.grid.dr();
    const double four_pi_dr = 4.0 * std::numbers::pi * dr;

    DiagnosticsRecord rec;
    rec.t = s.t;
    rec.mass = mass(s);
    rec.grad_norm_sq = grad_norm_sq(s);
    double pot = 0.0;
    double lp1 = 0.0;
    double vir = 0.0;
    double z = 0.0;
    double sup = 0.0;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        const double r = s.grid.r(i);
        const double w2 = std::norm(s.w[i]);
        vir += r * r * w2;
        z += weight.value(r) * w2;
        if (w2 == 0.0) {
            continue;
        }
        const double up = std::pow(w2, 0.5 * (p + 1.0)) * std::pow(r, 1.0 - p);
        pot += g(r) * up;
        lp1 += up;
        sup = std::max(sup, std::sqrt(w2 / r));
    }
    rec.potential = four_pi_dr * pot;
    rec.energy = rec.grad_norm_sq / 2.0 - rec.potential / (p + 1.0);
    rec.lp1_norm = std::pow(four_pi_dr * lp1, 1.0 / (p + 1.0));
    rec.virial_V = four_pi_dr * vir;
    rec.z_r = four_pi_dr * z;
    rec.z_r_prime = z_prime(s, weight);
    rec.lvirial_rhs = weight.has_fourth_derivative() ? lvirial_rhs(s, g, weight) : 0.0;
    const double denom = std::pow(rec.mass, 0.25) * std::pow(rec.grad_norm_sq, 0.25);
    rec.strauss_ratio = denom > 0.0 ? sup / denom : 0.0;
    rec.s_increment = s_increment;
    return rec;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::array<const char *, 12> kDiagnosticsColumns = {
    "t",        "mass",        "energy",      "grad_norm_sq", "potential",     "lp1_norm",
    "virial_V", "z_r",         "z_r_prime",   "lvirial_rhs",  "strauss_ratio", "s_increment"};

inline std::array<double, 12> as_row(const DiagnosticsRecord &r)
{
    return {r.t,   r.mass,      r.energy,      r.grad_norm_sq,  r.potential,     r.lp1_norm,
            r.virial_V, r.z_r, r.z_r_prime, r.lvirial_rhs, r.strauss_ratio, r.s_increment};
}

inline DiagnosticsRecord from_row(const std::array<double, 12> &v)
{
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11]};
}

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_header(std::ostream &os)
{
    for (std::size_t k = 0; k < kDiagnosticsColumns.size(); ++k) {
        os << (k ? "," : "") << kDiagnosticsColumns[k];
    }
    os << '\n';
}

inline void write_csv_row(std::ostream &os, const DiagnosticsRecord &rec)
{
    const auto row = as_row(rec);
    for (std::size_t k = 0; k < row.size(); ++k) {
        os << (k ? "," : "") << format_double(row[k]);
    }
    os << '\n';
}

inline std::vector<DiagnosticsRecord> read_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line)) {
        throw ValidationError("diagnostics", "empty CSV");
    }
    std::ostringstream expected;
    write_csv_header(expected);
    if (line + "\n" != expected.str()) {
        throw ValidationError("diagnostics", "unexpected CSV header '" + line + "'");
    }
    std::vector<DiagnosticsRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::array<double, 12> v{};
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k >= v.size()) {
                throw ValidationError("diagnostics", "too many CSV columns");
            }
            v[k++] = std::stod(cell);
        }
        if (k != v.size()) {
            throw ValidationError("diagnostics", "too few CSV columns");
        }
        out.push_back(from_row(v));
    }
    return out;
}

} // namespace inls
