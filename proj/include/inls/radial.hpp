#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "inls/error.hpp"

namespace inls
{

using Complex = std::complex<double>;

/// Uniform grid r_j = j dr, j = 1..n, on (0, r_max) with dr = r_max/(n+1).
/// The origin and r_max carry implicit Dirichlet zeros of w = r u.
class RadialGrid
{
public:
    static RadialGrid make(double r_max, std::size_t n)
    {
        if (!(r_max > 0.0) || !std::isfinite(r_max)) {
            throw ParameterDomainError("grid r_max must be positive and finite");
        }
        if (n == 0) {
            throw ParameterDomainError("grid needs at least one interior node");
        }
        return RadialGrid(r_max, n);
    }

    double r_max() const noexcept { return r_max_; }
    std::size_t n() const noexcept { return nodes_.size(); }
    double dr() const noexcept { return dr_; }
    /// Interior node r_{i+1} for zero-based index i.
    double r(std::size_t i) const noexcept { return nodes_[i]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    /// Same node count on (0, r_max/lambda).
    RadialGrid rescaled(double lambda) const { return make(r_max_ / lambda, n()); }
    /// Grid with dr halved: n -> 2n + 1, nodes of this grid are nested.
    RadialGrid refined() const { return make(r_max_, 2 * n() + 1); }

    bool operator==(const RadialGrid &o) const { return r_max_ == o.r_max_ && n() == o.n(); }

private:
    RadialGrid(double r_max, std::size_t n) : r_max_(r_max), dr_(r_max / double(n + 1)), nodes_(n)
    {
        for (std::size_t i = 0; i < n; ++i) {
            nodes_[i] = double(i + 1) * dr_;
        }
    }

    double r_max_;
    double dr_;
    std::vector<double> nodes_;
};

/// Complex samples of w(r) = r u(r) at the interior nodes of a grid.
struct RadialState
{
    RadialGrid grid;
    std::vector<Complex> w;
    double t = 0.0;

    RadialState(RadialGrid g, std::vector<Complex> samples, double time = 0.0)
        : grid(std::move(g)), w(std::move(samples)), t(time)
    {
        if (w.size() != grid.n()) {
            throw ParameterDomainError("state has " + std::to_string(w.size()) +
                                       " samples for a grid of " + std::to_string(grid.n()));
        }
    }

    static RadialState zero(const RadialGrid &g) { return RadialState(g, std::vector<Complex>(g.n())); }

    /// u at zero-based node i.
    Complex u(std::size_t i) const { return w[i] / grid.r(i); }

    bool finite() const
    {
        for (const auto &z : w) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                return false;
            }
        }
        return true;
    }
};

} // namespace inls
