#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "inls/detail/pchip.hpp"

#include "inls/coefficient.hpp"
#include "inls/diagnostics.hpp"
#include "inls/error.hpp"
#include "inls/ground_state.hpp"
#include "inls/radial.hpp"
#include "inls/sine_transform.hpp"
#include "inls/smoothstep.hpp"

namespace inls
{

// ---------------------------------------------------------------------------
// Initial data

/// A exp(-r^2 / sigma^2).
struct GaussianProfile
{
    double amplitude = 1.0;
    double sigma = 1.0;
};

/// c lambda^{1/2} Q_b(lambda r), multiplied by a smooth taper that falls from
/// 1 at taper_start to 0 at taper_end. Q_b decays like 1/r and is not square
/// integrable, so the taper is what makes it representable on a truncated
/// grid. Non-positive taper radii select r_max/16 and r_max/2.
///
/// Cutting the tail costs kinetic energy: to leading order the taper T adds
/// 16 pi c^2 int T'^2 dr, about 19.2 pi c^2 / L for the cubic step over a
/// width L. Near-threshold data therefore needs a wide taper on a large grid.
struct GroundStateProfile
{
    double c = 1.0;
    double lambda = 1.0;
    double taper_start = 0.0;
    double taper_end = 0.0;
};

/// phi given at sample radii, interpolated monotonically piecewise-cubic.
struct TabulatedProfile
{
    std::vector<double> r;
    std::vector<double> phi;
};

using Profile = std::variant<GaussianProfile, GroundStateProfile, TabulatedProfile>;

struct PreparedState
{
    RadialState state;
    /// Share of the discrete mass beyond r_max / 2.
    double tail_mass_fraction = 0.0;
};

inline constexpr double kTailMassLimit = 0.01;

/// Effective taper radii of a ground-state profile on a given grid.
inline std::pair<double, double> taper_radii(const GroundStateProfile &prof, const RadialGrid &grid)
{
    double end = prof.taper_end > 0.0 ? prof.taper_end : grid.r_max() / 2.0;
    double start = prof.taper_start > 0.0 ? prof.taper_start : end / 8.0;
    if (!(start < end)) {
        throw ParameterDomainError("taper_start must be below taper_end");
    }
    return {start, end};
}

/// phi(r) for a profile; tabulated profiles are zero beyond their last sample.
inline std::function<double(double)> profile_function(const Profile &profile, const RadialGrid &grid,
                                                      const ProblemParams &params)
{
    struct Visitor
    {
        const RadialGrid &grid;
        const ProblemParams &params;

        std::function<double(double)> operator()(const GaussianProfile &g) const
        {
            if (!(g.amplitude >= 0.0) || !(g.sigma > 0.0) || !std::isfinite(g.amplitude) ||
                !std::isfinite(g.sigma)) {
                throw ParameterDomainError("gaussian profile needs A >= 0 and sigma > 0");
            }
            return [g](double r) { return g.amplitude * std::exp(-(r * r) / (g.sigma * g.sigma)); };
        }

        std::function<double(double)> operator()(const GroundStateProfile &q) const
        {
            if (!(q.c >= 0.0) || !(q.lambda > 0.0) || !std::isfinite(q.c) || !std::isfinite(q.lambda)) {
                throw ParameterDomainError("ground-state profile needs c >= 0 and lambda > 0");
            }
            const auto [start, end] = taper_radii(q, grid);
            const double p0 = params.p0();
            const double amp = q.c * std::sqrt(q.lambda);
            return [=, lambda = q.lambda](double r) {
                const double x = lambda * r;
                const double base = std::pow(1.0 + std::pow(x, p0) / (p0 + 1.0), -1.0 / p0);
                const double taper = 1.0 - smoothstep3((r - start) / (end - start));
                return amp * base * taper;
            };
        }

        std::function<double(double)> operator()(const TabulatedProfile &t) const
        {
            if (t.r.size() != t.phi.size() || t.r.size() < 4) {
                throw ParameterDomainError("tabulated profile needs at least 4 (r, phi) pairs");
            }
            for (std::size_t k = 0; k < t.r.size(); ++k) {
                if (!std::isfinite(t.phi[k]) || !(t.r[k] >= 0.0) ||
                    (k > 0 && !(t.r[k] > t.r[k - 1]))) {
                    throw ParameterDomainError("tabulated profile needs increasing r >= 0 and finite phi");
                }
            }
            if (t.r.front() > grid.r(0)) {
                throw ParameterDomainError("tabulated profile does not reach the first grid node");
            }
            auto interp = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
                std::vector<double>(t.r), std::vector<double>(t.phi));
            const double last = t.r.back();
            return [interp, last](double r) { return r > last ? 0.0 : (*interp)(r); };
        }
    };
    return std::visit(Visitor{grid, params}, profile);
}

/// Samples w_j = r_j phi(r_j). Throws TruncationWarning when more than 1% of
/// the discrete mass lies beyond r_max / 2.
inline PreparedState prepare_initial(const Profile &profile, const RadialGrid &grid,
                                     const ProblemParams &params)
{
    const auto phi = profile_function(profile, grid, params);
    std::vector<Complex> w(grid.n());
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < grid.n(); ++i) {
        const double r = grid.r(i);
        const double v = phi(r);
        if (!std::isfinite(v)) {
            throw ParameterDomainError("initial profile is not finite at r = " + std::to_string(r));
        }
        w[i] = r * v;
        total += r * r * v * v;
        if (r > grid.r_max() / 2.0) {
            tail += r * r * v * v;
        }
    }
    PreparedState out{RadialState(grid, std::move(w)), total > 0.0 ? tail / total : 0.0};
    if (out.tail_mass_fraction > kTailMassLimit) {
        throw TruncationWarning("initial data not decaying: " +
                                std::to_string(100.0 * out.tail_mass_fraction) +
                                "% of the mass lies beyond r_max/2");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time stepping

enum class Scheme
{
    /// Implicit midpoint rule: Crank-Nicolson in the sine basis for the
    /// linear part, nonlinearity at the midpoint, fixed-point iteration.
    Midpoint,
    /// Strang splitting with the exact pointwise nonlinear phase.
    Strang,
};

inline std::string_view to_string(Scheme s)
{
    return s == Scheme::Midpoint ? "midpoint" : "strang";
}

inline Scheme scheme_from_string(std::string_view s)
{
    if (s == "midpoint") return Scheme::Midpoint;
    if (s == "strang") return Scheme::Strang;
    throw ValidationError("controls", "unknown scheme '" + std::string(s) + "'");
}

/// Time stepper for i w_t + D2 w + g |w/r|^{p-1} w = 0, with D2 the Dirichlet
/// second difference on the interior nodes. D2 is diagonal in the discrete
/// sine basis with eigenvalues -mu_k. Both schemes conserve the discrete mass.
///
/// The split scheme applies the phase exp(i tau g |u|^{p-1}), which near the
/// origin behaves like exp(i tau c r^{-b}). For b >= 1/2 that map does not
/// preserve H^1, so once dt mu_max is large every step pushes energy into the
/// top of the spectrum. The midpoint scheme never applies the phase map on
/// its own and keeps energy errors at O(dt^2) on fine grids.
class Stepper
{
public:
    Stepper(const RadialGrid &grid, const Coefficient &g, Scheme scheme = Scheme::Midpoint)
        : grid_(grid), scheme_(scheme), transform_(grid.n()), rate_(grid.n()), eigen_(grid.n()),
          factor_(grid.n()), aux_(grid.n()), w0_(grid.n()), wm_(grid.n()), p_(g.params().p())
    {
        const std::size_t n = grid.n();
        const double dr = grid.dr();
        for (std::size_t i = 0; i < n; ++i) {
            const double r = grid.r(i);
            // g |u|^{p-1} = g r^{1-p} |w|^{p-1}.
            rate_[i] = g(r) * std::pow(r, 1.0 - p_);
            const double s = std::sin(std::numbers::pi * double(i + 1) / (2.0 * double(n + 1)));
            eigen_[i] = 4.0 / (dr * dr) * s * s;
        }
    }

    Stepper(const Stepper &) = delete;
    Stepper &operator=(const Stepper &) = delete;

    const RadialGrid &grid() const noexcept { return grid_; }
    Scheme scheme() const noexcept { return scheme_; }

    /// Eigenvalues mu_k of -D2.
    const std::vector<double> &eigenvalues() const noexcept { return eigen_; }

    /// max_j g(r_j) |u_j|^{p-1}: the local phase rotation rate.
    double max_phase_rate(const RadialState &s) const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < s.w.size(); ++i) {
            m = std::max(m, rate_[i] * power(std::norm(s.w[i])));
        }
        return m;
    }

    /// Advances s by dt in place. Returns false, leaving s untouched, when the
    /// midpoint iteration does not converge; the caller should retry with a
    /// smaller step. Throws NumericFailure on non-finite output.
    bool advance(RadialState &s, double dt)
    {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ParameterDomainError("time step must be positive");
        }
        if (!(s.grid == grid_)) {
            throw ParameterDomainError("state grid does not match the stepper grid");
        }
        if (scheme_ == Scheme::Strang) {
            strang(s.w, dt);
        } else if (!midpoint(s.w, dt)) {
            return false;
        }
        s.t += dt;
        for (const auto &z : s.w) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                throw NumericFailure("non-finite values after step at t = " + std::to_string(s.t));
            }
        }
        return true;
    }

    int last_iterations() const noexcept { return iterations_; }

    static constexpr int kMaxIterations = 60;
    static constexpr double kIterationTolerance = 1e-14;

private:
    // |w|^{p-1} from |w|^2.
    double power(double a2) const
    {
        if (a2 == 0.0) {
            return 0.0;
        }
        return p_ == 3.0 ? a2 : std::pow(a2, 0.5 * (p_ - 1.0));
    }

    void prepare(double dt)
    {
        if (dt == factor_dt_) {
            return;
        }
        const double scale = transform_.inverse_scale();
        for (std::size_t k = 0; k < eigen_.size(); ++k) {
            if (scheme_ == Scheme::Strang) {
                factor_[k] = std::polar(scale, -dt * eigen_[k]);
            } else {
                // Cayley factor and the midpoint resolvent.
                const Complex den(1.0, 0.5 * dt * eigen_[k]);
                factor_[k] = std::conj(den) / den;
                aux_[k] = Complex(0.0, dt) / den;
            }
        }
        factor_dt_ = dt;
    }

    void strang(std::vector<Complex> &w, double dt)
    {
        prepare(dt);
        auto buf = transform_.buffer();
        const double half = 0.5 * dt;
        auto kick = [&](Complex z, std::size_t i) {
            const double theta = half * rate_[i] * power(std::norm(z));
            return z * Complex(std::cos(theta), std::sin(theta));
        };
        for (std::size_t i = 0; i < buf.size(); ++i) {
            buf[i] = kick(w[i], i);
        }
        transform_.execute();
        for (std::size_t k = 0; k < buf.size(); ++k) {
            buf[k] *= factor_[k];
        }
        transform_.execute();
        for (std::size_t i = 0; i < buf.size(); ++i) {
            w[i] = kick(buf[i], i);
        }
        iterations_ = 1;
    }

    // (1 + i dt mu/2) c1 = (1 - i dt mu/2) c0 + i dt F(wm),  wm = (w0 + w1)/2,
    // written as w1 = S[factor c0 + aux F^(wm)] and iterated to a fixed point.
    bool midpoint(std::vector<Complex> &w, double dt)
    {
        prepare(dt);
        auto buf = transform_.buffer();
        const std::size_t n = buf.size();
        const double scale = transform_.inverse_scale();
        std::copy(w.begin(), w.end(), w0_.begin());
        for (std::size_t i = 0; i < n; ++i) {
            buf[i] = w0_[i];
        }
        // Predictor: extrapolate the previous increment when it is adjacent.
        const bool extrapolate = have_previous_ && previous_end_ == w0_;
        if (extrapolate) {
            const double ratio = dt / previous_dt_;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = w0_[i] + ratio * (w0_[i] - previous_start_[i]);
            }
        }
        transform_.execute();
        std::vector<Complex> &lin = lin_;
        lin.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            lin[k] = factor_[k] * buf[k];
        }

        double previous = std::numeric_limits<double>::infinity();
        int growth = 0;
        for (iterations_ = 1; iterations_ <= kMaxIterations; ++iterations_) {
            for (std::size_t i = 0; i < n; ++i) {
                wm_[i] = 0.5 * (w0_[i] + w[i]);
                buf[i] = rate_[i] * power(std::norm(wm_[i])) * wm_[i];
            }
            transform_.execute();
            for (std::size_t k = 0; k < n; ++k) {
                buf[k] = lin[k] + aux_[k] * buf[k];
            }
            transform_.execute();
            double change = 0.0;
            double size = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const Complex next = scale * buf[i];
                change = std::max(change, std::abs(next - w[i]));
                size = std::max(size, std::abs(next));
                w[i] = next;
            }
            if (!std::isfinite(change)) {
                break;
            }
            if (change <= kIterationTolerance * size) {
                previous_start_ = w0_;
                previous_end_ = w;
                previous_dt_ = dt;
                have_previous_ = true;
                return true;
            }
            growth = change >= previous ? growth + 1 : 0;
            if (growth >= 3) {
                break;
            }
            previous = change;
        }
        std::copy(w0_.begin(), w0_.end(), w.begin());
        return false;
    }

    RadialGrid grid_;
    Scheme scheme_;
    SineTransform transform_;
    std::vector<double> rate_;
    std::vector<double> eigen_;
    std::vector<Complex> factor_;
    std::vector<Complex> aux_;
    std::vector<Complex> w0_;
    std::vector<Complex> wm_;
    std::vector<Complex> lin_;
    std::vector<Complex> previous_start_;
    std::vector<Complex> previous_end_;
    double previous_dt_ = 0.0;
    bool have_previous_ = false;
    double factor_dt_ = -1.0;
    double p_;
    int iterations_ = 0;
};

/// One step with a fresh stepper. Throws NumericFailure if the midpoint
/// iteration does not converge.
inline RadialState step(RadialState s, const Coefficient &g, double dt, Scheme scheme = Scheme::Strang)
{
    Stepper stepper(s.grid, g, scheme);
    if (!stepper.advance(s, dt)) {
        throw NumericFailure("midpoint iteration did not converge at t = " + std::to_string(s.t));
    }
    return s;
}

struct EvolveControls
{
    double dt0 = 1e-3;
    double t_end = 1.0;
    double blowup_grad_factor = 4.0;
    double dt_floor = 1e-9;
    double record_every = 0.05;
    /// Reference ||grad u||^2 for the blowup stop; 0 means the initial value.
    double reference_grad_norm_sq = 0.0;
    /// Time between checkpoints, taken at record times; 0 disables.
    double checkpoint_every = 0.0;
    Scheme scheme = Scheme::Midpoint;

    void validate() const
    {
        if (!(dt_floor > 0.0) || !(dt0 > dt_floor) || !std::isfinite(dt0)) {
            throw ValidationError("controls", "need dt0 > dt_floor > 0");
        }
        if (!(blowup_grad_factor > 1.0)) {
            throw ValidationError("controls", "blowup_grad_factor must exceed 1");
        }
        if (!(record_every > 0.0) || !std::isfinite(record_every)) {
            throw ValidationError("controls", "record_every must be positive");
        }
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
            throw ValidationError("controls", "t_end must be finite and >= 0");
        }
        if (!(checkpoint_every >= 0.0)) {
            throw ValidationError("controls", "checkpoint_every must be >= 0");
        }
    }

    bool operator==(const EvolveControls &) const = default;
};

enum class StopReason
{
    Completed,
    BlowupStop,
    ResolutionStop,
    NumericFailure,
};

inline std::string_view to_string(StopReason s)
{
    switch (s) {
    case StopReason::Completed: return "completed";
    case StopReason::BlowupStop: return "blowup_stop";
    case StopReason::ResolutionStop: return "resolution_stop";
    case StopReason::NumericFailure: return "numeric_failure";
    }
    return "unknown";
}

inline StopReason stop_reason_from_string(std::string_view s)
{
    if (s == "completed") return StopReason::Completed;
    if (s == "blowup_stop") return StopReason::BlowupStop;
    if (s == "resolution_stop") return StopReason::ResolutionStop;
    if (s == "numeric_failure") return StopReason::NumericFailure;
    throw ValidationError("verdict", "unknown stop reason '" + std::string(s) + "'");
}

struct EvolveResult
{
    RadialState final_state;
    std::vector<DiagnosticsRecord> series;
    StopReason stop_reason = StopReason::Completed;
    double stop_time = 0.0;
    bool truncation_flag = false;
    std::optional<double> truncation_time;
    std::size_t steps = 0;
    double min_dt = 0.0;
    std::string message;
};

using DiagnosticsSink = std::function<void(const DiagnosticsRecord &)>;
using CheckpointSink = std::function<void(const RadialState &, double reference_grad_norm_sq)>;

/// Fraction of the outermost nodes watched for boundary reflection.
inline constexpr double kBoundaryBand = 0.05;
inline constexpr double kBoundaryRatio = 1e-4;

/// True when |w| on the outer 5% of nodes exceeds 1e-4 of its peak.
inline bool boundary_contaminated(const RadialState &s)
{
    const std::size_t n = s.w.size();
    const std::size_t band = std::max<std::size_t>(1, std::size_t(std::ceil(kBoundaryBand * double(n))));
    double peak = 0.0;
    double edge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(s.w[i]);
        peak = std::max(peak, a);
        if (i >= n - band) {
            edge = std::max(edge, a);
        }
    }
    return peak > 0.0 && edge > kBoundaryRatio * peak;
}

/// Time loop. Steps with dt = min(dt0, dt0 / (1 + dt0 max_j g |u_j|^{p-1}))
/// and lands exactly on every multiple of record_every. Stops at t_end, when
/// ||grad u||^2 reaches blowup_grad_factor times the reference value, when
/// the step needed falls below dt_floor, or on non-finite values. A midpoint
/// step that fails to converge is retried at half the size.
///
/// Records and checkpoints sit on absolute multiples of their cadence, so a
/// run resumed from a checkpoint reproduces the remaining records exactly.
/// Pass emit_initial = false when resuming to skip the duplicate first row.
inline EvolveResult evolve(RadialState initial, const Coefficient &g, const EvolveControls &controls,
                           const VirialWeight &weight, const DiagnosticsSink &sink = {},
                           const CheckpointSink &checkpoint = {}, bool emit_initial = true)
{
    controls.validate();
    Stepper stepper(initial.grid, g, controls.scheme);
    EvolveResult out{std::move(initial), {}, StopReason::Completed, 0.0, false, {}, 0, controls.dt0, {}};
    RadialState &s = out.final_state;
    const double reference =
        controls.reference_grad_norm_sq > 0.0 ? controls.reference_grad_norm_sq : grad_norm_sq(s);
    const double tiny = 1e-12 * std::max(1.0, controls.t_end);

    auto emit = [&](double window) {
        auto rec = record(s, g, weight, window);
        out.series.push_back(rec);
        if (sink) {
            sink(rec);
        }
        if (!out.truncation_flag && boundary_contaminated(s)) {
            out.truncation_flag = true;
            out.truncation_time = s.t;
        }
    };
    auto next_multiple = [&](double every) {
        return (std::floor((s.t + tiny) / every) + 1.0) * every;
    };

    if (emit_initial) {
        emit(0.0);
    } else if (boundary_contaminated(s)) {
        out.truncation_flag = true;
        out.truncation_time = s.t;
    }
    if (!(controls.t_end > s.t + tiny)) {
        out.stop_time = s.t;
        return out;
    }

    double window = 0.0;
    double l10_prev = l10_integrand(s);
    double next_record = std::min(next_multiple(controls.record_every), controls.t_end);
    double next_checkpoint = controls.checkpoint_every > 0.0 ? next_multiple(controls.checkpoint_every)
                                                             : std::numeric_limits<double>::infinity();
    while (true) {
        const double rate = stepper.max_phase_rate(s);
        double limited = std::min(controls.dt0, controls.dt0 / (1.0 + controls.dt0 * rate));
        bool advanced = false;
        double dt = 0.0;
        bool lands = false;
        try {
            while (limited >= controls.dt_floor) {
                lands = next_record - s.t <= limited * (1.0 + 1e-8);
                dt = lands ? next_record - s.t : limited;
                if (stepper.advance(s, dt)) {
                    advanced = true;
                    break;
                }
                limited *= 0.5;
            }
        } catch (const NumericFailure &e) {
            out.stop_reason = StopReason::NumericFailure;
            out.message = e.what();
            break;
        }
        if (!advanced) {
            out.stop_reason = StopReason::ResolutionStop;
            out.message = "step " + format_double(limited) + " below dt_floor at t = " + format_double(s.t);
            emit(window);
            break;
        }
        ++out.steps;
        out.min_dt = std::min(out.min_dt, dt);
        if (lands) {
            s.t = next_record;
        }
        const double l10 = l10_integrand(s);
        window += 0.5 * dt * (l10 + l10_prev);
        l10_prev = l10;

        if (grad_norm_sq(s) >= controls.blowup_grad_factor * reference) {
            out.stop_reason = StopReason::BlowupStop;
            out.message = "grad norm reached " + format_double(controls.blowup_grad_factor) + "x reference";
            emit(window);
            break;
        }
        if (lands) {
            emit(window);
            window = 0.0;
            if (s.t >= controls.t_end - tiny) {
                break;
            }
            if (checkpoint && s.t >= next_checkpoint - tiny) {
                checkpoint(s, reference);
                next_checkpoint = next_multiple(controls.checkpoint_every);
            }
            next_record = std::min(next_multiple(controls.record_every), controls.t_end);
        }
    }
    out.stop_time = s.t;
    return out;
}

} // namespace inls
