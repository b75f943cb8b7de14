#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "inls/diagnostics.hpp"
#include "inls/evolution.hpp"
#include "inls/ground_state.hpp"
#include "inls/quadrature.hpp"
#include "inls/sine_transform.hpp"

using namespace inls;

namespace
{

RadialState gaussian(double A, double r_max, std::size_t n, double sigma = 1.0)
{
    const auto params = ProblemParams::make(1.0);
    return prepare_initial(GaussianProfile{A, sigma}, RadialGrid::make(r_max, n), params).state;
}

} // namespace

TEST(SineTransform, MatchesDirectSum)
{
    for (std::size_t n : {1u, 7u, 31u, 100u}) {
        SineTransform dst(n);
        std::mt19937 rng(42);
        std::normal_distribution<double> nd;
        std::vector<Complex> x(n);
        for (auto &z : x) {
            z = {nd(rng), nd(rng)};
        }
        auto buf = dst.buffer();
        std::copy(x.begin(), x.end(), buf.begin());
        dst.execute();
        for (std::size_t k = 1; k <= n; ++k) {
            Complex ref{};
            for (std::size_t j = 1; j <= n; ++j) {
                ref += 2.0 * x[j - 1] * std::sin(std::numbers::pi * double(j * k) / double(n + 1));
            }
            ASSERT_NEAR(std::abs(buf[k - 1] - ref), 0.0, 1e-10 * double(n)) << n << " " << k;
        }
        dst.execute();
        for (std::size_t j = 0; j < n; ++j) {
            ASSERT_NEAR(std::abs(buf[j] * dst.inverse_scale() - x[j]), 0.0, 1e-12);
        }
    }
    EXPECT_THROW(SineTransform(0), ParameterDomainError);
}

TEST(Initial, GaussianGradientOracle)
{
    const double A = 0.5;
    const auto s = gaussian(A, 40.0, 4096);
    const double oracle = 16 * std::numbers::pi * A * A * 3.0 / 8.0 * std::sqrt(std::numbers::pi) * std::pow(2.0, -2.5);
    EXPECT_NEAR(oracle, 1.47653, 1e-5);
    EXPECT_NEAR(grad_norm_sq(s), oracle, 1e-4 * oracle);
}

TEST(Initial, ZeroAmplitudeGivesZeroState)
{
    const auto s = gaussian(0.0, 40.0, 255);
    for (const auto &z : s.w) {
        EXPECT_EQ(z, Complex{});
    }
}

TEST(Initial, TaperedGroundStateMatchesContinuumIntegral)
{
    const auto params = ProblemParams::make(1.0);
    const auto grid = RadialGrid::make(1200.0, 65535);
    const GroundStateProfile prof{1.0, 1.0, 0.0, 0.0};
    const auto s = prepare_initial(prof, grid, params).state;
    const auto [start, end] = taper_radii(prof, grid);
    EXPECT_DOUBLE_EQ(end, 600.0);
    EXPECT_DOUBLE_EQ(start, 75.0);
    // d/dr (r Q T) with the analytic derivatives of Q_1 and the cubic taper.
    auto dw = [&](double r) {
        const double Q = 1.0 / (1.0 + r / 2.0);
        const double dQ = -0.5 * Q * Q;
        const double x = std::clamp((r - start) / (end - start), 0.0, 1.0);
        const double T = 1.0 - x * x * (3.0 - 2.0 * x);
        const double dT = r > start && r < end ? -6.0 * x * (1.0 - x) / (end - start) : 0.0;
        return Q * T + r * (dQ * T + Q * dT);
    };
    const quad::Tolerance tol{1e-12, 1e-300, 20000};
    auto f = [&](double r) { return dw(r) * dw(r); };
    const double K = 4 * std::numbers::pi *
                     (quad::integrate(f, 0.0, start, tol).value + quad::integrate(f, start, end, tol).value);
    EXPECT_NEAR(grad_norm_sq(s), K, 1e-4 * K);
    // The taper only perturbs the closed-form value by a few percent.
    EXPECT_NEAR(K, 8 * std::numbers::pi / 3, 0.05 * 8.4);
}

TEST(Initial, TailMassRejected)
{
    const auto params = ProblemParams::make(1.0);
    EXPECT_THROW(prepare_initial(GaussianProfile{1.0, 30.0}, RadialGrid::make(40.0, 255), params),
                 TruncationWarning);
}

TEST(Step, ZeroStateStaysZero)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    for (auto scheme : {Scheme::Strang, Scheme::Midpoint}) {
        auto s = step(RadialState::zero(RadialGrid::make(10.0, 63)), g, 0.1, scheme);
        for (const auto &z : s.w) {
            EXPECT_EQ(z, Complex{});
        }
        EXPECT_DOUBLE_EQ(s.t, 0.1);
    }
}

TEST(Step, LinearFlowConservesMass)
{
    const auto g = Coefficient::zero(ProblemParams::make(1.0));
    for (auto scheme : {Scheme::Strang, Scheme::Midpoint}) {
        auto s = gaussian(0.5, 40.0, 1023);
        const double m0 = mass(s);
        Stepper stepper(s.grid, g, scheme);
        for (int k = 0; k < 100; ++k) {
            ASSERT_TRUE(stepper.advance(s, 0.01));
        }
        EXPECT_NEAR(s.t, 1.0, 1e-12);
        EXPECT_LE(std::abs(mass(s) - m0) / m0, 1e-13);
    }
}

TEST(Step, SchemesAgreeOnSmoothShortRun)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    auto a = gaussian(0.5, 20.0, 511);
    auto b = a;
    Stepper sa(a.grid, g, Scheme::Strang);
    Stepper sb(b.grid, g, Scheme::Midpoint);
    for (int k = 0; k < 100; ++k) {
        ASSERT_TRUE(sa.advance(a, 1e-3));
        ASSERT_TRUE(sb.advance(b, 1e-3));
    }
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < a.w.size(); ++i) {
        diff = std::max(diff, std::abs(a.w[i] - b.w[i]));
        norm = std::max(norm, std::abs(a.w[i]));
    }
    EXPECT_LE(diff / norm, 1e-3);
}

TEST(Step, RejectsBadStep)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    auto s = gaussian(0.5, 20.0, 63);
    Stepper st(s.grid, g);
    EXPECT_THROW(st.advance(s, 0.0), ParameterDomainError);
    EXPECT_THROW(st.advance(s, -1.0), ParameterDomainError);
}

TEST(Evolve, MidpointConservesMassAndEnergy)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EvolveControls c;
    c.dt0 = 2e-3;
    c.t_end = 0.5;
    c.record_every = 0.05;
    const auto res = evolve(gaussian(0.5, 40.0, 1023), g, c, VirialWeight::unbounded());
    EXPECT_EQ(res.stop_reason, StopReason::Completed);
    ASSERT_EQ(res.series.size(), 11u);
    const auto &r0 = res.series.front();
    for (const auto &r : res.series) {
        EXPECT_LE(std::abs(r.mass - r0.mass) / r0.mass, 1e-10);
        EXPECT_LE(std::abs(r.energy - r0.energy) / r0.energy, 1e-5);
    }
    EXPECT_NEAR(res.series.back().t, 0.5, 1e-12);
    EXPECT_NEAR(res.series[3].t, 0.15, 1e-12);
}

TEST(Evolve, TEndZeroReturnsInitialOnly)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EvolveControls c;
    c.t_end = 0.0;
    const auto res = evolve(gaussian(0.5, 20.0, 255), g, c, VirialWeight::quadratic_cutoff(5.0));
    ASSERT_EQ(res.series.size(), 1u);
    EXPECT_EQ(res.series[0].t, 0.0);
    EXPECT_EQ(res.steps, 0u);
    EXPECT_EQ(res.stop_reason, StopReason::Completed);
}

TEST(Evolve, SmallGaussianStaysBounded)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EvolveControls c;
    c.dt0 = 1e-2;
    c.t_end = 20.0;
    c.record_every = 0.5;
    const auto s = gaussian(0.5, 200.0, 2047);
    const double k0 = grad_norm_sq(s);
    const auto res = evolve(s, g, c, VirialWeight::quadratic_cutoff(10.0));
    EXPECT_EQ(res.stop_reason, StopReason::Completed);
    EXPECT_NEAR(res.stop_time, 20.0, 1e-12);
    for (const auto &r : res.series) {
        EXPECT_LE(r.grad_norm_sq, 2.0 * k0);
    }
}

TEST(Evolve, BlowupStopsNearThresholdData)
{
    const auto params = ProblemParams::make(1.0);
    const auto g = Coefficient::pure_power(params);
    const auto s = prepare_initial(GroundStateProfile{1.3, 1.0, 0.0, 0.0}, RadialGrid::make(100.0, 4095), params).state;
    EvolveControls c;
    c.dt0 = 1e-3;
    c.t_end = 3.0;
    c.record_every = 0.05;
    const auto res = evolve(s, g, c, VirialWeight::quadratic_cutoff(10.0));
    EXPECT_EQ(res.stop_reason, StopReason::BlowupStop);
    EXPECT_LT(res.stop_time, 3.0);
    EXPECT_GE(res.series.back().grad_norm_sq, 4.0 * res.series.front().grad_norm_sq);
}

TEST(Evolve, ResolutionStopWhenFloorTooHigh)
{
    const auto params = ProblemParams::make(1.0);
    const auto g = Coefficient::pure_power(params);
    const auto s = prepare_initial(GroundStateProfile{1.3, 1.0, 0.0, 0.0}, RadialGrid::make(100.0, 4095), params).state;
    EvolveControls c;
    c.dt0 = 1e-3;
    c.dt_floor = 9e-4;
    c.t_end = 3.0;
    c.blowup_grad_factor = 1e6;
    const auto res = evolve(s, g, c, VirialWeight::quadratic_cutoff(10.0));
    EXPECT_EQ(res.stop_reason, StopReason::ResolutionStop);
    EXPECT_FALSE(res.message.empty());
}

TEST(Evolve, ControlsValidated)
{
    EvolveControls c;
    c.dt0 = -1.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = {};
    c.blowup_grad_factor = 1.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = {};
    c.record_every = 0.0;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Evolve, TruncationFlaggedWhenWaveReachesBoundary)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EvolveControls c;
    c.dt0 = 1e-2;
    c.t_end = 10.0;
    c.record_every = 0.5;
    const auto res = evolve(gaussian(0.5, 10.0, 511), g, c, VirialWeight::quadratic_cutoff(2.0));
    EXPECT_TRUE(res.truncation_flag);
}

TEST(Evolve, SinkSeesEveryRecord)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EvolveControls c;
    c.t_end = 0.2;
    c.record_every = 0.05;
    std::vector<DiagnosticsRecord> seen;
    const auto res = evolve(gaussian(0.5, 20.0, 255), g, c, VirialWeight::quadratic_cutoff(5.0),
                            [&](const DiagnosticsRecord &r) { seen.push_back(r); });
    EXPECT_EQ(seen, res.series);
}

TEST(Names, RoundTrip)
{
    for (auto s : {StopReason::Completed, StopReason::BlowupStop, StopReason::ResolutionStop, StopReason::NumericFailure}) {
        EXPECT_EQ(stop_reason_from_string(to_string(s)), s);
    }
    for (auto s : {Scheme::Midpoint, Scheme::Strang}) {
        EXPECT_EQ(scheme_from_string(to_string(s)), s);
    }
}
