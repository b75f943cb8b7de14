#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "inls/diagnostics.hpp"
#include "inls/evolution.hpp"

using namespace inls;

namespace
{

const ProblemParams kB1 = ProblemParams::make(1.0);

RadialState gaussian(double A, double r_max = 40.0, std::size_t n = 4096)
{
    return prepare_initial(GaussianProfile{A, 1.0}, RadialGrid::make(r_max, n), kB1).state;
}

} // namespace

TEST(Diagnostics, ZeroStateRecordIsZero)
{
    const auto g = Coefficient::pure_power(kB1);
    const auto rec = record(RadialState::zero(RadialGrid::make(10.0, 127)), g, VirialWeight::quadratic_cutoff(2.0));
    EXPECT_EQ(rec, DiagnosticsRecord{});
    EXPECT_EQ(z_prime(RadialState::zero(RadialGrid::make(10.0, 127)), VirialWeight::unbounded()), 0.0);
    EXPECT_EQ(lvirial_rhs(RadialState::zero(RadialGrid::make(10.0, 127)), g, VirialWeight::unbounded()), 0.0);
}

TEST(Diagnostics, GaussianPotentialOracle)
{
    const double A = 0.5;
    const auto s = gaussian(A);
    const double oracle = std::numbers::pi * std::pow(A, 4) / 2.0;
    // r |phi|^4 has a nonzero slope at the origin, so the node sum converges at second order.
    const double coarse = std::abs(potential(s, Coefficient::pure_power(kB1)) - oracle);
    const double fine = std::abs(potential(gaussian(A, 40.0, 8191), Coefficient::pure_power(kB1)) - oracle);
    EXPECT_LE(coarse, 1e-4 * oracle);
    EXPECT_NEAR(coarse / fine, 4.0, 0.1);
    const double m = 4 * std::numbers::pi * A * A * std::sqrt(std::numbers::pi) / (8.0 * std::sqrt(2.0));
    EXPECT_NEAR(mass(s), m, 1e-10 * m);
}

TEST(Diagnostics, EnergyIsKineticMinusPotential)
{
    const auto g = Coefficient::pure_power(kB1);
    const auto s = gaussian(0.8);
    const auto rec = record(s, g, VirialWeight::unbounded());
    EXPECT_DOUBLE_EQ(rec.energy, rec.grad_norm_sq / 2.0 - rec.potential / 4.0);
    EXPECT_DOUBLE_EQ(rec.energy, energy(s, g));
    EXPECT_NEAR(rec.z_r, rec.virial_V, 1e-12 * rec.virial_V);
    EXPECT_GT(rec.strauss_ratio, 0.0);
}

TEST(Diagnostics, RealStateHasZeroZPrime)
{
    EXPECT_EQ(z_prime(gaussian(0.5), VirialWeight::unbounded()), 0.0);
    EXPECT_EQ(z_prime(gaussian(0.5), VirialWeight::quadratic_cutoff(3.0)), 0.0);
}

TEST(Diagnostics, VirialDerivativesMatchFiniteDifferences)
{
    const auto g = Coefficient::pure_power(kB1);
    EvolveControls c;
    c.dt0 = 1e-3;
    c.t_end = 0.4;
    c.record_every = 0.01;
    const auto res = evolve(gaussian(0.5, 40.0, 2047), g, c, VirialWeight::unbounded());
    const auto &s = res.series;
    std::size_t good1 = 0, good2 = 0, total = 0;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        const double h = s[k + 1].t - s[k].t;
        const double d1 = (s[k + 1].virial_V - s[k - 1].virial_V) / (2 * h);
        const double d2 = (s[k + 1].virial_V - 2 * s[k].virial_V + s[k - 1].virial_V) / (h * h);
        ++total;
        good1 += std::abs(d1 - s[k].z_r_prime) <= 1e-3 * std::abs(s[k].z_r_prime);
        good2 += std::abs(d2 - s[k].lvirial_rhs) <= 1e-3 * std::abs(s[k].lvirial_rhs);
    }
    EXPECT_GE(double(good1), 0.95 * double(total));
    EXPECT_GE(double(good2), 0.95 * double(total));
}

TEST(Diagnostics, LocalizedVirialBoundedByBlowupChain)
{
    // Snapshot in the blowup region. With b = 1 and a weight equal to |x|^2 on
    // the whole grid the identity reduces to 8 (grad - potential), which sits
    // below the chain bound 4 (grad - (1 - k_g) potential) with k_g = 0.
    const auto g = Coefficient::pure_power(kB1);
    const auto s = prepare_initial(GroundStateProfile{1.1, 1.0, 0.0, 0.0}, RadialGrid::make(200.0, 8191), kB1).state;
    for (const auto &w : {VirialWeight::unbounded(), VirialWeight::quadratic_cutoff(1000.0)}) {
        const auto rec = record(s, g, w);
        const double chain = 4.0 * (rec.grad_norm_sq - rec.potential);
        EXPECT_LT(chain, 0.0);
        EXPECT_NEAR(rec.lvirial_rhs, 2.0 * chain, 1e-9 * std::abs(chain));
        EXPECT_LE(rec.lvirial_rhs, chain);
    }
}

TEST(Csv, HeaderAndRoundTrip)
{
    std::ostringstream os;
    write_csv_header(os);
    EXPECT_EQ(os.str(), "t,mass,energy,grad_norm_sq,potential,lp1_norm,virial_V,z_r,z_r_prime,lvirial_rhs,"
                        "strauss_ratio,s_increment\n");
    DiagnosticsRecord r{0.1, 1.0 / 3.0, -2e-300, 7.0, std::numbers::pi, 1e300, 5.0, 6.0, -7.5, 8.25, 0.125, 1e-17};
    write_csv_row(os, r);
    std::istringstream is(os.str());
    const auto back = read_csv(is);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], r);
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Csv, RejectsBadInput)
{
    std::istringstream bad_header("t,mass\n1,2\n");
    EXPECT_THROW(read_csv(bad_header), ValidationError);
    std::ostringstream os;
    write_csv_header(os);
    os << "1,2,3\n";
    std::istringstream few(os.str());
    EXPECT_THROW(read_csv(few), ValidationError);
    std::istringstream empty("");
    EXPECT_THROW(read_csv(empty), ValidationError);
}
