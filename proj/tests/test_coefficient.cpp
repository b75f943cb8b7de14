#include <cmath>

#include <gtest/gtest.h>

#include "inls/coefficient.hpp"

using namespace inls;

TEST(Params, ExponentsAndDomain)
{
    const auto p = ProblemParams::make(1.0);
    EXPECT_EQ(p.p(), 3.0);
    EXPECT_EQ(p.p0(), 1.0);
    EXPECT_THROW(ProblemParams::make(0.0), ParameterDomainError);
    EXPECT_THROW(ProblemParams::make(4.0 / 3.0), ParameterDomainError);
    EXPECT_THROW(ProblemParams::make(-0.1), ParameterDomainError);
    EXPECT_THROW(ProblemParams::make(NAN), ParameterDomainError);
}

TEST(Coefficient, PurePowerBounds)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EXPECT_DOUBLE_EQ(g(2.0), 0.5);
    EXPECT_DOUBLE_EQ(g.deriv(2.0), -0.25);
    EXPECT_EQ(g.gi(), 1.0);
    EXPECT_EQ(g.gs(), 1.0);
}

TEST(Coefficient, RationalExample)
{
    const auto g = Coefficient::rational(1.0, 0.0, 1.0, ProblemParams::make(0.5));
    EXPECT_NEAR(g(4.0), 2.0 / 5.0, 1e-15);
    EXPECT_EQ(g.gi(), 0.0);
    EXPECT_EQ(g.gs(), 1.0);
    // Analytic derivative against a central difference.
    const double h = 1e-6;
    EXPECT_NEAR(g.deriv(3.0), (g(3.0 + h) - g(3.0 - h)) / (2 * h), 1e-8);
}

TEST(Coefficient, PlateauExample)
{
    const auto g = Coefficient::plateau(1.0, ProblemParams::make(1.0));
    EXPECT_DOUBLE_EQ(g.gi(), 1.0);
    EXPECT_DOUBLE_EQ(g.gs(), 1.0);
}

TEST(Coefficient, InvalidFamilyParameters)
{
    const auto p = ProblemParams::make(1.0);
    EXPECT_THROW(Coefficient::rational(0.0, 0.0, 1.0, p), ParameterDomainError);
    EXPECT_THROW(Coefficient::rational(1.0, 2.0, 1.0, p), ParameterDomainError);
    EXPECT_THROW(Coefficient::rational(1.0, 0.0, 0.0, p), ParameterDomainError);
    EXPECT_THROW(Coefficient::plateau(2.0, p), ParameterDomainError);
    EXPECT_THROW(Coefficient::plateau(-0.1, p), ParameterDomainError);
}

TEST(Coefficient, TabulatedRejectsExtrapolation)
{
    const auto p = ProblemParams::make(1.0);
    std::vector<double> r, g;
    for (int k = 1; k <= 20; ++k) {
        r.push_back(0.5 * k);
        g.push_back(1.0 / (0.5 * k));
    }
    const auto c = Coefficient::tabulated(r, g, p);
    EXPECT_NEAR(c(3.0), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(c.gi(), 1.0, 1e-12);
    EXPECT_NEAR(c.gs(), 1.0, 1e-12);
    EXPECT_THROW(c(20.0), Error);
    EXPECT_THROW(Coefficient::tabulated({1, 2, 3}, {1, 1, 1}, p), ParameterDomainError);
    EXPECT_THROW(Coefficient::tabulated({1, 3, 2, 4}, {1, 1, 1, 1}, p), ParameterDomainError);
}

TEST(Conditions, PurePowerB1)
{
    const auto rep = check_conditions(Coefficient::pure_power(ProblemParams::make(1.0)), 0.0);
    EXPECT_DOUBLE_EQ(rep.g0, 1.0);
    ASSERT_TRUE(rep.kg);
    EXPECT_DOUBLE_EQ(*rep.kg, 0.0);
    EXPECT_TRUE(rep.scaling_ok);
    EXPECT_TRUE(rep.variational_ok);
    EXPECT_TRUE(rep.rigidity_ok);
    ASSERT_TRUE(rep.virial_ok);
    EXPECT_TRUE(*rep.virial_ok);
    ASSERT_TRUE(rep.rho_max);
    EXPECT_NEAR(*rep.rho_max, 0.25, 1e-12);
    EXPECT_EQ(rep.margins.rigidity, 0.0);
}

TEST(Conditions, PurePowerAnyBRigidityEquality)
{
    for (double b : {0.2, 0.5, 0.9, 1.3}) {
        const auto params = ProblemParams::make(b);
        const auto rep = check_conditions(Coefficient::pure_power(params), 0.0);
        EXPECT_NEAR(rep.margins.rigidity, 0.0, 1e-12) << b;
        ASSERT_TRUE(rep.rho_max);
        EXPECT_NEAR(*rep.rho_max, b / (params.p() + 1.0), 1e-10) << b;
    }
}

TEST(Conditions, RationalFailsVariational)
{
    const auto rep = check_conditions(Coefficient::rational(1.0, 0.0, 1.0, ProblemParams::make(0.5)), 0.0);
    EXPECT_DOUBLE_EQ(rep.g0, 2.5);
    EXPECT_FALSE(rep.variational_ok);
    EXPECT_FALSE(rep.kg);
    EXPECT_FALSE(rep.virial_ok);
    EXPECT_TRUE(rep.rigidity_ok);
}

TEST(Conditions, BoundsHoldOnGrid)
{
    const auto params = ProblemParams::make(0.7);
    for (const auto &g : {Coefficient::rational(2.0, 0.5, 1.5, params), Coefficient::plateau(0.8, params)}) {
        for (double r : log_grid(1e-6, 1e6, 20001)) {
            const double h = g.scaled(r);
            EXPECT_GE(h, g.gi() - 1e-12);
            EXPECT_LE(h, g.gs() + 1e-12);
        }
    }
}

TEST(Conditions, RigidityImpliesMonotone)
{
    const auto params = ProblemParams::make(0.7);
    const auto g = Coefficient::rational(2.0, 0.5, 1.5, params);
    const auto rep = check_conditions(g, 0.0);
    ASSERT_TRUE(rep.rigidity_ok);
    double prev = -1.0;
    for (double r : log_grid(1e-6, 1e6, 20001)) {
        EXPECT_GE(g.scaled(r), prev - 1e-12);
        prev = g.scaled(r);
    }
}

TEST(Conditions, DeterministicAndGridInvariantForPurePower)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(0.6));
    const auto a = check_conditions(g, 0.1);
    EXPECT_EQ(a, check_conditions(g, 0.1));
    const auto fine = check_conditions(g, 0.1, 40001);
    EXPECT_EQ(a.g0, fine.g0);
    EXPECT_EQ(a.kg, fine.kg);
    EXPECT_EQ(a.margins.rigidity, fine.margins.rigidity);
    EXPECT_NEAR(*a.rho_max, *fine.rho_max, 1e-14);
}

TEST(Conditions, RejectsBadInputs)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EXPECT_THROW(check_conditions(g, -1.0), ParameterDomainError);
    EXPECT_THROW(check_conditions(g, 0.0, 100), ParameterDomainError);
}

TEST(Coefficient, RescaledPurePowerIsInvariant)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    const auto h = g.rescaled(2.0);
    // lambda^b g(lambda r) = g(r) for pure power; the object evaluates r^{-b} h(lambda r).
    EXPECT_DOUBLE_EQ(h(3.0), g(3.0));
}
