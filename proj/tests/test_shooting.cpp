#include <cmath>

#include <gtest/gtest.h>

#include "inls/ground_state.hpp"
#include "inls/shooting.hpp"

using namespace inls;

TEST(Shooting, PurePowerMatchesClosedForm)
{
    const auto params = ProblemParams::make(1.0);
    const GroundState gs(params);
    const auto shot = shoot(Coefficient::pure_power(params), 1.0, 1e4);
    EXPECT_FALSE(shot.first_zero);
    for (const auto &pt : shot.trajectory) {
        ASSERT_LE(std::abs(pt.Q - gs.Q(pt.r)) / gs.Q(pt.r), 1e-6) << pt.r;
    }
}

TEST(Shooting, RationalHasFiniteZero)
{
    const auto g = Coefficient::rational(1.0, 0.0, 1.0, ProblemParams::make(0.5));
    for (double q0 : {0.5, 1.0, 2.0, 5.0}) {
        const auto shot = shoot(g, q0, 1e4);
        ASSERT_TRUE(shot.first_zero) << q0;
        EXPECT_LT(*shot.first_zero, 1e4);
        EXPECT_NEAR(shot.trajectory.back().Q, 0.0, 1e-12);
        for (const auto &pt : shot.trajectory) {
            if (pt.Q > 0.0) {
                ASSERT_LE(pt.dQ, 0.0) << q0 << " " << pt.r;
            }
        }
    }
}

TEST(Shooting, PohozaevPurePowerVanishes)
{
    const auto params = ProblemParams::make(1.0);
    const auto g = Coefficient::pure_power(params);
    const auto shot = shoot(g, 1.0, 100.0);
    for (double r : {0.1, 1.0, 10.0, 50.0}) {
        const auto chk = pohozaev_check(g, shot, r);
        EXPECT_NEAR(chk.v_integral, 0.0, 1e-8) << r;
        EXPECT_NEAR(chk.v_boundary, 0.0, 1e-8) << r;
    }
    const auto at_start = pohozaev_check(g, shot, shot.trajectory.front().r);
    EXPECT_NEAR(at_start.v_integral, 0.0, 1e-12);
    EXPECT_NEAR(at_start.v_boundary, 0.0, 1e-12);
}

TEST(Shooting, PohozaevRationalBalances)
{
    const auto g = Coefficient::rational(1.0, 0.0, 1.0, ProblemParams::make(0.5));
    const auto shot = shoot(g, 1.0, 1e4);
    const auto chk = pohozaev_check(g, shot, 2.0);
    EXPECT_LE(chk.residual, 1e-6 * std::max(1.0, std::abs(chk.v_integral)));
    EXPECT_GT(chk.v_integral, 0.0);
}

TEST(Shooting, RejectsBadInput)
{
    const auto g = Coefficient::pure_power(ProblemParams::make(1.0));
    EXPECT_THROW(shoot(g, 0.0, 10.0), ParameterDomainError);
    EXPECT_THROW(shoot(g, 1.0, 1e-7), ParameterDomainError);
    const auto shot = shoot(g, 1.0, 10.0);
    EXPECT_THROW(pohozaev_check(g, shot, 20.0), ParameterDomainError);
}
