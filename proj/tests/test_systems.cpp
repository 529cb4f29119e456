#include <gtest/gtest.h>

#include <cmath>

#include "kvh/systems.hpp"

using namespace kvh;

TEST(Systems, HarmonicTurningPoints) {
  const auto well = make_harmonic(1, 1, 1);
  const auto tp = turning_points(well, 0.5);
  EXPECT_NEAR(tp.minus, -1.0, 1e-12);
  EXPECT_NEAR(tp.plus, 1.0, 1e-12);
}

TEST(Systems, QuarticTurningPoints) {
  const auto well = make_quartic(1, 1, 1);
  const auto tp = turning_points(well, 1.0);
  EXPECT_NEAR(tp.minus, -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(tp.plus, std::sqrt(2.0), 1e-12);
}

TEST(Systems, EnergyBelowWellThrows) {
  const auto well = make_harmonic(1, 1, 1);
  try {
    turning_points(well, -0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EnergyBelowWell);
  }
}

TEST(Systems, EnergyAboveWellThrows) {
  const auto well = make_harmonic(1, 1, 1);
  try {
    turning_points(well, 1e9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EnergyAboveWell);
  }
}

TEST(Systems, MomentumBranchesAreOpposite) {
  const auto well = make_harmonic(1, 1, 1);
  const auto b = momentum_branches(well, 0.5, 0.0);
  EXPECT_NEAR(b.plus.real(), 1.0, 1e-14);
  EXPECT_NEAR(b.minus.real(), -1.0, 1e-14);
  const auto f = momentum_branches(well, 0.5, 2.0);
  EXPECT_NEAR(f.plus.imag(), std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(f.plus.real(), 0.0, 1e-14);
}

TEST(Systems, PartialsMatchFiniteDifferences) {
  for (const auto& well : {make_harmonic(1.3, 0.7, 1), make_quartic(0.8, 2.0, 1)}) {
    const auto f = make_field(well);
    for (double x = -1.5; x <= 1.5; x += 0.25) {
      for (double p = -2.0; p <= 2.0; p += 0.5) {
        const double e = 1e-6;
        const double fx = (f.energy(0, x + e, p) - f.energy(0, x - e, p)) / (2 * e);
        const double fp = (f.energy(0, x, p + e) - f.energy(0, x, p - e)) / (2 * e);
        EXPECT_NEAR(f.dh_dx(0, x, p).real(), fx, 1e-6 * std::max(1.0, std::abs(fx)));
        EXPECT_NEAR(f.dh_dp(0, x, p).real(), fp, 1e-6 * std::max(1.0, std::abs(fp)));
      }
    }
  }
}

TEST(Systems, UnknownSystemRejected) {
  try {
    make_well("double_well", {}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Systems, CharacteristicLengthOfHarmonic) {
  const auto well = make_harmonic(2.0, 3.0, 0.5);
  EXPECT_NEAR(characteristic_length(well.mass(), well.hbar(),
                                    [&](double x) { return well.potential(x) - well.u_min(); }),
              std::sqrt(0.5 / 6.0), 1e-10);
}
