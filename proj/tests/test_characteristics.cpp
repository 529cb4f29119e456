#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kvh/characteristics.hpp"

using namespace kvh;

namespace {
const auto kHo = make_harmonic(1, 1, 1);
const auto kHoField = make_field(kHo);
}  // namespace

TEST(Characteristics, QuarterPeriodRotation) {
  const auto tr = integrate(kHoField, 1, 0, 0, kPi / 2);
  EXPECT_NEAR(tr.back().x, 0.0, 1e-9);
  EXPECT_NEAR(tr.back().p, -1.0, 1e-9);
}

TEST(Characteristics, ActionOverFullPeriodVanishes) {
  const auto tr = integrate(kHoField, 1, 0, 0, 2 * kPi);
  EXPECT_NEAR(tr.back().action, 0.0, 1e-9);
}

TEST(Characteristics, ZeroDurationIsIdentity) {
  const auto tr = integrate(kHoField, 0.3, -0.2, 1.0, 1.0);
  ASSERT_EQ(tr.points.size(), 1u);
  EXPECT_EQ(tr.back().x, 0.3);
  EXPECT_EQ(tr.back().p, -0.2);
  EXPECT_EQ(tr.back().action, 0.0);
  EXPECT_EQ(tr.back().tangent.m00, 1.0);
  EXPECT_EQ(tr.back().tangent.m01, 0.0);
}

TEST(Characteristics, MaslovCounts) {
  EXPECT_EQ(maslov_count(integrate(kHoField, 1, 0, 0, 2 * kPi)), 2);
  EXPECT_EQ(maslov_count(integrate(kHoField, 1, 0, 0, kPi / 2)), 1);
  const auto tr = integrate(kHoField, 1, 0, 0, 2 * kPi);
  EXPECT_EQ(tr.caustic_times.size(), 2u);
  EXPECT_NEAR(tr.caustic_times[0], kPi / 2, 1e-8);
  EXPECT_NEAR(tr.caustic_times[1], 3 * kPi / 2, 1e-8);
}

TEST(Characteristics, SymplecticAndEnergyConserving) {
  const auto q = make_field(make_quartic(1, 1, 1));
  const auto tr = integrate(q, 1.2, 0.4, 0, 30);
  const double e0 = q.energy(0, 1.2, 0.4);
  for (const auto& pt : tr.points) {
    EXPECT_NEAR(pt.tangent.det(), 1.0, 1e-8);
    EXPECT_NEAR(q.energy(pt.t, pt.x, pt.p), e0, 1e-9);
  }
}

TEST(Characteristics, TangentMatchesFiniteDifference) {
  const auto q = make_field(make_quartic(1, 1, 1));
  const double e = 1e-6, t1 = 3.7;
  const auto base = integrate(q, 0.5, 0.3, 0, t1).back();
  const auto dx = integrate(q, 0.5 + e, 0.3, 0, t1).back();
  const auto dp = integrate(q, 0.5, 0.3 + e, 0, t1).back();
  const auto xm = integrate(q, 0.5 - e, 0.3, 0, t1).back();
  const auto pm = integrate(q, 0.5, 0.3 - e, 0, t1).back();
  EXPECT_NEAR(base.tangent.m00, (dx.x - xm.x) / (2 * e), 1e-5);
  EXPECT_NEAR(base.tangent.m10, (dx.p - xm.p) / (2 * e), 1e-5);
  EXPECT_NEAR(base.tangent.m01, (dp.x - pm.x) / (2 * e), 1e-5);
  EXPECT_NEAR(base.tangent.m11, (dp.p - pm.p) / (2 * e), 1e-5);
}

TEST(Characteristics, BackwardIntegrationInvertsForward) {
  const auto q = make_field(make_quartic(1, 1, 1));
  const auto fw = integrate(q, 0.7, -0.1, 0, 2.5).back();
  const auto bw = integrate(q, fw.x, fw.p, 2.5, 0).back();
  EXPECT_NEAR(bw.x, 0.7, 1e-9);
  EXPECT_NEAR(bw.p, -0.1, 1e-9);
  EXPECT_NEAR(bw.action, -fw.action, 1e-9);
}

TEST(Characteristics, SplittingAgreesWithAdaptive) {
  const auto well = make_quartic(1, 1, 1);
  const auto a = integrate(make_field(well), 1.0, 0.2, 0, 5).back();
  const auto b = integrate_split(well, 1.0, 0.2, 0, 5, 4000).back();
  EXPECT_NEAR(a.x, b.x, 1e-8);
  EXPECT_NEAR(a.p, b.p, 1e-8);
  EXPECT_NEAR(a.action, b.action, 1e-8);
  EXPECT_NEAR(a.tangent.m00, b.tangent.m00, 1e-7);
  EXPECT_NEAR(a.tangent.m11, b.tangent.m11, 1e-7);
}

TEST(Characteristics, VanVleckFlagsCaustic) {
  const auto tr = integrate(kHoField, 1, 0, 0, 2 * kPi);
  const auto vv = van_vleck_factor(tr);
  EXPECT_EQ(vv.sign_changes, 2);
  EXPECT_EQ(vv.factor.size(), tr.points.size());
}

TEST(Characteristics, CsvHasHeaderAndRows) {
  const auto tr = integrate(kHoField, 1, 0, 0, 0.1);
  std::ostringstream os;
  write_csv(os, tr);
  const auto s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,x,p,S,M00,M01,M10,M11");
  EXPECT_NE(s.find("1.0000000000000000e+00"), std::string::npos);
}
