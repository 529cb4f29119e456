#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kvh/grid.hpp"

using namespace kvh;

TEST(Grid, AxisUniformity) {
  const Axis a(-1, 1, 5);
  EXPECT_DOUBLE_EQ(a.step(), 0.5);
  EXPECT_DOUBLE_EQ(a[4], 1.0);
  EXPECT_NO_THROW(axis_from_points({0.0, 0.1, 0.2, 0.3}));
  EXPECT_THROW(axis_from_points({0.0, 0.1, 0.25, 0.3}), Error);
  EXPECT_THROW(Axis(1, 0, 5), Error);
  EXPECT_THROW(Axis(0, 1, 1), Error);
}

TEST(Grid, RejectsNonFiniteValues) {
  ConfigGrid g(Axis(0, 1, 4), 0, 1);
  g.values[2] = {std::nan(""), 0};
  EXPECT_THROW(g.validate(), Error);
}

TEST(Grid, CubicInterpolationReproducesNodesAndQuadratics) {
  PhaseSpaceGrid g(Axis(-2, 2, 41), Axis(-1, 1, 21), 0, 1);
  auto f = [](double x, double p) { return cplx(x * x - 0.5 * p, x * p); };
  for (std::size_t i = 0; i < 41; ++i)
    for (std::size_t j = 0; j < 21; ++j) g.at(i, j) = f(g.x_axis[i], g.p_axis[j]);
  EXPECT_NEAR(std::abs(g.sample(g.x_axis[7], g.p_axis[3]) - g.at(7, 3)), 0.0, 1e-13);
  // Keys cubic convolution reproduces quadratics away from the edges
  EXPECT_NEAR(std::abs(g.sample(0.333, 0.271) - f(0.333, 0.271)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(g.sample(0.333, 0.271, Interpolation::Linear) - f(0.333, 0.271)), 0.0, 1e-2);
  EXPECT_EQ(g.sample(5.0, 0.0), cplx(0.0));  // zero padding
}

TEST(Grid, BinaryRoundTripPhase) {
  PhaseSpaceGrid g(Axis(-1, 1, 3), Axis(-2, 2, 4), 0.75, 0.5);
  for (std::size_t k = 0; k < g.values.size(); ++k) g.values[k] = {k * 0.1, -1.0 / (k + 1)};
  std::stringstream ss;
  write_binary(ss, g);
  const auto r = read_phase_binary(ss);
  EXPECT_EQ(r.values, g.values);
  EXPECT_EQ(r.t, 0.75);
  EXPECT_EQ(r.hbar, 0.5);
  EXPECT_TRUE(r.same_axes(g));
}

TEST(Grid, BinaryLayoutIsLittleEndian) {
  ConfigGrid g(Axis(0, 1, 2), 0, 1);
  g.values = {{1.0, 0.0}, {0.0, 2.0}};
  std::stringstream ss;
  write_binary(ss, g);
  const std::string s = ss.str();
  // magic + version + rank + reserved + axis(24) + t + hbar + 2 complex(32)
  ASSERT_EQ(s.size(), 16u + 24u + 16u + 32u);
  EXPECT_EQ(s.substr(0, 4), "KVHG");
  EXPECT_EQ(static_cast<unsigned char>(s[4]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(s[8]), 1u);
  // count (uint64 = 2) after min/max
  EXPECT_EQ(static_cast<unsigned char>(s[16 + 16]), 2u);
  const auto r = read_config_binary(ss);
  EXPECT_EQ(r.values, g.values);
}

TEST(Grid, BinaryRejectsWrongRankAndTruncation) {
  ConfigGrid g(Axis(0, 1, 2), 0, 1);
  std::stringstream ss;
  write_binary(ss, g);
  std::stringstream copy(ss.str());
  EXPECT_THROW(read_phase_binary(copy), Error);
  std::stringstream cut(ss.str().substr(0, 30));
  EXPECT_THROW(read_config_binary(cut), Error);
}

TEST(Grid, CsvFormat) {
  ConfigGrid g(Axis(0, 1, 2), 0, 1);
  g.values = {{0.5, 0.0}, {0.0, -0.25}};
  std::ostringstream os;
  write_csv(os, g);
  EXPECT_EQ(os.str(),
            "x,Re,Im\n"
            "0.0000000000000000e+00,5.0000000000000000e-01,0.0000000000000000e+00\n"
            "1.0000000000000000e+00,0.0000000000000000e+00,-2.5000000000000000e-01\n");
}
