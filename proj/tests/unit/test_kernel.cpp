#include <gtest/gtest.h>

#include <cmath>

#include "avsamp/kernel.hpp"
#include "oracles.hpp"

using namespace avsamp;

namespace {

// Cox-de Boor: B-spline of order n with integer knots 0..n, recentred at 0.
double de_boor(int n, double x) {
  const double t = x + 0.5 * n;
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = (t >= i && t < i + 1) ? 1.0 : 0.0;
  for (int k = 2; k <= n; ++k)
    for (int i = 0; i + k <= n; ++i)
      b[static_cast<std::size_t>(i)] = ((t - i) * b[static_cast<std::size_t>(i)] + (i + k - t) * b[static_cast<std::size_t>(i + 1)]) / (k - 1);
  return b[0];
}

TEST(Kernel, BsplineProfilesMatchDeBoor) {
  for (int n = 2; n <= 4; ++n) {
    const KernelSpec k = KernelSpec::bspline(1, n);
    for (double x = -2.3; x <= 2.3; x += 0.0173) EXPECT_NEAR(profile_value(k, x), de_boor(n, x), 1e-14) << n << " " << x;
  }
}

TEST(Kernel, RasterizedCubicMatchesDirectEvaluation) {
  const GridSpec s(1, {8, 8}, 16);
  const DiscreteField f = rasterize(KernelSpec::bspline(2, 4), s);
  double worst = 0.0;
  for (long i = 0; i < s.size(); ++i) {
    const Index c = s.unflat(i);
    double v = 1.0;
    for (int a = 0; a < 2; ++a) v *= de_boor(4, s.wrap_delta(a, s.midpoint(a, c[a])));
    worst = std::max(worst, std::abs(f[i] - v));
  }
  EXPECT_LE(worst, 1e-15);
}

TEST(Kernel, UnitBoxRasterHasOnesPerUnitCell) {
  const GridSpec s(1, {4, 4}, 4);
  const DiscreteField f = rasterize(KernelSpec::box(2), s);
  long ones = 0;
  for (double v : f.values()) ones += v == 1.0 ? 1 : 0;
  EXPECT_EQ(ones, 16);
  EXPECT_EQ(f.max_abs(), 1.0);
  EXPECT_EQ(integrate(f), 1.0);
}

TEST(Kernel, ZeroAmplitudeRastersToZero) {
  const GridSpec s(1, {4, 4}, 4);
  EXPECT_EQ(rasterize(KernelSpec::bspline(2, 3).with_amplitude(0.0), s).max_abs(), 0.0);
}

TEST(Kernel, MassesAndDilation) {
  for (const auto& k : {KernelSpec::box(2), KernelSpec::tent(2), KernelSpec::bspline(2, 3), KernelSpec::bspline(2, 4),
                        KernelSpec::gaussian(2, 0.5, 3.0)}) {
    EXPECT_NEAR(k.mass(), 1.0, 1e-15) << k.name();
    const KernelSpec d = k.dilated(0.25);
    EXPECT_NEAR(d.mass(), 1.0, 1e-15);
    EXPECT_NEAR(d.support_radius(0), 0.25 * k.support_radius(0), 1e-15);
  }
  const GridSpec s(1, {8, 8}, 32);
  EXPECT_NEAR(integrate(rasterize(KernelSpec::gaussian(2, 0.5, 3.0), s)), 1.0, 1e-4);
  EXPECT_NEAR(integrate(rasterize(KernelSpec::bspline(2, 4), s)), 1.0, 1e-12);
}

TEST(Kernel, GaussianIsContinuousAtCutoff) {
  const KernelSpec g = KernelSpec::gaussian(1, 0.5, 3.0);
  EXPECT_NEAR(profile_value(g, 1.5 - 1e-9), 0.0, 1e-8);
  EXPECT_EQ(profile_value(g, 1.5 + 1e-9), 0.0);
}

TEST(Kernel, BoxEdgeTakesHalf) {
  const KernelSpec b = KernelSpec::box(1);
  EXPECT_EQ(profile_value(b, 0.5), 0.5);
  EXPECT_EQ(profile_value(b, -0.5), 0.5);
  EXPECT_EQ(profile_value(b, 0.49), 1.0);
}

TEST(Kernel, ParseTokens) {
  EXPECT_EQ(parse_kernel_token("bspline3", 2).order, 3);
  EXPECT_EQ(parse_kernel_token("tent", 2).shape, Shape::tent);
  const KernelSpec g = parse_kernel_token("gauss(0.4, 2.5)", 2);
  EXPECT_EQ(g.sigma, 0.4);
  EXPECT_EQ(g.cutoff, 2.5);
  const KernelSpec half = parse_kernel_token("bspline3*0.5", 2);
  EXPECT_EQ(half.scale[0], 0.5);
  EXPECT_NEAR(half.mass(), 1.0, 1e-15);
  EXPECT_THROW(parse_kernel_token("bspline7", 2), std::invalid_argument);
  EXPECT_THROW(parse_kernel_token("bspline3*0", 2), std::invalid_argument);
}

TEST(Kernel, RejectsSupportWiderThanPeriod) {
  const GridSpec s(1, {4, 4}, 4);
  EXPECT_THROW(rasterize(KernelSpec::bspline(2, 4), s), GridError);
  EXPECT_NO_THROW(rasterize(KernelSpec::bspline(2, 4).dilated(0.99), s));
}

}  // namespace
