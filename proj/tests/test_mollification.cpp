#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kakeya/mollification.hpp"
#include "kakeya/position_map.hpp"

using namespace kakeya;

namespace {
std::vector<Vec2> circle_values(const CircleMesh& m, double a, double b) {
  std::vector<Vec2> f(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) f[i] = {a * m.vertices[i][0], b * m.vertices[i][1]};
  return f;
}
}  // namespace

TEST(Bump, ProfileSupportAndSign) {
  EXPECT_EQ(bump_profile(1.0), 0.0);
  EXPECT_EQ(bump_profile(1.5), 0.0);
  EXPECT_NEAR(bump_profile(0.0), std::exp(-1.0), 1e-15);
  for (double r = 0; r < 1; r += 0.01) EXPECT_GE(bump_profile(r), 0.0);
  const auto k = mollifier_kernel(0.1, sample_circle(1024));
  EXPECT_EQ(k.profile.back(), 0.0);
  for (double p : k.profile) EXPECT_GE(p, 0.0);
}

TEST(Kernel, UnitMassEveryVertex) {
  const auto k = mollifier_kernel(0.1, sample_circle(1024));
  EXPECT_LT(k.mass_error(), 1e-8);
  const auto k2 = mollifier_kernel(0.3, sample_sphere2(10242));
  EXPECT_LT(k2.mass_error(), 1e-8);
}

TEST(Kernel, NormalizationOrderOne) {
  const auto m = sample_circle(4096);
  const auto a = mollifier_kernel(0.1, m), b = mollifier_kernel(0.05, m);
  EXPECT_LT(std::max(a.d_epsilon, b.d_epsilon) / std::min(a.d_epsilon, b.d_epsilon), 2.0);
  for (double e : {0.3, 0.2, 0.1, 0.05, 0.02}) {
    const auto k = mollifier_kernel(e, m);
    EXPECT_GE(k.d_epsilon_min, 0.1);
    EXPECT_LE(k.d_epsilon_max, 10.0);
  }
  const auto s = mollifier_kernel(0.3, sample_sphere2(10242));
  EXPECT_GE(s.d_epsilon_min, 0.1);
  EXPECT_LE(s.d_epsilon_max, 10.0);
}

TEST(Kernel, NormalizationMatchesDirectQuadrature) {
  // d = eps / integral of bump(|x - y| / eps) dy on the circle, by fine midpoint quadrature.
  const double eps = 0.1;
  const int n = 1 << 20;
  double raw = 0;
  for (int i = 0; i < n; ++i) {
    const double th = 2 * std::numbers::pi * (i + 0.5) / n;
    raw += bump_profile(2 * std::sin(std::fabs(th - std::numbers::pi) / 2) / eps) * 2 * std::numbers::pi / n;
  }
  const auto k = mollifier_kernel(eps, sample_circle(8192));
  EXPECT_NEAR(k.d_epsilon, eps / raw, 1e-4);
}

TEST(Kernel, Rejections) {
  EXPECT_THROW(mollifier_kernel(0.0, sample_circle(1024)), Error);
  EXPECT_THROW(mollifier_kernel(0.4, sample_circle(1024)), Error);
  try {
    mollifier_kernel(0.01, sample_circle(256));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resolution);
  }
}

TEST(Mollify, ConstantUnchanged) {
  const auto m = sample_circle(1024);
  const auto k = mollifier_kernel(0.1, m);
  std::vector<Vec2> f(m.size(), Vec2{0.3, -0.7});
  for (const auto& g : mollify_on_sphere(f, k)) {
    EXPECT_NEAR(g[0], 0.3, 1e-8);
    EXPECT_NEAR(g[1], -0.7, 1e-8);
  }
}

TEST(Mollify, IdentityShrinksByFirstFourierCoefficient) {
  const auto m = sample_circle(2048);
  const auto k = mollifier_kernel(0.1, m);
  const auto g = mollify_on_sphere(circle_values(m, 1, 1), k);
  double lo = 2, hi = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double lam = dot(g[i], m.vertices[i]);
    EXPECT_NEAR(cross(m.vertices[i], g[i]), 0.0, 1e-12);
    lo = std::min(lo, lam);
    hi = std::max(hi, lam);
  }
  EXPECT_GT(lo, 0.99);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(lo, hi, 1e-12);
}

TEST(Mollify, Linear) {
  const auto m = sample_circle(1024);
  const auto k = mollifier_kernel(0.05, m);
  const auto c1 = restrict_to_sphere(make_map<2>("lacunary:alpha=0.6", 3), m);
  const auto c2 = restrict_to_sphere(make_map<2>("poly:degree=3,seed=5", 3), m);
  std::vector<Vec2> mix(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) mix[i] = -1.7 * c1[i] + c2[i];
  const auto a = mollify_on_sphere(mix, k), b1 = mollify_on_sphere(c1, k), b2 = mollify_on_sphere(c2, k);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_LT(distance(a[i], -1.7 * b1[i] + b2[i]), 1e-10);
}

TEST(Mollify, DeviationSlopeMatchesExponent) {
  const auto m = sample_circle(4096);
  const auto c = make_map<2>("lacunary:alpha=0.6", 3);
  std::vector<double> x, y;
  for (double e : {0.1, 0.05, 0.025}) {
    const auto b = mollification_bounds(c, e, 0.6, m);
    x.push_back(std::log(e));
    y.push_back(std::log(b.sup_deviation));
  }
  const double slope = ((y[2] - y[0]) / (x[2] - x[0]));
  EXPECT_NEAR(slope, 0.6, 0.1);
}

TEST(Mollify, DeviationShrinksAlongHalvings) {
  const auto m = sample_circle(4096);
  for (const char* spec : {"lacunary:alpha=0.8", "lacunary:alpha=0.4", "poly:degree=4,seed=2", "radial:r=0.5"}) {
    const auto c = make_map<2>(spec, 3);
    double prev = std::numeric_limits<double>::infinity();
    for (double e : {0.2, 0.1, 0.05, 0.025}) {
      const double d = mollification_bounds(c, e, 0.5, m).sup_deviation;
      EXPECT_LE(d, prev * 1.05) << spec << " eps " << e;
      prev = d;
    }
  }
}

TEST(MollBounds, ConstantMap) {
  const auto b = mollification_bounds(make_map<2>("constant:p=1/2", 3), 0.1, 0.5, sample_circle(1024));
  EXPECT_NEAR(b.sup_deviation, 0.0, 1e-12);
  EXPECT_NEAR(b.grad_sup, 0.0, 1e-9);
}

TEST(MollBounds, RatiosStableForLacunary08) {
  const auto m = sample_circle(4096);
  const auto c = make_map<2>("lacunary:alpha=0.8", 3);
  std::vector<double> s, g;
  for (double e : {0.1, 0.05, 0.025}) {
    const auto b = mollification_bounds(c, e, 0.8, m);
    s.push_back(b.sup_ratio);
    g.push_back(b.grad_ratio);
  }
  EXPECT_LE(*std::max_element(s.begin(), s.end()) / *std::min_element(s.begin(), s.end()), 2.0);
  EXPECT_LE(*std::max_element(g.begin(), g.end()) / *std::min_element(g.begin(), g.end()), 2.0);
}

TEST(MollBounds, LipschitzNotIncreased) {
  const auto b = mollification_bounds(make_map<2>("radial:r=0.5", 3), 0.05, 1.0, sample_circle(4096));
  EXPECT_LE(b.grad_sup, 0.5 * 1.1);
}

TEST(MollBounds, SphereGradientOfLinearMap) {
  const auto m = sample_sphere2(10242);
  const auto b = mollification_bounds(make_map<3>("radial:r=0.5", 4), 0.3, 1.0, m);
  EXPECT_LE(b.grad_sup, 0.5 * 1.1);
  EXPECT_GT(b.grad_sup, 0.4);
}
