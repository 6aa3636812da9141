#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kakeya/random.hpp"
#include "kakeya/sobolev_convergence.hpp"

using namespace kakeya;
constexpr double pi = std::numbers::pi;

TEST(Triangle, FuzzPlaneAndSpace) {
  const auto a = triangle_inequality_check<2>(1'000'000, 1);
  EXPECT_EQ(a.violations, 0u);
  EXPECT_GT(a.samples, 999'000u);
  const auto b = triangle_inequality_check<3>(1'000'000, 2);
  EXPECT_EQ(b.violations, 0u);
}

TEST(Triangle, DegenerateCases) {
  const Vec2 x{0.3, -0.2};
  const auto same = triangle_terms<2>(x, x + Vec2{1, 1}, x + Vec2{1, 1});
  EXPECT_EQ(same.lhs, 0.0);
  const auto ray = triangle_terms<2>(x, x + Vec2{0.5, 0}, x + Vec2{2, 0});
  EXPECT_NEAR(ray.lhs, 0.0, 1e-15);
  EXPECT_GE(ray.rhs, ray.lhs);
  const auto opposite = triangle_terms<2>(x, x + Vec2{-0.5, 0}, x + Vec2{2, 0});
  EXPECT_NEAR(opposite.lhs, 2.0, 1e-15);
  EXPECT_GE(opposite.rhs, opposite.lhs);
  EXPECT_THROW(triangle_terms<2>(x, x, x + Vec2{1, 0}), Error);
}

TEST(Agreement, ZeroMapAgreesEverywhere) {
  const auto mesh = sample_circle(1024);
  const auto c = make_map<2>("zero", 3);
  const auto collar = CollarParams::from(holder_estimate(c));
  EXPECT_EQ(collar.H, 0.0);
  for (double e : {0.1, 0.05}) {
    const auto s = winding_agreement(c, 0.5, e, collar, 0.01, mesh);
    EXPECT_EQ(s.mismatches, 0u);
    EXPECT_EQ(s.collar_cells, 0u);
    EXPECT_GT(s.compared, 0u);
  }
}

TEST(Agreement, LacunaryOutsideCollar) {
  const auto mesh = sample_circle(2048);
  const auto c = make_map<2>("lacunary:alpha=0.8", 3);
  const auto collar = CollarParams::from(holder_estimate(c));
  const auto s = winding_agreement(c, 0.7, 0.05, collar, 0.01, mesh);
  EXPECT_EQ(s.mismatches, 0u);
  EXPECT_GT(s.collar_cells, 0u);
  EXPECT_NEAR(s.collar_width, collar.H * std::pow(0.05, collar.delta_prime), 1e-15);
}

TEST(Agreement, CatalogMapsAcrossSlices) {
  const auto mesh = sample_circle(1024);
  for (const char* spec : {"lacunary:alpha=0.8,amp=0.25", "lacunary:alpha=0.6,amp=0.25,seed=3", "poly:degree=3,seed=2", "radial:r=0.5"}) {
    const auto c = make_map<2>(spec, 3);
    const auto collar = CollarParams::from(holder_estimate(c));
    for (double t : {0.25, 0.5, 0.75})
      for (double e : {0.1, 0.05}) EXPECT_EQ(winding_agreement(c, t, e, collar, 0.02, mesh).mismatches, 0u) << spec;
  }
}

TEST(Integrability, WindingL1BoundedAcrossSlices) {
  const auto mesh = sample_circle(1024);
  for (const char* spec : {"lacunary:alpha=0.8", "lacunary:alpha=0.5,seed=2", "poly:degree=4,seed=6"}) {
    const auto c = make_map<2>(spec, 3);
    for (double t = 0.0; t <= 1.0; t += 0.125) {
      const auto loop = slice_loop<2>(c, t, mesh);
      if (loop.degenerate) continue;
      const auto f = winding_field(loop, 0.01);
      double l1 = 0;
      for (std::size_t i = 0; i < f.size(); ++i)
        if (!f.masked[i]) l1 += std::abs(f.values[i]) * 1e-4;
      const double len = loop_area(loop);
      // |w| <= w^2 for integers, and the squared integral is bounded by length^2 / (4 pi)
      EXPECT_LE(l1, len * len / (4 * pi) * 1.05) << spec << " t " << t;
    }
  }
}

TEST(Split, ClosedFormTotals) {
  const auto mesh = sample_circle(1024);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const auto t = uniform_t_grid(33);
  const double h = 0.005;
  {
    const auto c = make_map<2>("zero", 3);
    const auto r = convergence_split(c, eps, t, h, mesh, CollarParams::from(holder_estimate(c)));
    for (std::size_t i = 0; i < eps.size(); ++i) {
      EXPECT_NEAR(r.total_integral[i], pi / 3, 5e-3);
      EXPECT_EQ(r.i1[i], 0.0);
      EXPECT_EQ(r.mismatches_outside_collar[i], 0u);
    }
    EXPECT_TRUE(r.cauchy);
    EXPECT_TRUE(r.i1_bound_holds);
  }
  {
    const auto c = make_map<2>("radial:r=0.5", 3);
    const auto r = convergence_split(c, eps, t, h, mesh, CollarParams::from(holder_estimate(c)));
    for (std::size_t i = 0; i < eps.size(); ++i) EXPECT_NEAR(r.total_integral[i], 13 * pi / 12, 1e-2);
    for (std::size_t i = 0; i < eps.size(); ++i) EXPECT_EQ(r.mismatches_outside_collar[i], 0u);
  }
}

TEST(Split, AgreementFractionGrowsAsEpsilonShrinks) {
  const auto mesh = sample_circle(1024);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const auto t = uniform_t_grid(9);
  const auto c = make_map<2>("lacunary:alpha=0.8,amp=0.25", 3);
  const auto r = convergence_split(c, eps, t, 0.01, mesh, CollarParams::from(holder_estimate(c)));
  for (std::size_t i = 0; i < eps.size(); ++i) {
    EXPECT_GE(r.agreement_region_fraction[i], 0.0);
    EXPECT_LE(r.agreement_region_fraction[i], 1.0);
    if (i > 0) EXPECT_GE(r.agreement_region_fraction[i], r.agreement_region_fraction[i - 1] - 0.02);
    EXPECT_NEAR(r.total_integral[i], r.i1[i] + r.i2[i], 1e-12);
  }
}

TEST(Split, Rejections) {
  const auto mesh = sample_circle(256);
  const auto c = make_map<2>("zero", 3);
  const auto t = uniform_t_grid(5);
  std::vector<double> two{0.1, 0.05}, asc{0.05, 0.1, 0.2};
  EXPECT_THROW(convergence_split(c, two, t, 0.01, mesh, {}), Error);
  EXPECT_THROW(convergence_split(c, asc, t, 0.01, mesh, {}), Error);
}
