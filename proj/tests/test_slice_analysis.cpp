#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kakeya/mollification.hpp"
#include "kakeya/random.hpp"
#include "kakeya/slice_analysis.hpp"

using namespace kakeya;
constexpr double pi = std::numbers::pi;

namespace {
// min over (a, b) of the integral over [0, 1] of |pi t^2 + b t + a|, from a 400x400 grid
// search refined twice around the best cell. Computed once and frozen here.
constexpr double kKappaBruteForce = 0.19634954;

double abs_integral(double lead, double a, double b, int samples = 2000) {
  double s = 0;
  for (int i = 0; i < samples; ++i) {
    const double t = (i + 0.5) / samples;
    s += std::fabs(lead * t * t + b * t + a);
  }
  return s / samples;
}

double brute_force_kappa(int grid) {
  double a0 = -1.0, a1 = 1.0, b0 = -4.0, b1 = 1.0;
  double best = 1e9, ba = 0, bb = 0;
  for (int round = 0; round < 3; ++round) {
    const double da = (a1 - a0) / (grid - 1), db = (b1 - b0) / (grid - 1);
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        const double a = a0 + i * da, b = b0 + j * db;
        const double v = abs_integral(pi, a, b, 200);
        if (v < best) best = v, ba = a, bb = b;
      }
    a0 = ba - 2 * da, a1 = ba + 2 * da, b0 = bb - 2 * db, b1 = bb + 2 * db;
  }
  return abs_integral(pi, ba, bb, 200000);
}

Loop2 square() { return make_polyline({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

Loop2 circle(int n, double r = 1.0, int turns = 1) {
  std::vector<Vec2> v(n);
  for (int k = 0; k < n; ++k) v[k] = {r * std::cos(2 * pi * turns * k / n), r * std::sin(2 * pi * turns * k / n)};
  return make_polyline(v);
}
}  // namespace

TEST(SliceLoop, Examples) {
  const auto mesh = sample_circle(256);
  const auto zero = make_map<2>("zero", 3);
  const auto l = slice_loop<2>(zero, 0.5, mesh);
  EXPECT_EQ(l.size(), 256u);
  for (const auto& v : l.vertices) EXPECT_NEAR(norm(v), 0.5, 1e-15);
  EXPECT_GT(signed_volume_stokes(l), 0.0);
  EXPECT_FALSE(l.degenerate);
  const auto d = slice_loop<2>(zero, 0.0, mesh);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(signed_volume_stokes(d), 0.0);
  const auto r = slice_loop<2>(make_map<2>("radial:r=0.5", 3), 0.3, mesh);
  for (const auto& v : r.vertices) EXPECT_NEAR(norm(v), 0.8, 1e-15);
  EXPECT_THROW(slice_loop<2>(zero, 1.5, mesh), Error);
}

TEST(SliceLoop, SphereSlice) {
  const auto mesh = sample_sphere2(642);
  const auto l = slice_loop<3>(make_map<3>("zero", 4), 0.5, mesh);
  EXPECT_NO_THROW(check_closed(l));
  EXPECT_NEAR(signed_volume_stokes(l), 4 * pi / 3 * 0.125, 0.02 * 4 * pi / 3 * 0.125);
  EXPECT_EQ(generalized_winding_3d(l, {0, 0, 0}), 1);
}

TEST(Stokes, Examples) {
  EXPECT_DOUBLE_EQ(signed_volume_stokes(square()), 1.0);
  EXPECT_NEAR(signed_volume_stokes(circle(1024, 2.0)), 4 * pi, 1e-3);
  EXPECT_NEAR(signed_volume_stokes(reversed(circle(1024, 2.0))), -4 * pi, 1e-3);
  const auto ico = sample_sphere2(2562);
  const auto ball = make_trimesh(ico.vertices, ico.cells);
  EXPECT_NEAR(signed_volume_stokes(ball), 4 * pi / 3, 0.01);
  EXPECT_NEAR(signed_volume_stokes(reversed(ball)), -signed_volume_stokes(ball), 1e-14);
}

TEST(Stokes, TrigonometricVariantExactOnCircles) {
  auto periodic = [](Loop2 l) {
    l.uniform_periodic = true;
    return l;
  };
  for (double r : {0.3, 1.0, 2.5}) EXPECT_NEAR(signed_volume_trigonometric(periodic(circle(64, r))), pi * r * r, 1e-12);
  EXPECT_NEAR(signed_volume_trigonometric(periodic(circle(256, 1.0, 2))), 2 * pi, 1e-12);
  EXPECT_THROW(signed_volume_trigonometric(circle(64)), Error);
}

TEST(GridVolume, Examples) {
  const auto c = circle(1024);
  const auto g = signed_volume_grid(c, 0.01);
  EXPECT_NEAR(g.value, pi, 0.05);
  EXPECT_GT(g.masked_cells, 0u);
  auto far = c;
  for (auto& v : far.vertices) v = v + Vec2{100, 100};
  EXPECT_NEAR(signed_volume_grid(far, 0.01).value, g.value, 1e-9);
  const auto pt = make_polyline(std::vector<Vec2>(16, Vec2{0.2, 0.3}));
  EXPECT_EQ(signed_volume_grid(pt, 0.01).value, 0.0);
}

TEST(GridVolume, AgreesWithStokesOnCatalogLoops) {
  const auto mesh = sample_circle(1024);
  const double h = 0.01;
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const std::string spec = k % 2 ? "lacunary:alpha=0.8,seed=" + std::to_string(k) : "poly:degree=5,scale=0.7,seed=" + std::to_string(k);
    const auto loop = slice_loop<2>(make_map<2>(spec, 3), rng.uniform(0.0, 1.0), mesh);
    EXPECT_LE(std::fabs(signed_volume_grid(loop, h).value - signed_volume_stokes(loop)), 3 * h * loop_area(loop)) << spec;
  }
}

TEST(Sweep, ClosedFormProfiles) {
  const auto mesh = sample_circle(4096);
  const auto t = uniform_t_grid(64);
  const auto zero = sweep_signed_volume<2>(make_map<2>("zero", 3), t, mesh, std::nullopt, SvMethod::stokes);
  const auto half = sweep_signed_volume<2>(make_map<2>("radial:r=0.5", 3), t, mesh, std::nullopt, SvMethod::stokes);
  // Inscribed 4096-gon of radius R has area (N/2) R^2 sin(2 pi / N).
  const double poly = 2048 * std::sin(2 * pi / 4096);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(zero.sv_values[i], poly * t[i] * t[i], 1e-12);
    EXPECT_NEAR(half.sv_values[i], poly * (t[i] + 0.5) * (t[i] + 0.5), 1e-12);
    EXPECT_NEAR(half.sv_values[i], pi * (t[i] + 0.5) * (t[i] + 0.5), 4e-6);
  }
  const auto spec = sweep_signed_volume<2>(make_map<2>("radial:r=0.5", 3), t, sample_circle(64), std::nullopt, SvMethod::spectral);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(spec.sv_values[i], pi * (t[i] + 0.5) * (t[i] + 0.5), 1e-12);
}

TEST(Sweep, ProfileInvariants) {
  const auto t = uniform_t_grid(64);
  ASSERT_EQ(t.size(), 64u);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_EQ(t.back(), 1.0);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);
  std::vector<double> bad{0.0, 0.5, 0.4};
  EXPECT_THROW(sweep_signed_volume<2>(make_map<2>("zero", 3), bad, sample_circle(64), std::nullopt, SvMethod::stokes), Error);
  std::vector<double> out{0.0, 0.5, 1.2};
  EXPECT_THROW(sweep_signed_volume<2>(make_map<2>("zero", 3), out, sample_circle(64), std::nullopt, SvMethod::stokes), Error);
}

TEST(Sweep, MethodsAgreeForMollifiedLacunary) {
  const auto mesh = sample_circle(2048);
  const auto t = uniform_t_grid(16);
  const auto map = make_map<2>("lacunary:alpha=0.8", 3);
  const double h = 0.01;
  const auto s = sweep_signed_volume<2>(map, t, mesh, 0.05, SvMethod::stokes);
  const auto g = sweep_signed_volume<2>(map, t, mesh, 0.05, SvMethod::grid, h);
  const auto k = mollifier_kernel(0.05, mesh);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto loop = slice_loop<2>(map, t[i], mesh, &k);
    EXPECT_LE(std::fabs(s.sv_values[i] - g.sv_values[i]), 3 * h * loop_area(loop)) << t[i];
  }
}

TEST(Fit, ClosedFormCoefficients) {
  const auto mesh = sample_circle(4096);
  const auto t = uniform_t_grid(64);
  const auto f0 = fit_sv_polynomial(sweep_signed_volume<2>(make_map<2>("zero", 3), t, mesh, std::nullopt, SvMethod::stokes), 3);
  ASSERT_EQ(f0.coefficients.size(), 3u);
  EXPECT_NEAR(f0.coefficients[0], 0.0, 1e-5);
  EXPECT_NEAR(f0.coefficients[1], 0.0, 1e-5);
  EXPECT_NEAR(f0.coefficients[2], pi, 1e-5);
  EXPECT_LT(f0.residual_rms, 1e-6);
  const auto f1 = fit_sv_polynomial(sweep_signed_volume<2>(make_map<2>("radial:r=0.5", 3), t, mesh, std::nullopt, SvMethod::stokes), 3);
  EXPECT_NEAR(f1.coefficients[0], pi / 4, 1e-4);
  EXPECT_NEAR(f1.coefficients[1], pi, 1e-4);
  EXPECT_NEAR(f1.coefficients[2], pi, 1e-4);
  EXPECT_GE(f1.residual_rms, 0.0);
}

TEST(Fit, MollifiedLacunaryLeadingTerm) {
  const auto t = uniform_t_grid(64);
  const auto map = make_map<2>("lacunary:alpha=0.8", 3);
  std::vector<double> leads;
  for (double e : {0.1, 0.05, 0.025}) {
    const auto p = sweep_signed_volume<2>(map, t, sample_circle(4096), e, SvMethod::stokes);
    const auto f = fit_sv_polynomial(p, 3);
    double mx = 0;
    for (double v : p.sv_values) mx = std::max(mx, std::fabs(v));
    EXPECT_NEAR(f.leading_coefficient, pi, 0.02 * pi) << e;
    EXPECT_LT(f.residual_rms, 0.01 * mx);
    leads.push_back(f.leading_coefficient);
  }
  EXPECT_LT((*std::max_element(leads.begin(), leads.end()) - *std::min_element(leads.begin(), leads.end())) / pi, 0.02);
}

TEST(Fit, Rejections) {
  SVProfile p;
  p.t_values = {0.0, 0.5, 1.0};
  p.sv_values = {0.0, 1.0, 2.0};
  EXPECT_THROW(fit_sv_polynomial(p, 3), Error);
  p.t_values = {0.5, 0.5 + 1e-9, 0.5 + 2e-9, 0.5 + 3e-9, 0.5 + 4e-9, 0.5 + 5e-9};
  p.sv_values.assign(6, 1.0);
  EXPECT_THROW(fit_sv_polynomial(p, 3), Error);
}

TEST(LowerBound, KappaMatchesFrozenBruteForce) {
  EXPECT_NEAR(kappa_lower_bound(pi, 3), kKappaBruteForce, 1e-6);
}

TEST(LowerBound, BruteForceReproducesFrozenKappa) {
  // a coarser grid than the frozen run; three refinements still land on the optimum
  EXPECT_NEAR(brute_force_kappa(80), kKappaBruteForce, 1e-5);
}

TEST(LowerBound, Examples) {
  const auto mesh = sample_circle(4096);
  const auto t = uniform_t_grid(257);
  const auto p0 = sweep_signed_volume<2>(make_map<2>("zero", 3), t, mesh, std::nullopt, SvMethod::stokes);
  const auto c0 = sv_lower_bound_check(fit_sv_polynomial(p0, 3), p0, 3);
  EXPECT_NEAR(c0.integral_abs_sv, pi / 3, 1e-4);
  EXPECT_TRUE(c0.passed);
  const auto p1 = sweep_signed_volume<2>(make_map<2>("radial:r=0.5", 3), t, mesh, std::nullopt, SvMethod::stokes);
  const auto c1 = sv_lower_bound_check(fit_sv_polynomial(p1, 3), p1, 3);
  EXPECT_NEAR(c1.integral_abs_sv, 13 * pi / 12, 1e-3);
  EXPECT_TRUE(c1.passed);
  EXPECT_GE(c1.integral_abs_sv, c1.kappa);
}

TEST(LowerBound, RejectsWrongOrientation) {
  const auto mesh = sample_circle(1024);
  const auto t = uniform_t_grid(32);
  auto p = sweep_signed_volume<2>(make_map<2>("zero", 3), t, mesh, std::nullopt, SvMethod::stokes);
  for (double& v : p.sv_values) v = -v;
  try {
    sv_lower_bound_check(fit_sv_polynomial(p, 3), p, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::consistency);
  }
}

TEST(LoopArea, Examples) {
  EXPECT_NEAR(loop_area(circle(1024)), 2 * pi, 1e-4);
  EXPECT_DOUBLE_EQ(loop_area(square()), 4.0);
}

TEST(Neighborhood, Examples) {
  const auto c = circle(2048);
  EXPECT_NEAR(neighborhood_measure(c, 0.1, 0.01), 0.4 * pi, 0.03 * 0.4 * pi);
  const auto pt = make_polyline(std::vector<Vec2>(16, Vec2{0.3, -0.2}));
  EXPECT_NEAR(neighborhood_measure(pt, 0.2, 0.005), pi * 0.04, 0.03 * pi * 0.04);
  EXPECT_THROW(neighborhood_measure(c, 0.1, 0.05), Error);
}

TEST(Neighborhood, MonotoneInRadius) {
  const auto mesh = sample_circle(1024);
  for (const char* spec : {"lacunary:alpha=0.6", "poly:degree=3,seed=2"}) {
    const auto loop = slice_loop<2>(make_map<2>(spec, 3), 0.6, mesh);
    double prev = 0;
    for (double r : {0.02, 0.04, 0.08, 0.16, 0.32}) {
      const double m = neighborhood_measure(loop, r, 0.005);
      EXPECT_GE(m, prev);
      prev = m;
    }
  }
}

TEST(Isoperimetric, EqualityCases) {
  const double sharp = 1 / (2 * std::sqrt(pi));
  const auto one = isoperimetric_check(circle(4096), 0.005);
  EXPECT_NEAR(one.ratio, sharp, 0.01 * sharp);
  EXPECT_NEAR(one.lhs, std::sqrt(pi), 0.01 * std::sqrt(pi));
  EXPECT_TRUE(one.passed);
  const auto two = isoperimetric_check(circle(4096, 1.0, 2), 0.005);
  EXPECT_NEAR(two.ratio, sharp, 0.01 * sharp);
  EXPECT_NEAR(two.lhs, 2 * std::sqrt(pi), 0.02 * std::sqrt(pi));
  const auto pt = isoperimetric_check(make_polyline(std::vector<Vec2>(16, Vec2{0, 0})), 0.01);
  EXPECT_EQ(pt.lhs, 0.0);
  EXPECT_TRUE(pt.passed);
}

TEST(Isoperimetric, RandomMollifiedLacunaryLoops) {
  const auto mesh = sample_circle(2048);
  Rng rng(21);
  for (int k = 0; k < 100; ++k) {
    const double alpha = rng.uniform(0.3, 1.0);
    const auto map = make_map<2>("lacunary:alpha=" + std::to_string(alpha) + ",seed=" + std::to_string(k), 3);
    const std::optional<double> eps = k % 2 ? std::optional<double>(0.05) : std::nullopt;
    const auto loop = slice_loop<2>(map, rng.uniform(0.0, 1.0), mesh, eps);
    const auto r = isoperimetric_check(loop, 0.01);
    EXPECT_TRUE(r.passed) << k << " ratio " << r.ratio;
    EXPECT_LE(r.ratio, 1 / std::sqrt(4 * pi) + 0.02);
  }
}
