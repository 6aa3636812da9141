#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "kakeya/position_map.hpp"
#include "kakeya/random.hpp"
#include "kakeya/sphere_geom.hpp"

using namespace kakeya;

namespace {
std::vector<Vec2> disk_points(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec2> out;
  while (static_cast<int>(out.size()) < count) {
    Vec2 p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (norm(p) <= 1.0) out.push_back(p);
  }
  return out;
}
}  // namespace

TEST(MapSpec, RoundTrip) {
  const auto s = MapSpec::parse("lacunary:alpha=0.8,terms=12,seed=7");
  EXPECT_EQ(s.variant, "lacunary");
  EXPECT_EQ(s.params.at("alpha"), "0.8");
  EXPECT_EQ(MapSpec::parse(s.to_string()).params, s.params);
}

TEST(MakeMap, Constant) {
  const auto c = make_map<2>("constant:p=0.1/0.2", 3);
  for (const auto& v : disk_points(100, 1)) {
    EXPECT_EQ(c(v)[0], 0.1);
    EXPECT_EQ(c(v)[1], 0.2);
  }
  const auto z = make_map<2>("zero", 3);
  EXPECT_EQ(z(Vec2{0.3, 0.4}), (Vec2{0, 0}));
}

TEST(MakeMap, Radial) {
  const auto c = make_map<2>("radial:r=0.5", 3);
  for (const auto& v : disk_points(100, 2)) {
    EXPECT_EQ(c(v)[0], 0.5 * v[0]);
    EXPECT_EQ(c(v)[1], 0.5 * v[1]);
  }
}

TEST(MakeMap, LacunaryBoundedByGeometricSeries) {
  const auto c = make_map<2>("lacunary:alpha=0.8,terms=12,seed=7", 3);
  double bound = 0;
  for (int k = 1; k <= 12; ++k) bound += std::exp2(-0.8 * k);
  EXPECT_LT(bound, 1.35);
  const auto mesh = sample_circle(1 << 16);
  double sup = 0;
  for (const auto& v : mesh.vertices) sup = std::max(sup, norm(c(v)));
  for (const auto& v : disk_points(5000, 3)) sup = std::max(sup, norm(c(v)));
  EXPECT_LE(sup, bound);
  EXPECT_GT(sup, 0.3);
}

TEST(MakeMap, Deterministic) {
  for (const char* spec : {"lacunary:alpha=0.6,seed=3", "poly:degree=4,scale=0.5,seed=11", "radial:r=0.25"}) {
    const auto a = make_map<2>(spec, 3), b = make_map<2>(spec, 3);
    for (const auto& v : disk_points(200, 4)) {
      const auto x = a(v), y = b(v);
      EXPECT_EQ(std::memcmp(x.data(), y.data(), sizeof x), 0) << spec;
    }
  }
  const auto s1 = make_map<3>("lacunary:alpha=0.5", 3, DomainKind::sphere);
  const auto s2 = make_map<3>("lacunary:alpha=0.5", 3, DomainKind::sphere);
  EXPECT_EQ(s1(Vec3{0, 0.6, 0.8}), s2(Vec3{0, 0.6, 0.8}));
}

TEST(MakeMap, Rejections) {
  EXPECT_THROW(make_map<2>("lacunary:alpha=1.5", 3), Error);
  EXPECT_THROW(make_map<2>("lacunary:alpha=0", 3), Error);
  EXPECT_THROW(make_map<2>("radial:q=1", 3), Error);
  EXPECT_THROW(make_map<2>("bogus", 3), Error);
  EXPECT_THROW(make_map<2>("zero", 4), Error);
  EXPECT_THROW(make_map<2>("grid:file=/nonexistent.csv", 3), Error);
}

TEST(MakeMap, GridSampledFromCsv) {
  const auto path = std::filesystem::temp_directory_path() / "kakeya_grid_test.csv";
  {
    std::ofstream f(path);
    f << "0,0,0.1,0.2\n0.5,0,0.35,0.2\n0,0.5,0.1,0.45\n";
  }
  const auto c = make_map<2>("grid:file=" + path.string(), 3);
  EXPECT_EQ(c(Vec2{0.5, 0}), (Vec2{0.35, 0.2}));
  EXPECT_EQ(c(Vec2{0, 0}), (Vec2{0.1, 0.2}));
  {
    std::ofstream f(path);
    f << "";
  }
  EXPECT_THROW(make_map<2>("grid:file=" + path.string(), 3), Error);
  std::filesystem::remove(path);
}

TEST(NetLipschitz, Examples) {
  const auto pts = disk_points(200, 5);
  std::vector<Vec2> cst(pts.size(), Vec2{0.3, -0.1}), half(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) half[i] = 0.5 * pts[i];
  EXPECT_EQ(lipschitz_constant_on_net<2>(pts, cst), 0.0);
  EXPECT_NEAR(lipschitz_constant_on_net<2>(pts, half), 0.5, 1e-15);
  auto dup = pts;
  dup.push_back(pts[3]);
  std::vector<Vec2> dv(dup.size());
  EXPECT_THROW(lipschitz_constant_on_net<2>(dup, dv), Error);
  EXPECT_THROW(lipschitz_constant_on_net<2>(std::vector<Vec2>{{0, 0}}, std::vector<Vec2>{{0, 0}}), Error);
}

TEST(NetLipschitz, TraversalOrderIndependent) {
  const auto pts = disk_points(300, 6);
  const auto c = make_map<2>("lacunary:alpha=0.7", 3);
  std::vector<Vec2> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = c(pts[i]);
  double brute = 0;
  for (std::size_t i = pts.size(); i-- > 0;)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) brute = std::max(brute, distance(vals[i], vals[j]) / distance(pts[i], pts[j]));
  EXPECT_EQ(lipschitz_constant_on_net<2>(pts, vals), brute);
}

TEST(McShane, ReproducesNetAndConstants) {
  const auto pts = disk_points(60, 7);
  std::vector<Vec2> cst(pts.size(), Vec2{0.4, 0.7});
  const auto e = mcshane_extend<2>(pts, cst, 3);
  for (const auto& v : disk_points(100, 8)) EXPECT_EQ(e(v), (Vec2{0.4, 0.7}));
  EXPECT_THROW(mcshane_extend<2>({}, {}, 3), Error);
}

TEST(McShane, LipschitzBoundOnFinerGrid) {
  const auto pts = disk_points(80, 9);
  for (const char* spec : {"poly:degree=3,scale=0.8,seed=2", "lacunary:alpha=0.6,seed=4"}) {
    const auto c = make_map<2>(spec, 3);
    std::vector<Vec2> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = c(pts[i]);
    const double L = lipschitz_constant_on_net<2>(pts, vals);
    const auto e = mcshane_extend<2>(pts, vals, 3);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(e(pts[i]), vals[i]);
    // grid 10x finer than the net spacing
    const double step = 0.02;
    double worst = 0;
    std::vector<Vec2> grid;
    for (double x = -1; x <= 1; x += step)
      for (double y = -1; y <= 1; y += step)
        if (x * x + y * y <= 1) grid.push_back({x, y});
    for (std::size_t i = 0; i < grid.size(); i += 7)
      for (std::size_t j = i + 1; j < grid.size(); j += 13)
        worst = std::max(worst, distance(e(grid[i]), e(grid[j])) / distance(grid[i], grid[j]));
    EXPECT_LE(worst, std::sqrt(2.0) * L * (1 + 1e-12)) << spec;
    EXPECT_LE(worst, 3 * L);
  }
}

TEST(McShane, LinearNetWithinSqrt2L) {
  const auto pts = disk_points(50, 10);
  std::vector<Vec2> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = {0.3 * pts[i][0] - 0.2 * pts[i][1], 0.5 * pts[i][1]};
  const double L = lipschitz_constant_on_net<2>(pts, vals);
  const auto e = mcshane_extend<2>(pts, vals, 3);
  Rng rng(11);
  double worst = 0;
  for (int k = 0; k < 20000; ++k) {
    const Vec2 a{rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7)};
    const Vec2 b = a + Vec2{rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3)};
    worst = std::max(worst, distance(e(a), e(b)) / distance(a, b));
  }
  EXPECT_LE(worst, std::sqrt(2.0) * L * (1 + 1e-9));
}

TEST(PositionMap, TransformedIsAffine) {
  const auto c = make_map<2>("lacunary:alpha=0.8", 3);
  const auto t = c.transformed(2.0, Vec2{0.1, -0.3});
  for (const auto& v : disk_points(50, 12)) {
    const auto a = t(v), b = c(v);
    EXPECT_NEAR(a[0], 2 * b[0] + 0.1, 1e-15);
    EXPECT_NEAR(a[1], 2 * b[1] - 0.3, 1e-15);
  }
}
