#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kakeya/error.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/position_map.hpp"
#include "kakeya/random.hpp"
#include "kakeya/regularity.hpp"
#include "kakeya/sphere_geom.hpp"
#include "kakeya/vec.hpp"

namespace kakeya {

enum class MeasureMode { image, tube_union, neighborhood };

inline std::string_view to_string(MeasureMode m) {
  switch (m) {
    case MeasureMode::image: return "image";
    case MeasureMode::tube_union: return "tube_union";
    case MeasureMode::neighborhood: return "neighborhood";
  }
  return "?";
}

struct MeasureEstimate {
  double value = 0.0;
  double h = 0.0;
  std::size_t cells_hit = 0;
  MeasureMode mode = MeasureMode::image;
};

/// Modulus of continuity |c(x) - c(y)| <= C |x - y|^alpha used to choose parameter steps.
struct Modulus {
  double constant = 0.0;
  double exponent = 1.0;

  static Modulus from(const HolderFit& fit) {
    if (fit.degenerate()) return {0.0, 1.0};
    require(fit.reliable && std::isfinite(fit.constant), ErrorKind::invalid_argument,
            "modulus-of-continuity estimate unavailable (unreliable Hoelder fit)");
    return {fit.constant, *fit.exponent};
  }
  double operator()(double s) const { return constant * std::pow(s, exponent); }
};

/// Outer grid estimate of |Im phi| for phi(v, t) = (c(v) + t v, t), n = 3.
///
/// Parameters are sampled on a square lattice in the disk (step s) and at sub-layer t
/// midpoints (step h/3), with C s^alpha + s < h/2 so neighbouring samples land within
/// h/2 of each other in the image. xy-cells are anchored at (min c) - 1, so translating
/// c moves the grid with it.
inline MeasureEstimate rasterize_image_measure(const PositionMap<2>& map, double h, const Modulus& modulus,
                                               std::size_t max_samples = 40'000'000) {
  require(h > 0.0 && h <= 0.1, ErrorKind::invalid_argument, "h must lie in (0, 0.1]");
  require(map.domain() == DomainKind::ball, ErrorKind::invalid_argument, "image measure needs a ball-domain map");
  // Largest lattice step with C s^alpha + s < h/2, by bisection.
  double lo = 0.0, hi = h / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (modulus(mid) + mid < h / 2.0 ? lo : hi) = mid;
  }
  const double s = lo;
  require(s > 0.0, ErrorKind::resolution, "cannot choose a parameter step for this modulus");
  require(std::numbers::pi / (s * s) <= static_cast<double>(max_samples), ErrorKind::resolution,
          "parameter lattice too dense for this modulus");
  const int half = static_cast<int>(std::ceil(1.0 / s));
  std::vector<Vec2> vs;
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j) {
      const Vec2 v{i * s, j * s};
      if (dot(v, v) <= 1.0) vs.push_back(v);
    }
  const int sub = 3;
  const int layers = static_cast<int>(std::ceil(1.0 / h - 1e-9));
  require(vs.size() <= max_samples, ErrorKind::resolution, "parameter lattice too dense for this modulus");

  std::vector<Vec2> cv(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) cv[i] = map(vs[i]);
  Vec2 cmin = cv.front(), cmax = cv.front();
  for (const auto& c : cv)
    for (int a = 0; a < 2; ++a) {
      cmin[a] = std::min(cmin[a], c[a]);
      cmax[a] = std::max(cmax[a], c[a]);
    }
  for (auto& c : cv) c = c - cmin;
  std::array<int, 2> dims;
  for (int a = 0; a < 2; ++a) dims[a] = static_cast<int>(std::ceil((cmax[a] - cmin[a] + 2.0) / h)) + 1;

  std::vector<std::size_t> per_layer(layers, 0);
  parallel_for(static_cast<std::size_t>(layers), [&](std::size_t k) {
    std::vector<std::uint8_t> mark(static_cast<std::size_t>(dims[0]) * dims[1], 0);
    for (int q = 0; q < sub; ++q) {
      const double t = std::min(1.0, (static_cast<double>(k) + (q + 0.5) / sub) * h);
      for (std::size_t i = 0; i < vs.size(); ++i) {
        const double x = cv[i][0] + t * vs[i][0] + 1.0;
        const double y = cv[i][1] + t * vs[i][1] + 1.0;
        const int ix = std::clamp(static_cast<int>(x / h), 0, dims[0] - 1);
        const int iy = std::clamp(static_cast<int>(y / h), 0, dims[1] - 1);
        mark[static_cast<std::size_t>(iy) * dims[0] + ix] = 1;
      }
    }
    per_layer[k] = static_cast<std::size_t>(std::count(mark.begin(), mark.end(), 1));
  });
  MeasureEstimate m;
  m.h = h;
  m.mode = MeasureMode::image;
  for (auto c : per_layer) m.cells_hit += c;
  m.value = static_cast<double>(m.cells_hit) * h * h * h;
  return m;
}

/// Tubes T_v = delta-neighbourhood of {(c(v) + t v, t) : t in [0, 1]} over a delta-separated net.
struct TubeFamily {
  double delta = 0.0;
  int n = 3;
  std::vector<Vec2> net;
  std::vector<Vec2> centers;

  std::size_t size() const { return net.size(); }
};

/// Greedy maximal delta-separated subset of the disk, scanning a candidate lattice of
/// spacing delta/4 in lexicographic order (x outer, y inner).
inline std::vector<Vec2> separated_net(double delta, std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  require(delta >= 0.005 && delta <= 0.1, ErrorKind::invalid_argument, "delta must lie in [0.005, 0.1]");
  const double step = delta / 4.0;
  const int half = static_cast<int>(std::floor(1.0 / step));
  std::vector<Vec2> cand;
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j) {
      const Vec2 v{i * step, j * step};
      if (dot(v, v) <= 1.0) cand.push_back(v);
    }
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    for (std::size_t i = cand.size(); i > 1; --i) std::swap(cand[i - 1], cand[rng.next() % i]);
  }
  // Buckets of side delta: a conflicting point lies in the 3x3 neighbourhood.
  auto key = [&](int bx, int by) { return (static_cast<std::int64_t>(bx) << 32) ^ static_cast<std::uint32_t>(by); };
  std::unordered_map<std::int64_t, std::vector<int>> buckets;
  std::vector<Vec2> net;
  for (const auto& v : cand) {
    const int bx = static_cast<int>(std::floor(v[0] / delta)), by = static_cast<int>(std::floor(v[1] / delta));
    bool ok = true;
    for (int dx = -1; dx <= 1 && ok; ++dx)
      for (int dy = -1; dy <= 1 && ok; ++dy) {
        auto it = buckets.find(key(bx + dx, by + dy));
        if (it == buckets.end()) continue;
        for (int id : it->second)
          if (distance(net[id], v) < delta) {
            ok = false;
            break;
          }
      }
    if (!ok) continue;
    buckets[key(bx, by)].push_back(static_cast<int>(net.size()));
    net.push_back(v);
  }
  return net;
}

inline TubeFamily build_tube_family(const PositionMap<2>& map, double delta) {
  require(map.domain() == DomainKind::ball && map.n() == 3, ErrorKind::dimension, "tube families need an n=3 ball map");
  TubeFamily f;
  f.delta = delta;
  f.net = separated_net(delta);
  f.centers.resize(f.net.size());
  for (std::size_t i = 0; i < f.net.size(); ++i) f.centers[i] = map(f.net[i]);
  return f;
}

inline TubeFamily build_tube_family(std::vector<Vec2> net, std::vector<Vec2> centers, double delta) {
  require(delta > 0.0, ErrorKind::invalid_argument, "delta must be positive");
  require(net.size() == centers.size(), ErrorKind::invalid_argument, "net/centers size mismatch");
  TubeFamily f;
  f.delta = delta;
  f.net = std::move(net);
  f.centers = std::move(centers);
  return f;
}

/// Volume of the union of tubes: cells whose centre is within delta of a core segment,
/// swept layer by layer in z. Each tube visits only the cells of its cross-section box.
inline MeasureEstimate tube_union_volume(const TubeFamily& family, double h) {
  const double delta = family.delta;
  require(h > 0.0 && h <= delta / 4.0 + 1e-15, ErrorKind::resolution, "grid spacing must be <= delta/4");
  require(!family.net.empty(), ErrorKind::invalid_argument, "empty tube family");
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (std::size_t i = 0; i < family.size(); ++i)
    for (const double t : {0.0, 1.0}) {
      const Vec2 p = family.centers[i] + t * family.net[i];
      for (int a = 0; a < 2; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
  const Vec2 origin{lo[0] - delta - h, lo[1] - delta - h};
  const int nx = static_cast<int>(std::ceil((hi[0] - lo[0] + 2 * delta + 2 * h) / h)) + 1;
  const int ny = static_cast<int>(std::ceil((hi[1] - lo[1] + 2 * delta + 2 * h) / h)) + 1;
  const double z0 = -delta - h;
  const int nz = static_cast<int>(std::ceil((1.0 + 2 * delta + 2 * h) / h)) + 1;
  require(static_cast<double>(nx) * ny <= 4e8, ErrorKind::resolution, "tube grid too large");

  std::vector<std::size_t> per_layer(nz, 0);
  parallel_for(static_cast<std::size_t>(nz), [&](std::size_t kz) {
    const double z = z0 + (static_cast<double>(kz) + 0.5) * h;
    if (z < -delta || z > 1.0 + delta) return;
    std::vector<std::uint8_t> mark(static_cast<std::size_t>(nx) * ny, 0);
    for (std::size_t i = 0; i < family.size(); ++i) {
      const Vec2& c = family.centers[i];
      const Vec2& v = family.net[i];
      const double ta = std::clamp(z - delta, 0.0, 1.0), tb = std::clamp(z + delta, 0.0, 1.0);
      const Vec2 pa = c + ta * v, pb = c + tb * v;
      const int x0 = std::max(0, static_cast<int>(std::floor((std::min(pa[0], pb[0]) - delta - origin[0]) / h)));
      const int x1 = std::min(nx - 1, static_cast<int>(std::ceil((std::max(pa[0], pb[0]) + delta - origin[0]) / h)));
      const int y0 = std::max(0, static_cast<int>(std::floor((std::min(pa[1], pb[1]) - delta - origin[1]) / h)));
      const int y1 = std::min(ny - 1, static_cast<int>(std::ceil((std::max(pa[1], pb[1]) + delta - origin[1]) / h)));
      const Vec3 a{c[0], c[1], 0.0}, b{c[0] + v[0], c[1] + v[1], 1.0};
      for (int iy = y0; iy <= y1; ++iy) {
        const double y = origin[1] + (iy + 0.5) * h;
        for (int ix = x0; ix <= x1; ++ix) {
          auto& cell = mark[static_cast<std::size_t>(iy) * nx + ix];
          if (cell) continue;
          const Vec3 p{origin[0] + (ix + 0.5) * h, y, z};
          if (point_segment_distance<3>(p, a, b) <= delta) cell = 1;
        }
      }
    }
    per_layer[kz] = static_cast<std::size_t>(std::count(mark.begin(), mark.end(), 1));
  });
  MeasureEstimate m;
  m.h = h;
  m.mode = MeasureMode::tube_union;
  for (auto c : per_layer) m.cells_hit += c;
  m.value = static_cast<double>(m.cells_hit) * h * h * h;
  return m;
}

struct TubeScalingRow {
  double L = 0.0;
  std::size_t tubes = 0;
  double union_volume = 0.0;
  /// L^(n-1) * union_volume
  double scaled = 0.0;
};

struct TubeScalingReport {
  double delta = 0.0;
  double h = 0.0;
  /// Net-Lipschitz constant of the base before normalisation.
  double base_lipschitz = 0.0;
  std::vector<TubeScalingRow> rows;

  /// max/min of the scaled column over rows with L > 0.
  double spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rows)
      if (r.L > 0.0) {
        lo = std::min(lo, r.scaled);
        hi = std::max(hi, r.scaled);
      }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  double min_scaled() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& r : rows)
      if (r.L > 0.0) lo = std::min(lo, r.scaled);
    return lo;
  }
};

/// Scales the base map to unit net-Lipschitz constant, then measures the tube union of
/// L * c_base for each L. h defaults to delta/4.
inline TubeScalingReport lipschitz_tube_experiment(const PositionMap<2>& base, std::span<const double> L_values,
                                                   double delta, std::optional<double> h = std::nullopt) {
  for (double L : L_values) require(L >= 0.0 && L <= 8.0, ErrorKind::invalid_argument, "L must lie in [0, 8]");
  TubeScalingReport rep;
  rep.delta = delta;
  rep.h = h.value_or(delta / 4.0);
  const auto base_family = build_tube_family(base, delta);
  rep.base_lipschitz = lipschitz_constant_on_net<2>(base_family.net, base_family.centers);
  const double norm_factor = rep.base_lipschitz > 0.0 ? 1.0 / rep.base_lipschitz : 1.0;
  for (double L : L_values) {
    std::vector<Vec2> centers(base_family.size());
    for (std::size_t i = 0; i < centers.size(); ++i) centers[i] = (L * norm_factor) * base_family.centers[i];
    const auto fam = build_tube_family(base_family.net, std::move(centers), delta);
    const auto vol = tube_union_volume(fam, rep.h);
    rep.rows.push_back({L, fam.size(), vol.value, L * L * vol.value});
  }
  return rep;
}

/// Low-discrepancy points on S^2 (Fibonacci lattice).
inline std::vector<Vec3> fibonacci_sphere(int count) {
  std::vector<Vec3> pts(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts[i] = {r * std::cos(golden * i), r * std::sin(golden * i), z};
  }
  return pts;
}

/// Geodesic cap {v : angle(v, axis) <= radius}.
struct Cap {
  Vec3 axis{0, 0, 1};
  double radius = std::numbers::pi;

  bool contains(const Vec3& v, double slack = 1e-12) const {
    return std::acos(std::clamp(dot(v, axis), -1.0, 1.0)) <= radius + slack;
  }
  /// Nearest point of the cap.
  Vec3 clamp(const Vec3& v) const {
    const double ang = std::acos(std::clamp(dot(v, axis), -1.0, 1.0));
    if (ang <= radius) return v;
    Vec3 perp = v - dot(v, axis) * axis;
    const double pn = norm(perp);
    if (pn == 0.0) {
      const Vec3 a = std::fabs(axis[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      perp = normalized(cross(axis, a));
    } else {
      perp = (1.0 / pn) * perp;
    }
    return std::cos(radius) * axis + std::sin(radius) * perp;
  }
};

struct LineCoverResult {
  Vec3 v{};
  double residual = std::numeric_limits<double>::infinity();
  /// |c(v) - x|, so that x = c(v) + s v up to the residual.
  double s = 0.0;
  bool converged = false;
  /// -1 when the dense-scan fallback produced the answer, otherwise the seed index.
  int seed_index = -1;
};

namespace detail {

inline Vec3 kakeya_image(const PositionMap<3>& c, const Vec3& x, const Vec3& v) { return normalized(x - c(v)); }

inline double kakeya_residual(const PositionMap<3>& c, const Vec3& x, const Vec3& v) {
  return distance(v, kakeya_image(c, x, v));
}

/// Gauss-Newton on r(v) = v - f(v) in tangent coordinates around v, projected to the cap.
inline Vec3 polish(const PositionMap<3>& c, const Vec3& x, Vec3 v, const Cap& cap, int iters = 60) {
  for (int it = 0; it < iters; ++it) {
    const Vec3 r0 = v - kakeya_image(c, x, v);
    if (norm(r0) < 1e-14) break;
    const Vec3 a = std::fabs(v[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 e1 = normalized(cross(v, a)), e2 = cross(v, e1);
    const double step = 1e-7;
    std::array<Vec3, 2> J;
    for (int q = 0; q < 2; ++q) {
      const Vec3 w = normalized(v + step * (q == 0 ? e1 : e2));
      J[q] = (1.0 / step) * ((w - kakeya_image(c, x, w)) - r0);
    }
    const double a11 = dot(J[0], J[0]), a12 = dot(J[0], J[1]), a22 = dot(J[1], J[1]);
    const double b1 = -dot(J[0], r0), b2 = -dot(J[1], r0);
    const double det = a11 * a22 - a12 * a12;
    if (det <= 0.0) break;
    const double d1 = (b1 * a22 - b2 * a12) / det, d2 = (a11 * b2 - a12 * b1) / det;
    Vec3 next = cap.clamp(normalized(v + d1 * e1 + d2 * e2));
    if (kakeya_residual(c, x, next) >= norm(r0)) {
      // Halve the step once before giving up.
      next = cap.clamp(normalized(v + 0.5 * d1 * e1 + 0.5 * d2 * e2));
      if (kakeya_residual(c, x, next) >= norm(r0)) break;
    }
    v = next;
  }
  return v;
}

}  // namespace detail

/// Largest |c| over a dense Fibonacci sample of S^2.
inline double sampled_sup_norm(const PositionMap<3>& c, int samples = 20000) {
  double best = 0.0;
  for (const auto& v : fibonacci_sphere(samples)) best = std::max(best, norm(c(v)));
  return best;
}

/// Direction v (within the cap) with x = c(v) + |x - c(v)| v.
///
/// Fixed-point iteration v <- (x - c(v))/|x - c(v)| from 32 Fibonacci seeds (200 steps
/// each, iterates clamped to the cap, Gauss-Newton polish at the end); if no seed reaches
/// tol, a 10^4-point scan of the cap picks the best start for a final polish.
inline LineCoverResult line_kakeya_cover(const PositionMap<3>& c, const Vec3& x, double tol, double R,
                                         const Cap& cap = Cap{}) {
  require(c.domain() == DomainKind::sphere && c.n() == 3, ErrorKind::dimension, "line-Kakeya needs an n=3 sphere map");
  require(tol > 0.0, ErrorKind::invalid_argument, "tol must be positive");
  require(norm(x) > R, ErrorKind::invalid_argument, "x must lie outside B(0, R)");
  LineCoverResult best;
  auto consider = [&](const Vec3& v, int seed) {
    const double r = detail::kakeya_residual(c, x, v);
    if (r < best.residual) {
      best.v = v;
      best.residual = r;
      best.seed_index = seed;
    }
  };
  auto seeds = fibonacci_sphere(32);
  for (int si = 0; si < 32 && best.residual > tol; ++si) {
    Vec3 v = cap.clamp(seeds[si]);
    for (int it = 0; it < 200; ++it) {
      const Vec3 next = cap.clamp(detail::kakeya_image(c, x, v));
      if (distance(next, v) <= tol * 1e-3) {
        v = next;
        break;
      }
      v = next;
    }
    if (detail::kakeya_residual(c, x, v) > tol) v = detail::polish(c, x, v, cap);
    consider(v, si);
  }
  if (best.residual > tol) {
    // Dense scan restricted to the cap: sample the whole sphere and keep cap members.
    const double cap_fraction = 0.5 * (1.0 - std::cos(std::min(cap.radius, std::numbers::pi)));
    const int total = static_cast<int>(std::ceil(1e4 / std::max(cap_fraction, 1e-4)));
    Vec3 start = best.v;
    double start_r = best.residual;
    for (const auto& v : fibonacci_sphere(total)) {
      if (!cap.contains(v)) continue;
      const double r = detail::kakeya_residual(c, x, v);
      if (r < start_r) {
        start_r = r;
        start = v;
      }
    }
    const Vec3 v = detail::polish(c, x, start, cap, 200);
    const double r = detail::kakeya_residual(c, x, v);
    if (r < best.residual) {
      best.v = v;
      best.residual = r;
      best.seed_index = -1;
    }
  }
  best.s = distance(c(best.v), x);
  best.converged = best.residual <= tol && cap.contains(best.v);
  return best;
}

struct ConeCoverage {
  std::size_t samples = 0;
  std::size_t covered = 0;
  double fraction = 0.0;
  double max_residual = 0.0;
};

/// Samples the cone {x3 - R/r > |(x1, x2)|/r}, truncated at x3 < 3R/r, and solves for cap
/// directions around e3 with geodesic radius r.
inline ConeCoverage cone_coverage_check(const PositionMap<3>& c, double r, double R, std::size_t sample_count,
                                        std::uint64_t seed = 1, double tol = 1e-9) {
  require(r > 0.0 && r <= 0.5, ErrorKind::invalid_argument, "cap radius must lie in (0, 0.5]");
  require(R > 0.0, ErrorKind::invalid_argument, "R must be positive");
  const Cap cap{{0, 0, 1}, r};
  for (const auto& v : fibonacci_sphere(20000))
    if (cap.contains(v)) require(norm(c(v)) <= R, ErrorKind::invalid_argument, "c exceeds R on the cap");
  Rng rng(seed);
  std::vector<Vec3> pts;
  while (pts.size() < sample_count) {
    const double z = rng.uniform(R / r, 3.0 * R / r);
    const double x = rng.uniform(-2.0 * R, 2.0 * R), y = rng.uniform(-2.0 * R, 2.0 * R);
    if (std::hypot(x, y) < r * (z - R / r)) pts.push_back({x, y, z});
  }
  std::vector<double> res(pts.size());
  std::vector<std::uint8_t> ok(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const auto sol = line_kakeya_cover(c, pts[i], tol, R, cap);
    res[i] = sol.residual;
    ok[i] = sol.converged;
  });
  ConeCoverage cov;
  cov.samples = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cov.covered += ok[i];
    cov.max_residual = std::max(cov.max_residual, res[i]);
  }
  cov.fraction = cov.samples ? static_cast<double>(cov.covered) / cov.samples : 0.0;
  return cov;
}

}  // namespace kakeya
