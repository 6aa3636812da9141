#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "kakeya/error.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/sphere_geom.hpp"
#include "kakeya/vec.hpp"

namespace kakeya {

/// Closed image of the boundary sphere at height t.
/// A == 2: polyline, cells are directed segments (i, j) with the closing edge included.
/// A == 3: oriented triangle mesh, outward normals for a positively oriented embedding.
template <int A>
struct SliceLoop {
  static_assert(A == 2 || A == 3, "slice loops live in R^2 or R^3");
  using Point = Vec<A>;
  using Cell = std::array<int, A>;

  double t = 0.0;
  std::vector<Point> vertices;
  std::vector<Cell> cells;
  /// All vertices coincide (e.g. c == 0 at t == 0).
  bool degenerate = false;
  /// Vertices are samples of a periodic curve at equally spaced parameters (A == 2).
  bool uniform_periodic = false;

  std::size_t size() const { return vertices.size(); }
};

using Loop2 = SliceLoop<2>;
using Loop3 = SliceLoop<3>;

/// Closed polyline through the given vertices in order.
inline Loop2 make_polyline(std::vector<Vec2> vertices, double t = 0.0) {
  require(vertices.size() >= 3, ErrorKind::invalid_argument, "a closed polyline needs at least 3 vertices");
  Loop2 loop;
  loop.t = t;
  const int n = static_cast<int>(vertices.size());
  loop.vertices = std::move(vertices);
  loop.cells.resize(n);
  for (int i = 0; i < n; ++i) loop.cells[i] = {i, (i + 1) % n};
  loop.degenerate = std::all_of(loop.vertices.begin(), loop.vertices.end(),
                                [&](const Vec2& p) { return p == loop.vertices.front(); });
  return loop;
}

inline Loop3 make_trimesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles, double t = 0.0) {
  Loop3 loop;
  loop.t = t;
  loop.vertices = std::move(vertices);
  loop.cells = std::move(triangles);
  loop.degenerate = !loop.vertices.empty() &&
                    std::all_of(loop.vertices.begin(), loop.vertices.end(),
                                [&](const Vec3& p) { return p == loop.vertices.front(); });
  return loop;
}

/// Reverses the orientation of a loop.
template <int A>
SliceLoop<A> reversed(SliceLoop<A> loop) {
  for (auto& c : loop.cells) std::swap(c[0], c[1]);
  return loop;
}

/// Every directed edge must be matched by its reverse (closedness with consistent orientation).
template <int A>
void check_closed(const SliceLoop<A>& loop) {
  require(!loop.cells.empty(), ErrorKind::invalid_argument, "loop has no cells");
  std::vector<std::pair<int, int>> fwd, rev;
  const int nv = static_cast<int>(loop.vertices.size());
  for (const auto& c : loop.cells) {
    for (int i = 0; i < A; ++i) {
      require(c[i] >= 0 && c[i] < nv, ErrorKind::invalid_argument, "cell index out of range");
      const int a = c[i], b = c[(i + 1) % A];
      if constexpr (A == 2) {
        if (i == 1) break;
        // A polyline is closed when every vertex has equal in- and out-degree.
        fwd.emplace_back(a, 0);
        rev.emplace_back(b, 0);
      } else {
        fwd.emplace_back(a, b);
        rev.emplace_back(b, a);
      }
    }
  }
  std::sort(fwd.begin(), fwd.end());
  std::sort(rev.begin(), rev.end());
  require(fwd == rev, ErrorKind::invalid_argument, "loop is not closed");
}

template <int A>
double distance_to_loop(const SliceLoop<A>& loop, const typename SliceLoop<A>::Point& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : loop.cells) {
    if constexpr (A == 2) {
      best = std::min(best, point_segment_distance<2>(p, loop.vertices[c[0]], loop.vertices[c[1]]));
    } else {
      best = std::min(best, point_triangle_distance(p, loop.vertices[c[0]], loop.vertices[c[1]], loop.vertices[c[2]]));
    }
  }
  return best;
}

namespace detail {

inline int round_degree(double turns, const char* what) {
  const double r = std::round(turns);
  require(std::fabs(turns - r) < 0.1, ErrorKind::consistency,
          std::string(what) + ": rounding residual " + std::to_string(std::fabs(turns - r)) + " >= 0.1");
  return static_cast<int>(r);
}

}  // namespace detail

/// Winding number by summing signed angle increments along the polyline.
inline int winding_number_2d(const Loop2& loop, const Vec2& p, double tol_boundary = 1e-9) {
  double total = 0.0;
  for (const auto& c : loop.cells) {
    const Vec2 a = loop.vertices[c[0]] - p, b = loop.vertices[c[1]] - p;
    require(point_segment_distance<2>(p, loop.vertices[c[0]], loop.vertices[c[1]]) > tol_boundary,
            ErrorKind::boundary, "point lies on the loop");
    total += std::atan2(cross(a, b), dot(a, b));
  }
  return detail::round_degree(total / (2.0 * std::numbers::pi), "winding_number_2d");
}

/// Independent winding count: signed crossings of the ray p + s(1, tau), s > 0.
/// Upward crossings (relative to the ray normal) count +1. A vertex on the ray makes the
/// count ambiguous; the second slope is then tried.
inline int ray_crossing_oracle(const Loop2& loop, const Vec2& p, double tol_boundary = 1e-9) {
  static constexpr std::array<double, 2> slopes = {1.4142135623730951 / 100.0, std::numbers::pi / 271.0};
  for (const auto& c : loop.cells)
    require(point_segment_distance<2>(p, loop.vertices[c[0]], loop.vertices[c[1]]) > tol_boundary,
            ErrorKind::boundary, "point lies on the loop");
  for (double tau : slopes) {
    const double len = std::sqrt(1.0 + tau * tau);
    const Vec2 d{1.0 / len, tau / len};
    const Vec2 nrm{-d[1], d[0]};
    int count = 0;
    bool ambiguous = false;
    for (const auto& c : loop.cells) {
      const Vec2 a = loop.vertices[c[0]] - p, b = loop.vertices[c[1]] - p;
      const double sa = dot(a, nrm), sb = dot(b, nrm);
      if ((sa < 0.0 && sb < 0.0) || (sa > 0.0 && sb > 0.0)) continue;
      if (sa == 0.0 || sb == 0.0) {
        const double da = dot(a, d), db = dot(b, d);
        if (da > 0.0 || db > 0.0) {
          ambiguous = true;
          break;
        }
        continue;
      }
      const double s = dot(a, d) + (dot(b, d) - dot(a, d)) * sa / (sa - sb);
      if (s > 0.0) count += sa < 0.0 ? 1 : -1;
    }
    if (!ambiguous) return count;
  }
  fail(ErrorKind::consistency, "ray_crossing_oracle: degenerate crossing for both slopes");
}

/// Degree of a closed oriented triangle mesh around p via Van Oosterom-Strackee solid angles.
inline int generalized_winding_3d(const Loop3& mesh, const Vec3& p, double tol_boundary = 1e-9) {
  double total = 0.0;
  for (const auto& c : mesh.cells) {
    const Vec3& a = mesh.vertices[c[0]];
    const Vec3& b = mesh.vertices[c[1]];
    const Vec3& d = mesh.vertices[c[2]];
    require(point_triangle_distance(p, a, b, d) > tol_boundary, ErrorKind::boundary, "point lies on the mesh");
    total += solid_angle(a - p, b - p, d - p);
  }
  return detail::round_degree(total / (4.0 * std::numbers::pi), "generalized_winding_3d");
}

/// Degree of f: S^1 -> S^1 from ordered samples (nonzero vectors, read as directions).
inline int degree_circle_map(std::span<const Vec2> samples) {
  require(samples.size() >= 3, ErrorKind::invalid_argument, "need at least 3 samples");
  double total = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Vec2& a = samples[k];
    const Vec2& b = samples[(k + 1) % samples.size()];
    require(norm(a) > 0.0, ErrorKind::invalid_argument, "zero sample has no direction");
    const double step = std::atan2(cross(a, b), dot(a, b));
    require(std::fabs(step) < std::numbers::pi / 2.0, ErrorKind::resolution,
            "angular gap >= pi/2 between samples " + std::to_string(k) + " and " +
                std::to_string((k + 1) % samples.size()));
    total += step;
  }
  return detail::round_degree(total / (2.0 * std::numbers::pi), "degree_circle_map");
}

/// I = sum_{y != z} w_y w_z 1[|f(y) - f(z)| > alpha0] / |y - z|^2 on the circle mesh.
/// alpha0 must lie in (0, sqrt(2 + 2/(n-1))) with n = 3 for circle maps.
inline double degree_integral_bound(std::span<const Vec2> samples, double alpha0, const CircleMesh& mesh, int n = 3) {
  require(samples.size() == mesh.size(), ErrorKind::invalid_argument, "sample count does not match mesh");
  const double upper = std::sqrt(2.0 + 2.0 / (n - 1));
  require(alpha0 > 0.0 && alpha0 < upper, ErrorKind::invalid_argument,
          "alpha0 must lie in (0, " + std::to_string(upper) + ")");
  std::vector<double> rows(samples.size(), 0.0);
  parallel_for(samples.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (j == i) continue;
      if (distance(samples[i], samples[j]) <= alpha0) continue;
      const double d = distance(mesh.vertices[i], mesh.vertices[j]);
      acc += mesh.weights[j] / (d * d);
    }
    rows[i] = mesh.weights[i] * acc;
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

/// Cell-centred grid of winding numbers. Cell index (i, j[, k]) has centre
/// origin + (idx + 1/2) h; storage is x fastest.
template <int A>
struct WindingField {
  Vec<A> origin{};
  double h = 0.0;
  std::array<int, A> dims{};
  std::vector<int> values;
  /// 1 where the cell centre is within the boundary tolerance of the loop.
  std::vector<std::uint8_t> masked;
  double tol_boundary = 0.0;

  std::size_t size() const { return values.size(); }
  std::size_t index(const std::array<int, A>& c) const {
    std::size_t idx = 0;
    for (int a = A - 1; a >= 0; --a) idx = idx * static_cast<std::size_t>(dims[a]) + static_cast<std::size_t>(c[a]);
    return idx;
  }
  std::array<int, A> cell(std::size_t idx) const {
    std::array<int, A> c{};
    for (int a = 0; a < A; ++a) {
      c[a] = static_cast<int>(idx % static_cast<std::size_t>(dims[a]));
      idx /= static_cast<std::size_t>(dims[a]);
    }
    return c;
  }
  Vec<A> center(std::size_t idx) const {
    const auto c = cell(idx);
    Vec<A> p{};
    for (int a = 0; a < A; ++a) p[a] = origin[a] + (c[a] + 0.5) * h;
    return p;
  }
  std::size_t masked_count() const { return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), 1)); }
};

struct GridBox2 {
  Vec2 origin{};
  std::array<int, 2> dims{};
};

/// Bounding box of the points inflated by pad, snapped to whole cells from its lower corner.
inline GridBox2 grid_box(std::span<const Vec2> points, double h, double pad) {
  require(h > 0.0, ErrorKind::invalid_argument, "grid spacing must be positive");
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (const auto& p : points)
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  GridBox2 box;
  for (int a = 0; a < 2; ++a) {
    box.origin[a] = lo[a] - pad;
    const double cells = std::ceil((hi[a] - lo[a] + 2.0 * pad) / h);
    require(cells < 2e5, ErrorKind::resolution, "grid too large for spacing");
    box.dims[a] = std::max(1, static_cast<int>(cells));
  }
  return box;
}

namespace detail {

/// Marks every cell whose centre is within radius of a segment (or triangle for A == 3).
template <int A>
void mark_near(const SliceLoop<A>& loop, const Vec<A>& origin, double h, const std::array<int, A>& dims, double radius,
               std::vector<std::uint8_t>& mark) {
  for (const auto& c : loop.cells) {
    Vec<A> lo, hi;
    for (int a = 0; a < A; ++a) {
      lo[a] = hi[a] = loop.vertices[c[0]][a];
      for (int q = 1; q < A; ++q) {
        lo[a] = std::min(lo[a], loop.vertices[c[q]][a]);
        hi[a] = std::max(hi[a], loop.vertices[c[q]][a]);
      }
    }
    std::array<int, A> i0, i1;
    bool empty = false;
    for (int a = 0; a < A; ++a) {
      i0[a] = std::max(0, static_cast<int>(std::floor((lo[a] - radius - origin[a]) / h - 0.5)));
      i1[a] = std::min(dims[a] - 1, static_cast<int>(std::ceil((hi[a] + radius - origin[a]) / h - 0.5)));
      if (i0[a] > i1[a]) empty = true;
    }
    if (empty) continue;
    std::array<int, A> idx = i0;
    while (true) {
      Vec<A> p;
      std::size_t flat = 0;
      for (int a = A - 1; a >= 0; --a) {
        p[a] = origin[a] + (idx[a] + 0.5) * h;
        flat = flat * static_cast<std::size_t>(dims[a]) + static_cast<std::size_t>(idx[a]);
      }
      double d;
      if constexpr (A == 2) {
        d = point_segment_distance<2>(p, loop.vertices[c[0]], loop.vertices[c[1]]);
      } else {
        d = point_triangle_distance(p, loop.vertices[c[0]], loop.vertices[c[1]], loop.vertices[c[2]]);
      }
      if (d <= radius) mark[flat] = 1;
      int a = 0;
      while (a < A && ++idx[a] > i1[a]) {
        idx[a] = i0[a];
        ++a;
      }
      if (a == A) break;
    }
  }
}

/// Winding numbers of a row of cell centres at height y by half-open scanline crossings:
/// a segment crosses when exactly one endpoint has y-coordinate <= y; upward crossings
/// to the right of a point count +1.
inline void scanline_row(const Loop2& loop, double y, double x0, double h, int nx, int* out) {
  std::vector<std::pair<double, int>> hits;
  for (const auto& c : loop.cells) {
    const Vec2& a = loop.vertices[c[0]];
    const Vec2& b = loop.vertices[c[1]];
    const bool ua = a[1] <= y, ub = b[1] <= y;
    if (ua == ub) continue;
    const double x = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
    hits.emplace_back(x, ua ? 1 : -1);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  std::size_t k = 0;
  int acc = 0;
  for (int i = nx - 1; i >= 0; --i) {
    const double x = x0 + (i + 0.5) * h;
    while (k < hits.size() && hits[k].first > x) acc += hits[k++].second;
    out[i] = acc;
  }
}

}  // namespace detail

/// Scanline winding values on every cell of the box (no masking).
inline std::vector<int> scanline_values(const Loop2& loop, const Vec2& origin, double h, const std::array<int, 2>& dims) {
  std::vector<int> values(static_cast<std::size_t>(dims[0]) * dims[1], 0);
  if (loop.degenerate) return values;
  parallel_for(static_cast<std::size_t>(dims[1]), [&](std::size_t j) {
    detail::scanline_row(loop, origin[1] + (static_cast<double>(j) + 0.5) * h, origin[0], h, dims[0],
                         values.data() + j * dims[0]);
  });
  return values;
}

/// Winding field on an explicit grid; cells within tol_boundary (default h/2) of the loop are masked.
inline WindingField<2> winding_field(const Loop2& loop, const Vec2& origin, double h, const std::array<int, 2>& dims,
                                     double tol_boundary = -1.0) {
  WindingField<2> f;
  f.origin = origin;
  f.h = h;
  f.dims = dims;
  f.tol_boundary = tol_boundary < 0.0 ? h / 2.0 : tol_boundary;
  f.values = scanline_values(loop, origin, h, dims);
  f.masked.assign(f.values.size(), 0);
  detail::mark_near<2>(loop, origin, h, dims, f.tol_boundary, f.masked);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (f.masked[i]) f.values[i] = 0;
  return f;
}

/// Winding field on the loop's bounding box inflated by max(2h, 0.1).
inline WindingField<2> winding_field(const Loop2& loop, double h) {
  const auto box = grid_box(loop.vertices, h, std::max(2.0 * h, 0.1));
  return winding_field(loop, box.origin, h, box.dims);
}

/// Generalized-winding field for a closed triangle mesh (reduced n = 4 path).
inline WindingField<3> winding_field(const Loop3& mesh, double h) {
  require(h > 0.0, ErrorKind::invalid_argument, "grid spacing must be positive");
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi = -lo;
  for (const auto& p : mesh.vertices)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  const double pad = std::max(2.0 * h, 0.1);
  WindingField<3> f;
  f.h = h;
  f.tol_boundary = h / 2.0;
  for (int a = 0; a < 3; ++a) {
    f.origin[a] = lo[a] - pad;
    f.dims[a] = std::max(1, static_cast<int>(std::ceil((hi[a] - lo[a] + 2 * pad) / h)));
  }
  const std::size_t total = static_cast<std::size_t>(f.dims[0]) * f.dims[1] * f.dims[2];
  require(total <= 20'000'000, ErrorKind::resolution, "3D winding grid too large");
  f.values.assign(total, 0);
  f.masked.assign(total, 0);
  if (mesh.degenerate) return f;
  detail::mark_near<3>(mesh, f.origin, h, f.dims, f.tol_boundary, f.masked);
  parallel_for(total, [&](std::size_t i) {
    if (f.masked[i]) return;
    double s = 0.0;
    const Vec3 p = f.center(i);
    for (const auto& c : mesh.cells)
      s += solid_angle(mesh.vertices[c[0]] - p, mesh.vertices[c[1]] - p, mesh.vertices[c[2]] - p);
    f.values[i] = static_cast<int>(std::lround(s / (4.0 * std::numbers::pi)));
  });
  return f;
}

}  // namespace kakeya
