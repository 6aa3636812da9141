#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kakeya/error.hpp"
#include "kakeya/vec.hpp"

namespace kakeya {

/// Discretized unit sphere S^Dim embedded in R^(Dim+1).
///
/// Dim == 1: vertices at equally spaced angles, counterclockwise, cells are the
/// segments (k, k+1 mod N); weights are the uniform trapezoid weights 2*pi/N.
/// Dim == 2: subdivided icosahedron projected onto the sphere, triangles oriented with
/// outward normals; each vertex carries one third of the spherical area of every
/// incident triangle, so the weights sum to 4*pi up to rounding.
template <int Dim>
struct SphereMesh {
  static_assert(Dim == 1 || Dim == 2, "only S^1 and S^2 are supported");
  static constexpr int ambient = Dim + 1;
  using Point = Vec<Dim + 1>;
  using Cell = std::array<int, Dim + 1>;

  std::vector<Point> vertices;
  std::vector<Cell> cells;
  std::vector<double> weights;
  /// Undirected edges (i < j) of the cell complex.
  std::vector<std::pair<int, int>> edges;
  /// Longest chordal edge length.
  double spacing = 0.0;
  /// Icosahedral subdivision level (Dim == 2 only).
  int level = 0;

  std::size_t size() const { return vertices.size(); }

  /// Angle parameter of vertex k (Dim == 1 only).
  double angle(std::size_t k) const
    requires(Dim == 1)
  {
    return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(vertices.size());
  }
};

using CircleMesh = SphereMesh<1>;
using Sphere2Mesh = SphereMesh<2>;

inline constexpr double sphere_measure(int dim) {
  return dim == 1 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
}

/// Signed solid angle of the triangle (a, b, c) seen from the origin.
inline double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = norm(a), lb = norm(b), lc = norm(c);
  const double num = triple(a, b, c);
  const double den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
  return 2.0 * std::atan2(num, den);
}

namespace detail {

inline CircleMesh make_circle(int n) {
  CircleMesh m;
  m.vertices.resize(n);
  m.cells.resize(n);
  m.weights.assign(n, 2.0 * std::numbers::pi / n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    m.vertices[k] = {std::cos(a), std::sin(a)};
    m.cells[k] = {k, (k + 1) % n};
    m.edges.emplace_back(std::min(k, (k + 1) % n), std::max(k, (k + 1) % n));
  }
  m.spacing = 2.0 * std::sin(std::numbers::pi / n);
  return m;
}

inline Sphere2Mesh make_icosphere(int level) {
  Sphere2Mesh m;
  m.level = level;
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p = normalized(p);
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back(normalized(v[a] + v[b]));
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int a = mid(t[0], t[1]), b = mid(t[1], t[2]), c = mid(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  m.vertices = std::move(v);
  m.cells = std::move(f);
  m.weights.assign(m.vertices.size(), 0.0);
  std::map<std::pair<int, int>, int> edge_set;
  for (const auto& t : m.cells) {
    const double area = std::fabs(solid_angle(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]));
    for (int i = 0; i < 3; ++i) {
      m.weights[t[i]] += area / 3.0;
      const auto e = std::minmax(t[i], t[(i + 1) % 3]);
      if (edge_set.emplace(e, 0).second) {
        m.edges.emplace_back(e.first, e.second);
        m.spacing = std::max(m.spacing, distance(m.vertices[e.first], m.vertices[e.second]));
      }
    }
  }
  return m;
}

}  // namespace detail

/// Circle mesh with exactly `resolution` vertices.
inline CircleMesh sample_circle(int resolution) {
  require(resolution >= 4, ErrorKind::invalid_argument, "circle mesh needs at least 4 vertices");
  return detail::make_circle(resolution);
}

/// Icosphere with the smallest subdivision level whose vertex count 10*4^l+2 reaches
/// `resolution`.
inline Sphere2Mesh sample_sphere2(int resolution) {
  require(resolution >= 8, ErrorKind::invalid_argument, "sphere mesh resolution must be >= 8");
  int level = 0;
  while (10 * (1L << (2 * level)) + 2 < resolution) ++level;
  require(level <= 8, ErrorKind::invalid_argument, "sphere mesh resolution too large");
  return detail::make_icosphere(level);
}

/// Typed entry point: sample_sphere<1>(n) or sample_sphere<2>(n).
template <int Dim>
SphereMesh<Dim> sample_sphere(int resolution) {
  if constexpr (Dim == 1) {
    return sample_circle(resolution);
  } else {
    return sample_sphere2(resolution);
  }
}

/// Runtime-dimension check used by callers that receive the dimension as data.
inline void check_sphere_dim(int dim) {
  require(dim == 1 || dim == 2, ErrorKind::dimension,
          "unsupported sphere dimension " + std::to_string(dim) + " (expected 1 or 2)");
}

using AnySphereMesh = std::variant<CircleMesh, Sphere2Mesh>;

/// Runtime-dimension form; rejects anything but S^1 and S^2.
inline AnySphereMesh sample_sphere(int dim, int resolution) {
  check_sphere_dim(dim);
  if (dim == 1) return sample_circle(resolution);
  return sample_sphere2(resolution);
}

/// Great-circle distance between unit vectors, in [0, pi].
template <std::size_t N>
double geodesic_distance(const Vec<N>& u, const Vec<N>& v) {
  require(std::fabs(norm(u) - 1.0) <= 1e-9 && std::fabs(norm(v) - 1.0) <= 1e-9,
          ErrorKind::invalid_argument, "geodesic_distance expects unit vectors");
  // atan2 form keeps full precision near 0 and pi; equals arccos of the clamped dot.
  const double s = [&] {
    if constexpr (N == 3) {
      return norm(cross(u, v));
    } else if constexpr (N == 2) {
      return std::fabs(cross(u, v));
    } else {
      const double d = std::clamp(dot(u, v), -1.0, 1.0);
      return std::sqrt(std::max(0.0, 1.0 - d * d));
    }
  }();
  return std::atan2(s, dot(u, v));
}

template <int Dim>
double integrate_over_sphere(std::span<const double> field, const SphereMesh<Dim>& mesh) {
  require(field.size() == mesh.size(), ErrorKind::invalid_argument,
          "field length " + std::to_string(field.size()) + " does not match vertex count " +
              std::to_string(mesh.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) sum += field[i] * mesh.weights[i];
  return sum;
}

}  // namespace kakeya
