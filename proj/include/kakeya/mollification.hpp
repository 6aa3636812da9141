#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "kakeya/error.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/position_map.hpp"
#include "kakeya/sphere_geom.hpp"
#include "kakeya/vec.hpp"

namespace kakeya {

/// Smooth bump exp(-1/(1-r^2)) on r < 1, zero otherwise.
inline double bump_profile(double r) {
  if (r >= 1.0) return 0.0;
  const double q = 1.0 - r * r;
  return std::exp(-1.0 / q);
}

/// Normalized spherical mollifier at scale epsilon on a fixed mesh.
///
/// Row i holds (j, a_ij) with a_ij = w_j rho((x_i - x_j)/eps) / sum_k w_k rho((x_i - x_k)/eps),
/// so sum_j a_ij = 1 for every vertex.
template <int Dim>
struct Kernel {
  double epsilon = 0.0;
  /// eps^Dim / integral of rho((x - y)/eps) dy, averaged over vertices.
  double d_epsilon = 0.0;
  double d_epsilon_min = 0.0;
  double d_epsilon_max = 0.0;
  std::vector<std::vector<std::pair<int, double>>> rows;
  /// Bump samples at r = k/(profile.size()-1).
  std::vector<double> profile;
  const SphereMesh<Dim>* mesh = nullptr;

  /// Largest |sum_j a_ij - 1| over vertices.
  double mass_error() const {
    double e = 0.0;
    for (const auto& row : rows) {
      double s = 0.0;
      for (const auto& [j, a] : row) s += a;
      e = std::max(e, std::fabs(s - 1.0));
    }
    return e;
  }
};

template <int Dim>
Kernel<Dim> mollifier_kernel(double epsilon, const SphereMesh<Dim>& mesh) {
  require(epsilon > 0.0 && epsilon <= 0.3, ErrorKind::invalid_argument, "epsilon must lie in (0, 0.3]");
  require(mesh.spacing <= epsilon / 4.0, ErrorKind::resolution,
          "mesh spacing " + std::to_string(mesh.spacing) + " exceeds epsilon/4; kernel under-resolved");
  Kernel<Dim> k;
  k.epsilon = epsilon;
  k.mesh = &mesh;
  k.profile.resize(257);
  for (std::size_t i = 0; i < k.profile.size(); ++i)
    k.profile[i] = bump_profile(static_cast<double>(i) / static_cast<double>(k.profile.size() - 1));

  const std::size_t n = mesh.size();
  k.rows.resize(n);
  std::vector<double> d(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    auto& row = k.rows[i];
    double raw = 0.0;
    auto add = [&](std::size_t j) {
      const double r = distance(mesh.vertices[i], mesh.vertices[j]) / epsilon;
      if (r >= 1.0) return;
      const double w = mesh.weights[j] * bump_profile(r);
      row.emplace_back(static_cast<int>(j), w);
      raw += w;
    };
    if constexpr (Dim == 1) {
      // Chord < eps implies index offset below N*asin(eps/2)/pi + 1.
      const long N = static_cast<long>(n);
      const long reach = std::min<long>(N / 2, static_cast<long>(N * std::asin(epsilon / 2.0) / std::numbers::pi) + 2);
      for (long o = -reach; o <= reach; ++o) add(static_cast<std::size_t>(((static_cast<long>(i) + o) % N + N) % N));
    } else {
      for (std::size_t j = 0; j < n; ++j) add(j);
    }
    for (auto& e : row) e.second /= raw;
    d[i] = std::pow(epsilon, Dim) / raw;
  });
  double sum = 0.0;
  k.d_epsilon_min = d.front();
  k.d_epsilon_max = d.front();
  for (double x : d) {
    sum += x;
    k.d_epsilon_min = std::min(k.d_epsilon_min, x);
    k.d_epsilon_max = std::max(k.d_epsilon_max, x);
  }
  k.d_epsilon = sum / static_cast<double>(n);
  return k;
}

/// Componentwise spherical convolution of per-vertex samples.
template <int Dim, std::size_t M>
std::vector<Vec<M>> mollify_on_sphere(std::span<const Vec<M>> values, const Kernel<Dim>& kernel) {
  require(values.size() == kernel.rows.size(), ErrorKind::invalid_argument, "value count does not match kernel");
  std::vector<Vec<M>> out(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    Vec<M> acc{};
    for (const auto& [j, a] : kernel.rows[i]) acc += a * values[j];
    out[i] = acc;
  });
  return out;
}

template <int Dim, std::size_t M>
std::vector<Vec<M>> mollify_on_sphere(const std::vector<Vec<M>>& values, const Kernel<Dim>& kernel) {
  return mollify_on_sphere<Dim, M>(std::span<const Vec<M>>(values), kernel);
}

/// Samples of the map on the mesh vertices (the restriction to the boundary sphere for ball maps).
template <int D, int Dim>
std::vector<Vec<D>> restrict_to_sphere(const PositionMap<D>& map, const SphereMesh<Dim>& mesh) {
  static_assert(Dim + 1 == D, "mesh must be the boundary sphere of the map domain");
  std::vector<Vec<D>> out(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) out[i] = map(mesh.vertices[i]);
  return out;
}

template <int D, int Dim>
std::vector<Vec<D>> mollify_on_sphere(const PositionMap<D>& map, double epsilon, const SphereMesh<Dim>& mesh) {
  const auto kernel = mollifier_kernel(epsilon, mesh);
  return mollify_on_sphere<Dim, D>(restrict_to_sphere(map, mesh), kernel);
}

/// Largest finite-difference gradient norm of per-vertex samples.
/// S^1: central differences |f(k+1) - f(k-1)| / |x(k+1) - x(k-1)|.
/// S^2: least-squares tangent Jacobian over each vertex's 1-ring, spectral norm.
template <int Dim, std::size_t M>
double gradient_sup(std::span<const Vec<M>> f, const SphereMesh<Dim>& mesh) {
  require(f.size() == mesh.size(), ErrorKind::invalid_argument, "value count does not match mesh");
  const std::size_t n = mesh.size();
  double best = 0.0;
  if constexpr (Dim == 1) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t a = (k + 1) % n, b = (k + n - 1) % n;
      best = std::max(best, distance(f[a], f[b]) / distance(mesh.vertices[a], mesh.vertices[b]));
    }
  } else {
    std::vector<std::vector<int>> ring(n);
    for (const auto& [i, j] : mesh.edges) {
      ring[i].push_back(j);
      ring[j].push_back(i);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& x = mesh.vertices[i];
      const Vec3 a = std::fabs(x[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      const Vec3 e1 = normalized(cross(x, a));
      const Vec3 e2 = cross(x, e1);
      // Normal equations for J (M x 2): sum (df)(dp)^T = J sum (dp)(dp)^T.
      double g11 = 0, g12 = 0, g22 = 0;
      std::vector<std::array<double, 2>> rhs(M, {0.0, 0.0});
      for (int j : ring[i]) {
        const Vec3 d = mesh.vertices[j] - x;
        const double p1 = dot(d, e1), p2 = dot(d, e2);
        g11 += p1 * p1;
        g12 += p1 * p2;
        g22 += p2 * p2;
        for (std::size_t m = 0; m < M; ++m) {
          const double df = f[j][m] - f[i][m];
          rhs[m][0] += df * p1;
          rhs[m][1] += df * p2;
        }
      }
      const double det = g11 * g22 - g12 * g12;
      if (det <= 0.0) continue;
      // J^T J entries for the spectral norm.
      double a11 = 0, a12 = 0, a22 = 0;
      for (std::size_t m = 0; m < M; ++m) {
        const double j1 = (rhs[m][0] * g22 - rhs[m][1] * g12) / det;
        const double j2 = (rhs[m][1] * g11 - rhs[m][0] * g12) / det;
        a11 += j1 * j1;
        a12 += j1 * j2;
        a22 += j2 * j2;
      }
      const double tr = a11 + a22, disc = std::sqrt(std::max(0.0, (a11 - a22) * (a11 - a22) + 4 * a12 * a12));
      best = std::max(best, std::sqrt(0.5 * (tr + disc)));
    }
  }
  return best;
}

struct MollificationBounds {
  double epsilon = 0.0;
  double alpha = 0.0;
  double sup_deviation = 0.0;
  double grad_sup = 0.0;
  /// sup_deviation / eps^alpha
  double sup_ratio = 0.0;
  /// grad_sup / eps^(alpha - 1)
  double grad_ratio = 0.0;
  double d_epsilon = 0.0;
};

template <int Dim, std::size_t M>
MollificationBounds mollification_bounds(std::span<const Vec<M>> values, const Kernel<Dim>& kernel, double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::invalid_argument, "alpha must lie in (0, 1]");
  const auto smooth = mollify_on_sphere<Dim, M>(values, kernel);
  MollificationBounds b;
  b.epsilon = kernel.epsilon;
  b.alpha = alpha;
  b.d_epsilon = kernel.d_epsilon;
  for (std::size_t i = 0; i < values.size(); ++i) b.sup_deviation = std::max(b.sup_deviation, distance(values[i], smooth[i]));
  b.grad_sup = gradient_sup<Dim, M>(std::span<const Vec<M>>(smooth), *kernel.mesh);
  b.sup_ratio = b.sup_deviation / std::pow(kernel.epsilon, alpha);
  b.grad_ratio = b.grad_sup / std::pow(kernel.epsilon, alpha - 1.0);
  return b;
}

template <int D, int Dim>
MollificationBounds mollification_bounds(const PositionMap<D>& map, double epsilon, double alpha,
                                         const SphereMesh<Dim>& mesh) {
  const auto kernel = mollifier_kernel(epsilon, mesh);
  const auto values = restrict_to_sphere(map, mesh);
  return mollification_bounds<Dim, D>(std::span<const Vec<D>>(values), kernel, alpha);
}

}  // namespace kakeya
