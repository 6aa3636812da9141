#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "kakeya/error.hpp"
#include "kakeya/mollification.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/position_map.hpp"
#include "kakeya/sphere_geom.hpp"
#include "kakeya/vec.hpp"
#include "kakeya/winding.hpp"

namespace kakeya {

/// Volume of the unit ball B^(n-1): the leading coefficient of SV(t) under the CCW convention.
inline double unit_ball_volume(int n) {
  require(n == 3 || n == 4, ErrorKind::dimension, "n must be 3 or 4");
  return n == 3 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
}

namespace detail {

template <std::size_t A>
bool all_equal(const std::vector<Vec<A>>& pts) {
  return std::all_of(pts.begin(), pts.end(), [&](const Vec<A>& p) { return p == pts.front(); });
}

}  // namespace detail

/// gamma_t(v) = c(v) + t v on the mesh vertices, with c replaced by its mollification when a
/// kernel is given. D = n - 1 is the slice dimension; the mesh is S^(D-1).
template <int D>
SliceLoop<D> slice_loop(const PositionMap<D>& map, double t, const SphereMesh<D - 1>& mesh,
                        const Kernel<D - 1>* kernel = nullptr) {
  require(t >= 0.0 && t <= 1.0, ErrorKind::invalid_argument, "t must lie in [0, 1]");
  require(map.domain() == DomainKind::ball, ErrorKind::invalid_argument, "slices need a ball-domain map");
  auto c = restrict_to_sphere(map, mesh);
  if (kernel != nullptr) {
    require(kernel->rows.size() == mesh.size(), ErrorKind::invalid_argument, "kernel built on a different mesh");
    c = mollify_on_sphere<D - 1, D>(std::span<const Vec<D>>(c), *kernel);
  }
  SliceLoop<D> loop;
  loop.t = t;
  loop.vertices.resize(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) loop.vertices[i] = c[i] + t * mesh.vertices[i];
  loop.cells = mesh.cells;
  loop.degenerate = detail::all_equal(loop.vertices);
  loop.uniform_periodic = (D == 2);
  return loop;
}

template <int D>
SliceLoop<D> slice_loop(const PositionMap<D>& map, double t, const SphereMesh<D - 1>& mesh,
                        std::optional<double> epsilon) {
  if (!epsilon) return slice_loop(map, t, mesh);
  const auto kernel = mollifier_kernel(*epsilon, mesh);
  return slice_loop(map, t, mesh, &kernel);
}

/// Shoelace area (A == 2) or divergence-theorem volume (A == 3); positive for CCW / outward.
template <int A>
double signed_volume_stokes(const SliceLoop<A>& loop) {
  if (loop.degenerate) return 0.0;
  check_closed(loop);
  double s = 0.0;
  if constexpr (A == 2) {
    for (const auto& c : loop.cells) s += cross(loop.vertices[c[0]], loop.vertices[c[1]]);
    return 0.5 * s;
  } else {
    for (const auto& c : loop.cells) s += triple(loop.vertices[c[0]], loop.vertices[c[1]], loop.vertices[c[2]]);
    return s / 6.0;
  }
}

/// Area enclosed by the trigonometric interpolant of a uniformly sampled periodic loop:
/// pi * sum_m m |Z_m|^2 over the discrete Fourier coefficients of x + iy. The Nyquist mode,
/// split symmetrically, contributes nothing. Exact for band-limited curves.
inline double signed_volume_trigonometric(const Loop2& loop) {
  if (loop.degenerate) return 0.0;
  require(loop.uniform_periodic, ErrorKind::invalid_argument, "loop is not a uniform periodic sampling");
  const std::size_t n = loop.vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    require(loop.cells[i][0] == static_cast<int>(i) && loop.cells[i][1] == static_cast<int>((i + 1) % n),
            ErrorKind::invalid_argument, "loop cells are not in sample order");
  std::vector<std::complex<double>> z(n), spec;
  for (std::size_t i = 0; i < n; ++i) z[i] = {loop.vertices[i][0], loop.vertices[i][1]};
  Eigen::FFT<double> fft;
  fft.fwd(spec, z);
  double s = 0.0;
  const long N = static_cast<long>(n);
  for (long k = 1; k < N; ++k) {
    const long m = k <= (N - 1) / 2 ? k : (2 * k == N ? 0 : k - N);
    s += static_cast<double>(m) * std::norm(spec[k]);
  }
  return std::numbers::pi * s / static_cast<double>(N * N);
}

/// Grid integral of the winding field.
struct GridVolume {
  double value = 0.0;
  double h = 0.0;
  std::size_t masked_cells = 0;
  std::size_t cells = 0;
};

inline GridVolume signed_volume_grid(const Loop2& loop, double h) {
  require(h > 0.0, ErrorKind::invalid_argument, "grid spacing must be positive");
  GridVolume g;
  g.h = h;
  if (loop.degenerate) return g;
  const auto f = winding_field(loop, h);
  long sum = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.masked[i]) sum += f.values[i];
  g.value = static_cast<double>(sum) * h * h;
  g.masked_cells = f.masked_count();
  g.cells = f.size();
  return g;
}

inline GridVolume signed_volume_grid(const Loop3& mesh, double h) {
  GridVolume g;
  g.h = h;
  if (mesh.degenerate) return g;
  const auto f = winding_field(mesh, h);
  long sum = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.masked[i]) sum += f.values[i];
  g.value = static_cast<double>(sum) * h * h * h;
  g.masked_cells = f.masked_count();
  g.cells = f.size();
  return g;
}

enum class SvMethod { stokes, spectral, grid };

inline std::string_view to_string(SvMethod m) {
  switch (m) {
    case SvMethod::stokes: return "stokes";
    case SvMethod::spectral: return "spectral";
    case SvMethod::grid: return "grid";
  }
  return "?";
}

inline SvMethod parse_sv_method(std::string_view s) {
  if (s == "stokes") return SvMethod::stokes;
  if (s == "spectral") return SvMethod::spectral;
  if (s == "grid") return SvMethod::grid;
  fail(ErrorKind::invalid_argument, "unknown signed-volume method '" + std::string(s) + "'");
}

struct SVProfile {
  std::vector<double> t_values;
  std::vector<double> sv_values;
  SvMethod method = SvMethod::stokes;
  std::size_t mesh_resolution = 0;
  double grid_spacing = 0.0;
  std::optional<double> epsilon;
  /// Masked cells per slice (grid method only).
  std::vector<std::size_t> masked_cells;
};

inline std::vector<double> uniform_t_grid(int steps) {
  require(steps >= 2, ErrorKind::invalid_argument, "t grid needs at least 2 points");
  std::vector<double> t(steps);
  for (int i = 0; i < steps; ++i) t[i] = static_cast<double>(i) / (steps - 1);
  return t;
}

template <int D>
SVProfile sweep_signed_volume(const PositionMap<D>& map, std::span<const double> t_grid, const SphereMesh<D - 1>& mesh,
                              std::optional<double> epsilon, SvMethod method, double h = 0.01) {
  const int n = D + 1;
  require(t_grid.size() >= static_cast<std::size_t>(n), ErrorKind::invalid_argument, "t grid needs at least n points");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    require(t_grid[i] >= 0.0 && t_grid[i] <= 1.0, ErrorKind::invalid_argument, "t values must lie in [0, 1]");
    if (i > 0) require(t_grid[i] > t_grid[i - 1], ErrorKind::invalid_argument, "t values must increase strictly");
  }
  if constexpr (D == 3) require(method != SvMethod::spectral, ErrorKind::invalid_argument, "spectral method is 2D only");
  std::optional<Kernel<D - 1>> kernel;
  if (epsilon) kernel = mollifier_kernel(*epsilon, mesh);
  SVProfile p;
  p.t_values.assign(t_grid.begin(), t_grid.end());
  p.sv_values.assign(t_grid.size(), 0.0);
  p.masked_cells.assign(t_grid.size(), 0);
  p.method = method;
  p.mesh_resolution = mesh.size();
  p.grid_spacing = method == SvMethod::grid ? h : 0.0;
  p.epsilon = epsilon;
  // c (and its mollification) do not depend on t; compute once.
  auto c = restrict_to_sphere(map, mesh);
  if (kernel) c = mollify_on_sphere<D - 1, D>(std::span<const Vec<D>>(c), *kernel);
  parallel_for(t_grid.size(), [&](std::size_t k) {
    SliceLoop<D> loop;
    loop.t = t_grid[k];
    loop.vertices.resize(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) loop.vertices[i] = c[i] + t_grid[k] * mesh.vertices[i];
    loop.cells = mesh.cells;
    loop.degenerate = detail::all_equal(loop.vertices);
    loop.uniform_periodic = (D == 2);
    if (method == SvMethod::stokes) {
      p.sv_values[k] = signed_volume_stokes(loop);
    } else if (method == SvMethod::grid) {
      const auto g = signed_volume_grid(loop, h);
      p.sv_values[k] = g.value;
      p.masked_cells[k] = g.masked_cells;
    } else {
      if constexpr (D == 2) p.sv_values[k] = signed_volume_trigonometric(loop);
    }
  });
  return p;
}

struct PolyFit {
  /// Constant term first.
  std::vector<double> coefficients;
  double residual_rms = 0.0;
  double leading_coefficient = 0.0;
  double condition_number = 0.0;
};

/// Least-squares polynomial of degree n-1 through the profile.
inline PolyFit fit_sv_polynomial(const SVProfile& profile, int n) {
  require(n == 3 || n == 4, ErrorKind::dimension, "n must be 3 or 4");
  const std::size_t m = profile.t_values.size();
  require(profile.sv_values.size() == m, ErrorKind::invalid_argument, "profile arrays differ in length");
  require(m >= static_cast<std::size_t>(2 * n), ErrorKind::invalid_argument, "profile needs at least 2n points");
  Eigen::MatrixXd V(m, n);
  Eigen::VectorXd y(m);
  for (std::size_t i = 0; i < m; ++i) {
    double p = 1.0;
    for (int j = 0; j < n; ++j) {
      V(i, j) = p;
      p *= profile.t_values[i];
    }
    y(i) = profile.sv_values[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
  const auto& sv = svd.singularValues();
  PolyFit fit;
  fit.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  require(fit.condition_number < 1e8, ErrorKind::consistency, "polynomial fit is ill-conditioned; t grid too clustered");
  const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(y);
  fit.coefficients.assign(coef.data(), coef.data() + n);
  fit.leading_coefficient = coef(n - 1);
  fit.residual_rms = std::sqrt((V * coef - y).squaredNorm() / static_cast<double>(m));
  return fit;
}

/// min over lower-order coefficients of int_0^1 |lead t^m + e(t)| dt, m = n - 1.
/// The minimiser is the shifted Chebyshev polynomial of the second kind, giving lead * 4^(-m).
inline double kappa_lower_bound(double lead, int n) { return std::fabs(lead) * std::pow(4.0, -(n - 1)); }

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

struct LowerBoundCheck {
  double integral_abs_sv = 0.0;
  double kappa = 0.0;
  bool passed = false;
};

inline LowerBoundCheck sv_lower_bound_check(const PolyFit& fit, const SVProfile& profile, int n) {
  const double expected = unit_ball_volume(n);
  require(std::fabs(fit.leading_coefficient - expected) <= 0.1 * expected, ErrorKind::consistency,
          "leading coefficient " + std::to_string(fit.leading_coefficient) +
              " is not within 10% of the unit-ball volume; orientation or resolution problem");
  LowerBoundCheck r;
  std::vector<double> a(profile.sv_values.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::fabs(profile.sv_values[i]);
  r.integral_abs_sv = trapezoid(profile.t_values, a);
  r.kappa = kappa_lower_bound(expected, n);
  r.passed = r.integral_abs_sv >= 0.95 * r.kappa;
  return r;
}

/// Polyline length (A == 2) or triangle-area sum (A == 3).
template <int A>
double loop_area(const SliceLoop<A>& loop) {
  double s = 0.0;
  for (const auto& c : loop.cells) {
    if constexpr (A == 2) {
      s += distance(loop.vertices[c[0]], loop.vertices[c[1]]);
    } else {
      s += 0.5 * norm(cross(loop.vertices[c[1]] - loop.vertices[c[0]], loop.vertices[c[2]] - loop.vertices[c[0]]));
    }
  }
  return s;
}

/// Measure of the grid cells whose centre is within r of the loop.
inline double neighborhood_measure(const Loop2& loop, double r, double h) {
  require(r > 0.0, ErrorKind::invalid_argument, "radius must be positive");
  require(h > 0.0 && h <= r / 4.0, ErrorKind::resolution, "grid spacing must be <= r/4");
  const auto box = grid_box(loop.vertices, h, r + h);
  std::vector<std::uint8_t> mark(static_cast<std::size_t>(box.dims[0]) * box.dims[1], 0);
  if (loop.degenerate) {
    Loop2 point = loop;
    point.cells = {{0, 0}};
    detail::mark_near<2>(point, box.origin, h, box.dims, r, mark);
  } else {
    detail::mark_near<2>(loop, box.origin, h, box.dims, r, mark);
  }
  const auto hit = std::count(mark.begin(), mark.end(), 1);
  return static_cast<double>(hit) * h * h;
}

struct IsoperimetricResult {
  double lhs = 0.0;
  double rhs_area = 0.0;
  double ratio = 0.0;
  double threshold = 0.0;
  bool passed = true;
};

/// Sharp planar constant 1/sqrt(4 pi); in R^3, (36 pi)^(-1/3).
inline double isoperimetric_constant(int A) {
  return A == 2 ? 1.0 / std::sqrt(4.0 * std::numbers::pi) : std::cbrt(1.0 / (36.0 * std::numbers::pi));
}

template <int A>
IsoperimetricResult isoperimetric_check(const SliceLoop<A>& loop, double h) {
  IsoperimetricResult r;
  r.threshold = isoperimetric_constant(A) + 0.02;
  if (loop.degenerate) return r;
  const auto f = winding_field(loop, h);
  const double q = static_cast<double>(A) / (A - 1);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.masked[i] && f.values[i] != 0) s += std::pow(std::abs(f.values[i]), q);
  r.lhs = std::pow(s * std::pow(h, A), 1.0 / q);
  r.rhs_area = loop_area(loop);
  r.ratio = r.rhs_area > 0.0 ? r.lhs / r.rhs_area : 0.0;
  r.passed = r.ratio <= r.threshold;
  return r;
}

}  // namespace kakeya
