#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "kakeya/error.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/position_map.hpp"
#include "kakeya/sphere_geom.hpp"
#include "kakeya/vec.hpp"

namespace kakeya {

/// Log-log fit of the oscillation modulus osc(h) ~ C h^alpha.
struct HolderFit {
  /// Empty when the map has zero oscillation at every scale (degenerate / unbounded exponent).
  std::optional<double> exponent;
  double constant = 0.0;
  /// Slope of the least-squares fit before clamping to (0, 1].
  double raw_slope = 0.0;
  double residual = 0.0;
  /// False when the log-log residual exceeds 0.2.
  bool reliable = true;
  std::vector<double> scales;
  std::vector<double> oscillation;
  /// sup |c| over the sampled points.
  double sup_norm = 0.0;

  bool degenerate() const { return !exponent.has_value(); }
};

struct SlobodeckijValue {
  double theta = 0.0;
  double p = 0.0;
  double seminorm = 0.0;
  /// Pairs closer than this chordal distance were excluded from the double sum.
  double cutoff = 0.0;
};

struct RegularityReport {
  HolderFit holder;
  double lipschitz_net_constant = 0.0;
  std::vector<SlobodeckijValue> slobodeckij_values;
};

/// Default dyadic scales 2^-11 .. 2^-3.
inline std::vector<double> default_holder_scales() {
  std::vector<double> s;
  for (int j = 11; j >= 3; --j) s.push_back(std::exp2(-j));
  return s;
}

namespace detail {

inline void check_scales(std::span<const double> scales) {
  require(scales.size() >= 6, ErrorKind::invalid_argument, "Hoelder fit needs at least 6 scales");
  for (double h : scales) {
    const double l = std::log2(h);
    require(std::fabs(l - std::round(l)) < 1e-12, ErrorKind::invalid_argument, "scales must be dyadic");
    require(h > std::exp2(-16) && h < 1.0, ErrorKind::invalid_argument, "scales must lie in (2^-16, 1)");
  }
}

/// Fit log osc = a log h + b over the positive entries.
inline void fit_loglog(HolderFit& fit) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < fit.scales.size(); ++i) {
    if (fit.oscillation[i] > 0.0) {
      xs.push_back(std::log(fit.scales[i]));
      ys.push_back(std::log(fit.oscillation[i]));
    }
  }
  if (xs.size() < 2) {
    fit.exponent.reset();
    fit.constant = 0.0;
    fit.residual = 0.0;
    fit.reliable = false;
    return;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (slope * xs[i] + intercept);
    rss += r * r;
  }
  fit.raw_slope = slope;
  fit.exponent = std::clamp(slope, 1e-6, 1.0);
  fit.constant = std::exp(intercept);
  fit.residual = std::sqrt(rss / m);
  fit.reliable = fit.residual <= 0.2;
}

}  // namespace detail

/// Oscillation-based Hoelder estimate on the boundary sphere of the map's domain
/// (S^(n-2) for ball maps, S^(n-1) for sphere maps).
///
/// For each base point x on a uniform sample of `resolution` points and each lag s in
/// (h/2, h] (four geometric lags per octave), the pair (x, x rotated by s) contributes
/// |c(x) - c(x')| to osc(h); osc is then made monotone in h.
template <int D>
HolderFit holder_estimate(const PositionMap<D>& map, std::span<const double> scales, int resolution = 1 << 14) {
  static_assert(D == 2 || D == 3, "boundary sphere must be S^1 or S^2");
  detail::check_scales(scales);
  std::vector<double> sorted(scales.begin(), scales.end());
  std::sort(sorted.begin(), sorted.end());

  HolderFit fit;
  fit.scales = sorted;
  fit.oscillation.assign(sorted.size(), 0.0);

  std::vector<Vec<D>> base;
  std::vector<std::array<Vec<D>, 4>> tangents;
  if constexpr (D == 2) {
    const auto mesh = sample_circle(resolution);
    base = mesh.vertices;
    require(2.0 * std::numbers::pi / resolution <= sorted.front(), ErrorKind::resolution,
            "sample spacing is coarser than the smallest scale");
  } else {
    const auto mesh = sample_sphere2(resolution);
    base = mesh.vertices;
    for (const auto& x : base) {
      const Vec3 a = std::fabs(x[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      const Vec3 e1 = normalized(cross(x, a));
      const Vec3 e2 = cross(x, e1);
      tangents.push_back({e1, e2, -1.0 * e1, -1.0 * e2});
    }
  }
  std::vector<Vec<D>> values(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) values[i] = map(base[i]);
  for (const auto& v : values) fit.sup_norm = std::max(fit.sup_norm, norm(v));

  std::vector<double> per_scale(sorted.size(), 0.0);
  parallel_for(sorted.size(), [&](std::size_t si) {
    double best = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double chord = sorted[si] * std::exp2(-0.25 * j);
      const double angle = 2.0 * std::asin(std::min(1.0, chord / 2.0));
      const double ca = std::cos(angle), sa = std::sin(angle);
      for (std::size_t i = 0; i < base.size(); ++i) {
        Vec<D> y;
        if constexpr (D == 2) {
          y = {ca * base[i][0] - sa * base[i][1], sa * base[i][0] + ca * base[i][1]};
          best = std::max(best, distance(map(y), values[i]));
        } else {
          for (const auto& t : tangents[i]) {
            y = ca * base[i] + sa * t;
            best = std::max(best, distance(map(y), values[i]));
          }
        }
      }
    }
    per_scale[si] = best;
  });
  double running = 0.0;
  for (std::size_t si = 0; si < sorted.size(); ++si) {
    running = std::max(running, per_scale[si]);
    fit.oscillation[si] = running;
  }
  if (running <= 1e-300) {
    fit.exponent.reset();
    fit.constant = 0.0;
    fit.reliable = false;
    return fit;
  }
  detail::fit_loglog(fit);
  return fit;
}

template <int D>
HolderFit holder_estimate(const PositionMap<D>& map) {
  const auto s = default_holder_scales();
  return holder_estimate(map, std::span<const double>(s));
}

/// Double-sum quadrature of the Sobolev-Slobodeckij seminorm
///   [f]_{theta,p} = ( sum_{x != y} w_x w_y |f(x) - f(y)|^p / |x - y|^(theta p + dim) )^(1/p)
/// with chordal |x - y| and pairs closer than one mesh spacing excluded.
template <int Dim, int M>
SlobodeckijValue slobodeckij_seminorm(std::span<const Vec<M>> values, double theta, double p,
                                      const SphereMesh<Dim>& mesh) {
  require(theta > 0.0 && theta < 1.0, ErrorKind::invalid_argument, "theta must lie in (0, 1)");
  require(p >= 1.0, ErrorKind::invalid_argument, "p must be >= 1");
  require(values.size() == mesh.size(), ErrorKind::invalid_argument, "value count does not match mesh");
  require(mesh.size() >= 64, ErrorKind::resolution, "Slobodeckij quadrature needs at least 64 vertices");
  // Spacing of the uniform circle is exact; a relative margin keeps nearest neighbours in.
  const double cutoff = (Dim == 1 ? mesh.spacing : 0.5 * mesh.spacing) * (1.0 - 1e-9);
  const double expo = theta * p + Dim;
  std::vector<double> rows(mesh.size(), 0.0);
  parallel_for(mesh.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < mesh.size(); ++j) {
      if (j == i) continue;
      const double d = distance(mesh.vertices[i], mesh.vertices[j]);
      if (d < cutoff) continue;
      const double df = distance(values[i], values[j]);
      if (df == 0.0) continue;
      acc += mesh.weights[j] * std::pow(df, p) / std::pow(d, expo);
    }
    rows[i] = mesh.weights[i] * acc;
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return {theta, p, std::pow(total, 1.0 / p), cutoff};
}

/// Seminorm of the map restricted to the mesh sphere (ball maps: S^(n-2) in R^(n-1)).
template <int D, int Dim>
SlobodeckijValue slobodeckij_seminorm(const PositionMap<D>& map, double theta, double p,
                                      const SphereMesh<Dim>& mesh) {
  static_assert(Dim + 1 == D, "mesh must be the boundary sphere of the map domain");
  std::vector<Vec<D>> values(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) values[i] = map(mesh.vertices[i]);
  return slobodeckij_seminorm<Dim, D>(std::span<const Vec<D>>(values), theta, p, mesh);
}

}  // namespace kakeya
