#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "kakeya/error.hpp"
#include "kakeya/mollification.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/position_map.hpp"
#include "kakeya/random.hpp"
#include "kakeya/regularity.hpp"
#include "kakeya/slice_analysis.hpp"
#include "kakeya/vec.hpp"
#include "kakeya/winding.hpp"

namespace kakeya {

struct TriangleTerms {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// |u_a - u_b| versus |u_a - (b-x)/|a-x|| + |u_b - (a-x)/|b-x||, with u_y = (y-x)/|y-x|.
template <std::size_t N>
TriangleTerms triangle_terms(const Vec<N>& x, const Vec<N>& a, const Vec<N>& b) {
  const double ra = distance(a, x), rb = distance(b, x);
  require(ra > 0.0 && rb > 0.0, ErrorKind::invalid_argument, "a and b must differ from x");
  const Vec<N> ua = (1.0 / ra) * (a - x), ub = (1.0 / rb) * (b - x);
  TriangleTerms t;
  t.lhs = distance(ua, ub);
  t.rhs = distance(ua, (1.0 / ra) * (b - x)) + distance(ub, (1.0 / rb) * (a - x));
  return t;
}

struct TriangleCheck {
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// Largest lhs - rhs observed (negative when the inequality always holds strictly).
  double max_excess = -std::numeric_limits<double>::infinity();
};

/// Fuzzes the inequality on Gaussian triples, ordered so |a - x| <= |b - x|.
template <std::size_t N>
TriangleCheck triangle_inequality_check(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  TriangleCheck c;
  for (std::size_t i = 0; i < count; ++i) {
    Vec<N> x, a, b;
    for (auto& q : x) q = rng.normal();
    for (auto& q : a) q = rng.normal();
    for (auto& q : b) q = rng.normal();
    if (distance(a, x) > distance(b, x)) std::swap(a, b);
    if (distance(a, x) == 0.0) continue;
    const auto t = triangle_terms<N>(x, a, b);
    ++c.samples;
    c.max_excess = std::max(c.max_excess, t.lhs - t.rhs);
    if (t.lhs > t.rhs + 1e-12) ++c.violations;
  }
  return c;
}

struct AgreementStats {
  double collar_width = 0.0;
  std::size_t compared = 0;
  std::size_t mismatches = 0;
  std::size_t collar_cells = 0;
  std::size_t masked_cells = 0;
};

struct CollarParams {
  /// Collar half-width is H * eps^delta_prime.
  double H = 0.0;
  double delta_prime = 1.0;

  /// H = 2 * (measured Hoelder constant), delta' = measured exponent; zero collar for constant maps.
  static CollarParams from(const HolderFit& fit) {
    if (fit.degenerate()) return {0.0, 1.0};
    return {2.0 * fit.constant, *fit.exponent};
  }
  double width(double eps) const { return H * std::pow(eps, delta_prime); }
};

namespace detail {

inline GridBox2 common_box(std::span<const Loop2* const> loops, double h) {
  std::vector<Vec2> pts;
  for (const auto* l : loops) pts.insert(pts.end(), l->vertices.begin(), l->vertices.end());
  return grid_box(pts, h, std::max(2.0 * h, 0.1));
}

inline std::vector<std::uint8_t> collar_mask(const Loop2& loop, const GridBox2& box, double h, double width) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(box.dims[0]) * box.dims[1], 0);
  if (width <= 0.0) return m;
  if (loop.degenerate) {
    Loop2 point = loop;
    point.cells = {{0, 0}};
    mark_near<2>(point, box.origin, h, box.dims, width, m);
  } else {
    mark_near<2>(loop, box.origin, h, box.dims, width, m);
  }
  return m;
}

/// Distance from each cell centre to the loop, computed exactly within `cap` and +inf beyond.
inline std::vector<float> capped_distance(const Loop2& loop, const GridBox2& box, double h, double cap) {
  const int nx = box.dims[0], ny = box.dims[1];
  std::vector<float> d(static_cast<std::size_t>(nx) * ny, std::numeric_limits<float>::infinity());
  if (cap <= 0.0) return d;
  const std::size_t nseg = loop.degenerate ? 1 : loop.cells.size();
  for (std::size_t s = 0; s < nseg; ++s) {
    const Vec2& a = loop.vertices[loop.degenerate ? 0 : loop.cells[s][0]];
    const Vec2& b = loop.vertices[loop.degenerate ? 0 : loop.cells[s][1]];
    const int x0 = std::max(0, static_cast<int>(std::floor((std::min(a[0], b[0]) - cap - box.origin[0]) / h - 0.5)));
    const int x1 = std::min(nx - 1, static_cast<int>(std::ceil((std::max(a[0], b[0]) + cap - box.origin[0]) / h - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor((std::min(a[1], b[1]) - cap - box.origin[1]) / h - 0.5)));
    const int y1 = std::min(ny - 1, static_cast<int>(std::ceil((std::max(a[1], b[1]) + cap - box.origin[1]) / h - 0.5)));
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) {
        const Vec2 p{box.origin[0] + (ix + 0.5) * h, box.origin[1] + (iy + 0.5) * h};
        const double q = point_segment_distance<2>(p, a, b);
        auto& cell = d[static_cast<std::size_t>(iy) * nx + ix];
        if (q <= cap && q < cell) cell = static_cast<float>(q);
      }
  }
  return d;
}

}  // namespace detail

/// Compares wind_{t,eps} with wind_t on cells outside the collar of Im gamma_t and away from both loops.
inline AgreementStats winding_agreement(const PositionMap<2>& map, double t, double epsilon, const CollarParams& collar,
                                        double h, const CircleMesh& mesh) {
  const auto raw = slice_loop<2>(map, t, mesh);
  const auto kernel = mollifier_kernel(epsilon, mesh);
  const auto smooth = slice_loop<2>(map, t, mesh, &kernel);
  const Loop2* loops[] = {&raw, &smooth};
  const auto box = detail::common_box(loops, h);
  const auto w0 = winding_field(raw, box.origin, h, box.dims);
  const auto w1 = winding_field(smooth, box.origin, h, box.dims);
  AgreementStats s;
  s.collar_width = collar.width(epsilon);
  const auto cm = detail::collar_mask(raw, box, h, s.collar_width);
  for (std::size_t i = 0; i < w0.size(); ++i) {
    if (w0.masked[i] || w1.masked[i]) {
      ++s.masked_cells;
      continue;
    }
    if (cm[i]) {
      ++s.collar_cells;
      continue;
    }
    ++s.compared;
    if (w0.values[i] != w1.values[i]) ++s.mismatches;
  }
  return s;
}

struct ConvergenceReport {
  std::vector<double> epsilons;
  /// int_0^1 int wind_{t,eps} per eps.
  std::vector<double> total_integral;
  /// Collar part I1 and exterior part I2 of the total.
  std::vector<double> i1;
  std::vector<double> i2;
  /// int_0^1 |collar_t| dt per eps.
  std::vector<double> collar_measure;
  std::vector<double> max_loop_length;
  /// collar_measure^(1/(n-1)) * max_loop_length, the quantity |I1| is compared against.
  std::vector<double> i1_bound;
  std::vector<double> agreement_region_fraction;
  std::vector<std::size_t> mismatches_outside_collar;
  /// int_0^1 int wind_t for the unmollified map on the same grid.
  double reference_total = 0.0;
  double calibrated_constant = 0.0;
  std::vector<double> gap_ratios;
  bool i1_bound_holds = true;
  bool cauchy = true;
  CollarParams collar;
  double h = 0.0;
};

/// Splits int_0^1 int wind_{t,eps} into the collar part I1 and the rest I2 for each eps,
/// checks |I1| <= C * bound with C calibrated at the largest eps, and checks that the
/// totals form a Cauchy sequence (each gap at least 1.5 times the next).
inline ConvergenceReport convergence_split(const PositionMap<2>& map, std::span<const double> epsilons,
                                           std::span<const double> t_grid, double h, const CircleMesh& mesh,
                                           const CollarParams& collar) {
  require(epsilons.size() >= 3, ErrorKind::invalid_argument, "need at least 3 epsilons");
  for (std::size_t i = 1; i < epsilons.size(); ++i)
    require(epsilons[i] < epsilons[i - 1], ErrorKind::invalid_argument, "epsilons must be strictly descending");
  require(t_grid.size() >= 2, ErrorKind::invalid_argument, "t grid needs at least 2 points");
  const std::size_t ne = epsilons.size(), nt = t_grid.size();
  std::vector<Kernel<1>> kernels;
  for (double e : epsilons) kernels.push_back(mollifier_kernel(e, mesh));

  double widest = 0.0;
  for (double e : epsilons) widest = std::max(widest, collar.width(e));

  // Per (t, eps): total, collar part, collar measure, agreement counts, loop length.
  // Totals use the scanline winding of every cell centre; the h/2 boundary mask only
  // restricts the pointwise comparison with wind_t.
  struct Cell {
    double total = 0, i1 = 0, collar = 0, length = 0;
    std::size_t agree = 0, compared = 0, mismatches = 0;
  };
  std::vector<Cell> cells(nt * ne);
  std::vector<double> ref(nt, 0.0);
  parallel_for(nt, [&](std::size_t k) {
    const double t = t_grid[k];
    const auto raw = slice_loop<2>(map, t, mesh);
    std::vector<Loop2> smooth;
    for (const auto& kern : kernels) smooth.push_back(slice_loop<2>(map, t, mesh, &kern));
    std::vector<const Loop2*> all{&raw};
    for (const auto& l : smooth) all.push_back(&l);
    const auto box = detail::common_box(all, h);
    const auto dist = detail::capped_distance(raw, box, h, widest);
    const auto w0 = winding_field(raw, box.origin, h, box.dims);
    const auto v0 = scanline_values(raw, box.origin, h, box.dims);
    long rs = 0;
    for (int v : v0) rs += v;
    ref[k] = static_cast<double>(rs) * h * h;
    for (std::size_t e = 0; e < ne; ++e) {
      auto& c = cells[k * ne + e];
      const double width = collar.width(epsilons[e]);
      const auto values = scanline_values(smooth[e], box.origin, h, box.dims);
      std::vector<std::uint8_t> masked(values.size(), 0);
      detail::mark_near<2>(smooth[e], box.origin, h, box.dims, h / 2.0, masked);
      long tot = 0, in = 0, ncol = 0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        tot += values[i];
        if (dist[i] <= width) {
          in += values[i];
          ++ncol;
        } else if (!masked[i] && !w0.masked[i]) {
          ++c.compared;
          if (values[i] == w0.values[i]) ++c.agree;
          else ++c.mismatches;
        }
      }
      c.total = static_cast<double>(tot) * h * h;
      c.i1 = static_cast<double>(in) * h * h;
      c.collar = static_cast<double>(ncol) * h * h;
      c.length = loop_area(smooth[e]);
    }
  });

  ConvergenceReport r;
  r.epsilons.assign(epsilons.begin(), epsilons.end());
  r.collar = collar;
  r.h = h;
  r.reference_total = trapezoid(t_grid, ref);
  std::vector<double> col(nt);
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> tot(nt), in(nt), cms(nt);
    double maxlen = 0.0;
    std::size_t agree = 0, compared = 0, mism = 0;
    for (std::size_t k = 0; k < nt; ++k) {
      const auto& c = cells[k * ne + e];
      tot[k] = c.total;
      in[k] = c.i1;
      cms[k] = c.collar;
      maxlen = std::max(maxlen, c.length);
      agree += c.agree;
      compared += c.compared;
      mism += c.mismatches;
    }
    r.total_integral.push_back(trapezoid(t_grid, tot));
    r.i1.push_back(trapezoid(t_grid, in));
    r.i2.push_back(r.total_integral.back() - r.i1.back());
    r.collar_measure.push_back(trapezoid(t_grid, cms));
    r.max_loop_length.push_back(maxlen);
    r.i1_bound.push_back(std::sqrt(r.collar_measure.back()) * maxlen);
    r.agreement_region_fraction.push_back(compared ? static_cast<double>(agree) / compared : 1.0);
    r.mismatches_outside_collar.push_back(mism);
  }
  r.calibrated_constant = r.i1_bound[0] > 0.0 ? std::fabs(r.i1[0]) / r.i1_bound[0] : 0.0;
  for (std::size_t e = 1; e < ne; ++e)
    if (std::fabs(r.i1[e]) > r.calibrated_constant * r.i1_bound[e] * (1.0 + 1e-12) + 1e-15) r.i1_bound_holds = false;
  // Gaps below this floor are indistinguishable from zero on the grid.
  const double floor = 1e-12;
  for (std::size_t e = 0; e + 2 < ne; ++e) {
    const double g0 = std::fabs(r.total_integral[e + 1] - r.total_integral[e]);
    const double g1 = std::fabs(r.total_integral[e + 2] - r.total_integral[e + 1]);
    if (g1 <= floor) {
      r.gap_ratios.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    r.gap_ratios.push_back(g0 / g1);
    if (g0 / g1 < 1.5) r.cauchy = false;
  }
  return r;
}

}  // namespace kakeya
