#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace kakeya {

/// Fixed-size Euclidean vector. Dimensions in this library are small (2..4).
template <std::size_t N>
using Vec = std::array<double, N>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <std::size_t N>
constexpr Vec<N> operator+(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = -a[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(double s, const Vec<N>& a) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(const Vec<N>& a, double s) {
  return s * a;
}

template <std::size_t N>
constexpr Vec<N>& operator+=(Vec<N>& a, const Vec<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
  return a;
}

template <std::size_t N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
inline double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
inline double distance(const Vec<N>& a, const Vec<N>& b) {
  return norm(a - b);
}

template <std::size_t N>
inline Vec<N> normalized(const Vec<N>& a) {
  const double n = norm(a);
  return (1.0 / n) * a;
}

constexpr double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

constexpr double triple(const Vec3& a, const Vec3& b, const Vec3& c) { return dot(a, cross(b, c)); }

template <std::size_t N>
constexpr Vec<N> zero_vec() {
  return Vec<N>{};
}

/// Distance from p to the closed segment [a, b].
template <std::size_t N>
inline double point_segment_distance(const Vec<N>& p, const Vec<N>& a, const Vec<N>& b) {
  const Vec<N> ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  double s = dot(p - a, ab) / len2;
  s = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
  return distance(p, a + s * ab);
}

/// Distance from p to the closed triangle (a, b, c); handles degenerate triangles.
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 nrm = cross(ab, ac);
  const double n2 = dot(nrm, nrm);
  double best = point_segment_distance<3>(p, a, b);
  best = std::fmin(best, point_segment_distance<3>(p, b, c));
  best = std::fmin(best, point_segment_distance<3>(p, c, a));
  if (n2 == 0.0) return best;
  // Barycentric test of the projection onto the supporting plane.
  const Vec3 ap = p - a;
  const double dist_plane = dot(ap, nrm) / std::sqrt(n2);
  const double u = dot(cross(ap, ac), nrm) / n2;
  const double v = dot(cross(ab, ap), nrm) / n2;
  if (u >= 0.0 && v >= 0.0 && u + v <= 1.0) best = std::fmin(best, std::fabs(dist_plane));
  return best;
}

}  // namespace kakeya
