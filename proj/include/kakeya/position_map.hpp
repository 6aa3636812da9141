#pragma once

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kakeya/error.hpp"
#include "kakeya/random.hpp"
#include "kakeya/vec.hpp"

namespace kakeya {

/// Ball domain: c maps the closed unit ball of R^(n-1) into R^(n-1).
/// Sphere domain: c maps S^(n-1) into R^n (line-Kakeya setting).
enum class DomainKind { ball, sphere };

enum class MapVariant { constant, radial_scale, polynomial, lacunary_fourier, grid_sampled };

inline std::string_view to_string(DomainKind d) { return d == DomainKind::ball ? "ball" : "sphere"; }

inline std::string_view to_string(MapVariant v) {
  switch (v) {
    case MapVariant::constant: return "constant";
    case MapVariant::radial_scale: return "radial";
    case MapVariant::polynomial: return "polynomial";
    case MapVariant::lacunary_fourier: return "lacunary";
    case MapVariant::grid_sampled: return "grid";
  }
  return "unknown";
}

/// Parsed form of a catalog string `variant:key=val,key=val`.
///
/// Vector-valued parameters separate components with '/', e.g. `constant:p=0.1/0.2`.
struct MapSpec {
  std::string variant;
  std::map<std::string, std::string> params;

  static MapSpec parse(std::string_view text);
  /// Canonical string with keys in sorted order; parse(to_string()) reproduces the spec.
  std::string to_string() const;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::vector<double> vector(const std::string& key) const;
};

namespace detail {

inline double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  require(ec == std::errc() && ptr == end && std::isfinite(v), ErrorKind::invalid_argument,
          "cannot parse number for '" + what + "': '" + std::string(s) + "'");
  return v;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

inline MapSpec MapSpec::parse(std::string_view text) {
  MapSpec spec;
  const auto colon = text.find(':');
  spec.variant = detail::trim(text.substr(0, colon));
  require(!spec.variant.empty(), ErrorKind::invalid_argument, "empty map variant");
  if (colon == std::string_view::npos) return spec;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item = detail::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    require(eq != std::string::npos && eq > 0, ErrorKind::invalid_argument,
            "map parameter '" + item + "' is not key=value");
    spec.params[detail::trim(item.substr(0, eq))] = detail::trim(item.substr(eq + 1));
  }
  return spec;
}

inline std::string MapSpec::to_string() const {
  std::string out = variant;
  char sep = ':';
  for (const auto& [k, v] : params) {
    out += sep;
    out += k + "=" + v;
    sep = ',';
  }
  return out;
}

inline double MapSpec::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : detail::parse_double(it->second, key);
}

inline long MapSpec::integer(const std::string& key, long fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = detail::parse_double(it->second, key);
  require(v == std::floor(v) && std::fabs(v) < 1e15, ErrorKind::invalid_argument,
          "parameter '" + key + "' must be an integer");
  return static_cast<long>(v);
}

inline std::vector<double> MapSpec::vector(const std::string& key) const {
  std::vector<double> out;
  auto it = params.find(key);
  if (it == params.end()) return out;
  std::string_view s = it->second;
  while (true) {
    const auto slash = s.find('/');
    out.push_back(detail::parse_double(detail::trim(s.substr(0, slash)), key));
    if (slash == std::string_view::npos) break;
    s = s.substr(slash + 1);
  }
  return out;
}

/// Direction-to-position map c with ambient dimension n.
///
/// D is the dimension of both the domain and the codomain vectors: D = n-1 for the ball
/// domain and D = n for the sphere domain. Maps are immutable after construction and
/// evaluation is a pure function, so one instance may be shared across threads.
template <int D>
class PositionMap {
 public:
  struct Constant {
    Vec<D> p{};
  };
  struct Radial {
    double r = 0.0;
  };
  /// c_i(v) = scale / sqrt(D) * sum_m a_im v^m / sum_m |a_im| over monomials of total
  /// degree <= degree, so |c(v)| <= scale on the closed unit ball.
  struct Polynomial {
    int degree = 1;
    double scale = 0.5;
    std::vector<std::array<int, D>> exponents;
    std::vector<Vec<D>> coefficients;
  };
  /// Octave-spaced lacunary series. For D == 2 the angular form
  ///   c_i(v) = amp * |v| * sum_k 2^(-alpha k) u_k,i cos(2^k theta + phi_k,i)
  /// is used (theta = arg v); for D >= 3 the ridge form with random unit w_k,
  ///   c_i(v) = amp * sum_k 2^(-alpha k) u_k,i cos(2^k <w_k, v> + phi_k,i).
  struct Lacunary {
    double alpha = 0.5;
    int terms = 12;
    double amp = 1.0;
    std::vector<Vec<D>> directions;
    std::vector<Vec<D>> phases;
    std::vector<Vec<D>> ridges;
    std::vector<double> amplitudes;
    std::vector<double> frequencies;
  };
  /// Finite samples extended coordinatewise by c_i(x) = min_s (c_i(s) + L |x - s|).
  struct Sampled {
    std::vector<Vec<D>> points;
    std::vector<Vec<D>> values;
    double lipschitz = 0.0;
  };
  using Impl = std::variant<Constant, Radial, Polynomial, Lacunary, Sampled>;

  PositionMap(int n, DomainKind domain, Impl impl, MapSpec spec)
      : n_(n), domain_(domain), impl_(std::make_shared<const Impl>(std::move(impl))), spec_(std::move(spec)) {
    require(domain_dim(n, domain) == D, ErrorKind::dimension,
            "map dimension does not match n=" + std::to_string(n) + " and domain " +
                std::string(kakeya::to_string(domain)));
  }

  static constexpr int domain_dim(int n, DomainKind domain) { return domain == DomainKind::ball ? n - 1 : n; }

  int n() const { return n_; }
  DomainKind domain() const { return domain_; }
  const MapSpec& spec() const { return spec_; }
  const Impl& impl() const { return *impl_; }

  MapVariant variant() const {
    return std::visit(
        [](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Constant>) return MapVariant::constant;
          else if constexpr (std::is_same_v<T, Radial>) return MapVariant::radial_scale;
          else if constexpr (std::is_same_v<T, Polynomial>) return MapVariant::polynomial;
          else if constexpr (std::is_same_v<T, Lacunary>) return MapVariant::lacunary_fourier;
          else return MapVariant::grid_sampled;
        },
        *impl_);
  }

  /// Returns mult * c(v) + shift.
  PositionMap transformed(double mult, const Vec<D>& shift) const {
    PositionMap out = *this;
    out.mult_ = mult_ * mult;
    out.shift_ = mult * shift_ + shift;
    return out;
  }
  double mult() const { return mult_; }
  const Vec<D>& shift() const { return shift_; }

  Vec<D> operator()(const Vec<D>& v) const {
    const Vec<D> base = std::visit([&](const auto& m) { return eval(m, v); }, *impl_);
    if (mult_ == 1.0 && shift_ == Vec<D>{}) return base;
    return mult_ * base + shift_;
  }

 private:
  static Vec<D> eval(const Constant& m, const Vec<D>&) { return m.p; }
  static Vec<D> eval(const Radial& m, const Vec<D>& v) { return m.r * v; }

  static Vec<D> eval(const Polynomial& m, const Vec<D>& v) {
    Vec<D> out{};
    for (std::size_t t = 0; t < m.exponents.size(); ++t) {
      double mono = 1.0;
      for (int i = 0; i < D; ++i)
        for (int e = 0; e < m.exponents[t][i]; ++e) mono *= v[i];
      out += mono * m.coefficients[t];
    }
    return out;
  }

  static Vec<D> eval(const Lacunary& m, const Vec<D>& v) {
    Vec<D> out{};
    if constexpr (D == 2) {
      const double radius = norm(v);
      if (radius == 0.0) return out;
      const double theta = std::atan2(v[1], v[0]);
      for (int k = 0; k < m.terms; ++k) {
        const double arg = m.frequencies[k] * theta;
        for (int i = 0; i < D; ++i)
          out[i] += m.amplitudes[k] * m.directions[k][i] * std::cos(arg + m.phases[k][i]);
      }
      return (m.amp * radius) * out;
    } else {
      for (int k = 0; k < m.terms; ++k) {
        const double arg = m.frequencies[k] * dot(m.ridges[k], v);
        for (int i = 0; i < D; ++i)
          out[i] += m.amplitudes[k] * m.directions[k][i] * std::cos(arg + m.phases[k][i]);
      }
      return m.amp * out;
    }
  }

  static Vec<D> eval(const Sampled& m, const Vec<D>& x) {
    Vec<D> out;
    out.fill(std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < m.points.size(); ++s) {
      const double d = distance(x, m.points[s]);
      if (d == 0.0) return m.values[s];
      for (int i = 0; i < D; ++i) out[i] = std::min(out[i], m.values[s][i] + m.lipschitz * d);
    }
    return out;
  }

  int n_;
  DomainKind domain_;
  std::shared_ptr<const Impl> impl_;
  MapSpec spec_;
  double mult_ = 1.0;
  Vec<D> shift_{};
};

/// Largest ratio |c(v) - c(v')| / |v - v'| over all pairs of net samples.
template <std::size_t D>
double lipschitz_constant_on_net(std::span<const Vec<D>> points, std::span<const Vec<D>> values) {
  require(points.size() == values.size(), ErrorKind::invalid_argument, "points/values size mismatch");
  require(points.size() >= 2, ErrorKind::invalid_argument, "need at least 2 net points");
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = distance(points[i], points[j]);
      require(d > 0.0, ErrorKind::invalid_argument, "duplicate net point at index " + std::to_string(j));
      best = std::max(best, distance(values[i], values[j]) / d);
    }
  }
  return best;
}

template <std::size_t D>
double lipschitz_constant_on_net(const std::vector<Vec<D>>& points, const std::vector<Vec<D>>& values) {
  return lipschitz_constant_on_net<D>(std::span<const Vec<D>>(points), std::span<const Vec<D>>(values));
}

/// Coordinatewise McShane extension of net samples. The extension reproduces the
/// samples exactly on the net and is sqrt(D)*L Lipschitz in the Euclidean norm.
template <std::size_t D>
PositionMap<D> mcshane_extend(std::vector<Vec<D>> points, std::vector<Vec<D>> values, int n,
                              DomainKind domain = DomainKind::ball) {
  require(!points.empty(), ErrorKind::invalid_argument, "cannot extend an empty net");
  require(points.size() == values.size(), ErrorKind::invalid_argument, "points/values size mismatch");
  typename PositionMap<D>::Sampled s;
  s.lipschitz = points.size() >= 2 ? lipschitz_constant_on_net<D>(points, values) : 0.0;
  require(std::isfinite(s.lipschitz), ErrorKind::invalid_argument, "net Lipschitz constant is not finite");
  s.points = std::move(points);
  s.values = std::move(values);
  MapSpec spec{"grid", {{"samples", std::to_string(s.points.size())}}};
  return PositionMap<D>(n, domain, std::move(s), std::move(spec));
}

namespace detail {

template <int D>
void monomials(int degree, std::vector<std::array<int, D>>& out) {
  std::array<int, D> e{};
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == D) {
      out.push_back(e);
      return;
    }
    for (int p = 0; p <= left; ++p) {
      e[i] = p;
      self(self, i + 1, left - p);
    }
    e[i] = 0;
  };
  rec(rec, 0, degree);
}

template <int D>
Vec<D> random_unit(Rng& rng) {
  Vec<D> u{};
  double len = 0.0;
  while (len < 1e-12) {
    for (int i = 0; i < D; ++i) u[i] = rng.normal();
    len = norm(u);
  }
  return (1.0 / len) * u;
}

template <int D>
Vec<D> vec_param(const MapSpec& spec, const std::string& key) {
  const auto v = spec.vector(key);
  Vec<D> out{};
  if (v.empty()) return out;
  require(static_cast<int>(v.size()) == D, ErrorKind::invalid_argument,
          "parameter '" + key + "' needs " + std::to_string(D) + " components");
  for (int i = 0; i < D; ++i) out[i] = v[i];
  return out;
}

inline std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    std::string_view s = t;
    bool numeric = true;
    while (true) {
      const auto comma = s.find(',');
      const std::string cell = trim(s.substr(0, comma));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) numeric = false;
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      s = s.substr(comma + 1);
    }
    if (!numeric) {
      require(rows.empty(), ErrorKind::io, "non-numeric row in '" + path + "': " + t);
      continue;  // header
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Samples for a grid_sampled map from CSV rows `v1,...,vD,c1,...,cD`.
template <int D>
std::pair<std::vector<Vec<D>>, std::vector<Vec<D>>> load_samples_csv(const std::string& path) {
  const auto rows = detail::read_csv_rows(path);
  std::vector<Vec<D>> pts, vals;
  for (const auto& r : rows) {
    require(static_cast<int>(r.size()) == 2 * D, ErrorKind::io,
            "expected " + std::to_string(2 * D) + " columns in '" + path + "'");
    Vec<D> p{}, c{};
    for (int i = 0; i < D; ++i) {
      p[i] = r[i];
      c[i] = r[D + i];
    }
    pts.push_back(p);
    vals.push_back(c);
  }
  require(!pts.empty(), ErrorKind::invalid_argument, "grid samples file '" + path + "' has no rows");
  return {pts, vals};
}

/// Builds a catalog map. n is the ambient dimension (>= 3).
template <int D>
PositionMap<D> make_map(const MapSpec& spec, int n, DomainKind domain = DomainKind::ball) {
  require(n >= 3, ErrorKind::dimension, "ambient dimension n must be >= 3");
  require(PositionMap<D>::domain_dim(n, domain) == D, ErrorKind::dimension, "map dimension mismatch");
  using M = PositionMap<D>;
  const std::string& v = spec.variant;
  auto known = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, _] : spec.params) {
      bool ok = k == "mult" || k == "shift";
      for (const char* key : keys) ok = ok || k == key;
      require(ok, ErrorKind::invalid_argument, "unknown parameter '" + k + "' for map variant '" + v + "'");
    }
  };
  auto finish = [&](typename M::Impl impl) {
    M map(n, domain, std::move(impl), spec);
    const double mult = spec.number("mult", 1.0);
    const Vec<D> shift = detail::vec_param<D>(spec, "shift");
    require(std::isfinite(mult), ErrorKind::invalid_argument, "mult must be finite");
    return map.transformed(mult, shift);
  };

  if (v == "zero") {
    known({});
    return finish(typename M::Constant{});
  }
  if (v == "constant") {
    known({"p"});
    return finish(typename M::Constant{detail::vec_param<D>(spec, "p")});
  }
  if (v == "radial" || v == "radial_scale") {
    known({"r"});
    return finish(typename M::Radial{spec.number("r", 0.5)});
  }
  if (v == "polynomial" || v == "poly") {
    known({"degree", "scale", "seed"});
    typename M::Polynomial p;
    p.degree = static_cast<int>(spec.integer("degree", 2));
    p.scale = spec.number("scale", 0.5);
    require(p.degree >= 0 && p.degree <= 8, ErrorKind::invalid_argument, "polynomial degree must be in [0, 8]");
    require(p.scale >= 0.0, ErrorKind::invalid_argument, "polynomial scale must be >= 0");
    Rng rng(static_cast<std::uint64_t>(spec.integer("seed", 1)));
    detail::monomials<D>(p.degree, p.exponents);
    std::vector<Vec<D>> raw(p.exponents.size());
    Vec<D> l1{};
    for (auto& c : raw)
      for (int i = 0; i < D; ++i) {
        c[i] = rng.uniform(-1.0, 1.0);
        l1[i] += std::fabs(c[i]);
      }
    p.coefficients.resize(raw.size());
    for (std::size_t t = 0; t < raw.size(); ++t)
      for (int i = 0; i < D; ++i)
        p.coefficients[t][i] = l1[i] > 0.0 ? p.scale / std::sqrt(double(D)) * raw[t][i] / l1[i] : 0.0;
    return finish(std::move(p));
  }
  if (v == "lacunary" || v == "lacunary_fourier") {
    known({"alpha", "terms", "seed", "amp"});
    typename M::Lacunary l;
    require(spec.has("alpha"), ErrorKind::invalid_argument, "lacunary map requires alpha");
    l.alpha = spec.number("alpha", 0.5);
    l.terms = static_cast<int>(spec.integer("terms", 12));
    l.amp = spec.number("amp", 1.0);
    require(l.alpha > 0.0 && l.alpha <= 1.0, ErrorKind::invalid_argument, "lacunary alpha must lie in (0, 1]");
    require(l.terms >= 1 && l.terms <= 40, ErrorKind::invalid_argument, "lacunary terms must lie in [1, 40]");
    require(l.amp >= 0.0, ErrorKind::invalid_argument, "lacunary amp must be >= 0");
    Rng rng(static_cast<std::uint64_t>(spec.integer("seed", 7)));
    for (int k = 1; k <= l.terms; ++k) {
      l.directions.push_back(detail::random_unit<D>(rng));
      Vec<D> ph{};
      for (int i = 0; i < D; ++i) ph[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      l.phases.push_back(ph);
      l.ridges.push_back(detail::random_unit<D>(rng));
      l.amplitudes.push_back(std::exp2(-l.alpha * k));
      l.frequencies.push_back(std::exp2(static_cast<double>(k)));
    }
    return finish(std::move(l));
  }
  if (v == "grid" || v == "grid_sampled") {
    known({"file"});
    require(spec.has("file"), ErrorKind::invalid_argument, "grid map requires file=<csv>");
    auto [pts, vals] = load_samples_csv<D>(spec.params.at("file"));
    auto ext = mcshane_extend<D>(std::move(pts), std::move(vals), n, domain);
    return finish(ext.impl());
  }
  fail(ErrorKind::invalid_argument, "unknown map variant '" + v + "'");
}

template <int D>
PositionMap<D> make_map(std::string_view text, int n, DomainKind domain = DomainKind::ball) {
  return make_map<D>(MapSpec::parse(text), n, domain);
}

}  // namespace kakeya
