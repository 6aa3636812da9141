#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kakeya/error.hpp"
#include "kakeya/kakeya_measure.hpp"
#include "kakeya/mollification.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/position_map.hpp"
#include "kakeya/regularity.hpp"
#include "kakeya/report.hpp"
#include "kakeya/slice_analysis.hpp"
#include "kakeya/sobolev_convergence.hpp"
#include "kakeya/winding.hpp"

namespace kakeya::cli {

struct Options {
  std::string map = "zero";
  int n = 3;
  int jobs = 0;
  std::string out;
  std::string config;
  // sweep / slice
  int t_steps = 64;
  int mesh = 2048;
  std::optional<double> epsilon;
  std::string method = "stokes";
  double h = 0.01;
  double t = 0.5;
  // tubes
  double delta = 0.05;
  std::vector<double> L;
  // moll
  std::vector<double> epsilons;
  double alpha = 1.0;
  // regularity
  std::string domain = "ball";
  std::vector<double> thetas;
  double p = 2.0;
  int samples = 1 << 14;
  // line-kakeya
  std::vector<double> x;
  double tol = 1e-9;
  double R = 0.0;
  double cap = 0.0;
  int trials = 500;
  std::uint64_t seed = 1;
  // verify
  std::string suite = "core";
};

/// Thrown for command-line validation problems; carries the offending flag when known.
struct UsageError : std::runtime_error {
  std::string flag;
  UsageError(std::string f, const std::string& msg) : std::runtime_error(msg), flag(std::move(f)) {}
};

namespace detail {

/// key=value lines (blank lines and '#' comments ignored) become "--key value" tokens.
inline std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config", "cannot read config file " + path);
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("--config", path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("--config", path + ":" + std::to_string(lineno) + ": empty key");
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

/// Splices config-file flags in right after the subcommand so explicit flags (later) win.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t skip = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      skip = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      skip = 1;
    } else {
      continue;
    }
    std::vector<std::string> rest(args.begin(), args.begin() + static_cast<long>(i));
    rest.insert(rest.end(), args.begin() + static_cast<long>(i + skip), args.end());
    const auto extra = config_tokens(path);
    // The first token is the subcommand.
    const std::size_t at = rest.empty() ? 0 : 1;
    rest.insert(rest.begin() + static_cast<long>(at), extra.begin(), extra.end());
    return expand_config(rest);
  }
  return args;
}

inline std::string flag_of(const CLI::ParseError& e) {
  const std::string msg = e.what();
  if (msg.rfind("--", 0) == 0) return msg.substr(0, msg.find_first_of(": "));
  const auto pos = msg.find("--");
  if (pos != std::string::npos) return msg.substr(pos, msg.find_first_of(" ,:", pos) - pos);
  return "";
}

inline std::filesystem::path out_dir(const std::string& out) {
  const auto parent = std::filesystem::path(out).parent_path();
  return parent.empty() ? std::filesystem::path(".") : parent;
}

inline std::string stem(const std::string& out) { return std::filesystem::path(out).stem().string(); }
inline std::string fname(const std::string& out) { return std::filesystem::path(out).filename().string(); }

inline void require_out(const Options& o) {
  if (o.out.empty()) throw UsageError("--out", "--out is required");
}

inline Vec3 parse_point(const std::vector<double>& x) {
  if (x.size() != 3) throw UsageError("--x", "--x needs exactly 3 coordinates");
  return {x[0], x[1], x[2]};
}

inline json map_params(const Options& o) { return {{"map", o.map}, {"n", o.n}}; }

}  // namespace detail

// Commands ------------------------------------------------------------------

template <int D>
int sweep_impl(const Options& o, std::ostream& log) {
  const auto map = make_map<D>(o.map, o.n);
  const auto mesh = sample_sphere<D - 1>(o.mesh);
  const auto t = uniform_t_grid(o.t_steps);
  const auto method = parse_sv_method(o.method);
  const auto profile = sweep_signed_volume<D>(map, t, mesh, o.epsilon, method, o.h);
  const auto fit = fit_sv_polynomial(profile, o.n);
  json results;
  results["fit"] = to_json_value(fit);
  try {
    results["lower_bound"] = to_json_value(sv_lower_bound_check(fit, profile, o.n));
  } catch (const Error& e) {
    results["lower_bound"] = {{"error", e.what()}};
  }
  results["method"] = std::string(to_string(method));
  results["mesh_vertices"] = mesh.size();
  results["rows"] = profile.t_values.size();
  json params = detail::map_params(o);
  params.update({{"t_steps", o.t_steps}, {"mesh", o.mesh}, {"method", o.method}, {"h", o.h}});
  params["epsilon"] = o.epsilon ? json(*o.epsilon) : json(nullptr);
  ReportWriter w(detail::out_dir(o.out));
  const std::string base = detail::stem(o.out);
  w.write_text(detail::fname(o.out), sv_csv(profile));
  w.write_report(base + ".fit.json", "sweep", params, results);
  w.write_text(base + ".gp", gnuplot_script(detail::fname(o.out), "t", "SV(t)", "signed volume"));
  w.write_manifest();
  log << "leading coefficient " << format_number(fit.leading_coefficient) << "\n";
  return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& log) {
  detail::require_out(o);
  if (o.n == 3) return sweep_impl<2>(o, log);
  return sweep_impl<3>(o, log);
}

inline int cmd_slice(const Options& o, std::ostream& log) {
  detail::require_out(o);
  ReportWriter w(detail::out_dir(o.out));
  json params = detail::map_params(o);
  params.update({{"t", o.t}, {"mesh", o.mesh}, {"h", o.h}});
  params["epsilon"] = o.epsilon ? json(*o.epsilon) : json(nullptr);
  json results;
  if (o.n == 3) {
    const auto map = make_map<2>(o.map, 3);
    const auto mesh = sample_circle(o.mesh);
    const auto loop = slice_loop<2>(map, o.t, mesh, o.epsilon);
    const auto field = winding_field(loop, o.h);
    results["stokes"] = signed_volume_stokes(loop);
    results["grid"] = signed_volume_grid(loop, o.h).value;
    results["masked_cells"] = field.masked_count();
    results["loop_area"] = loop_area(loop);
    results["isoperimetric"] = to_json_value(isoperimetric_check(loop, o.h));
    results["degenerate"] = loop.degenerate;
    w.write_text(detail::fname(o.out), wind_csv(field));
  } else {
    const auto map = make_map<3>(o.map, 4);
    const auto mesh = sample_sphere2(o.mesh);
    const auto loop = slice_loop<3>(map, o.t, mesh, o.epsilon);
    const auto field = winding_field(loop, o.h);
    results["stokes"] = signed_volume_stokes(loop);
    results["grid"] = signed_volume_grid(loop, o.h).value;
    results["masked_cells"] = field.masked_count();
    results["loop_area"] = loop_area(loop);
    results["degenerate"] = loop.degenerate;
    w.write_text(detail::fname(o.out), wind_csv(field));
  }
  w.write_report(detail::stem(o.out) + ".json", "slice", params, results);
  w.write_manifest();
  log << "slice written\n";
  return 0;
}

inline int cmd_measure(const Options& o, std::ostream& log) {
  detail::require_out(o);
  if (o.n != 3) throw Error(ErrorKind::dimension, "measure supports n=3 only");
  const auto map = make_map<2>(o.map, 3);
  const auto fit = holder_estimate(map);
  const auto m = rasterize_image_measure(map, o.h, Modulus::from(fit));
  json params = detail::map_params(o);
  params["h"] = o.h;
  json results = to_json_value(m);
  results["modulus"] = to_json_value(fit);
  ReportWriter w(detail::out_dir(o.out));
  w.write_report(detail::fname(o.out), "measure", params, results);
  w.write_manifest();
  log << "measure " << format_number(m.value) << "\n";
  return 0;
}

inline int cmd_tubes(const Options& o, std::ostream& log) {
  detail::require_out(o);
  if (o.n != 3) throw Error(ErrorKind::dimension, "tubes supports n=3 only");
  const auto map = make_map<2>(o.map, 3);
  const auto fam = build_tube_family(map, o.delta);
  const double h = o.h > o.delta / 4.0 ? o.delta / 4.0 : o.h;
  json params = detail::map_params(o);
  params.update({{"delta", o.delta}, {"h", h}, {"L", o.L}});
  json results;
  results["sidecar"] = {{"delta", fam.delta}, {"n", fam.n}, {"count", fam.size()}};
  results["net_lipschitz"] = lipschitz_constant_on_net<2>(fam.net, fam.centers);
  results["union"] = to_json_value(tube_union_volume(fam, h));
  if (!o.L.empty()) results["scaling"] = to_json_value(lipschitz_tube_experiment(map, o.L, o.delta, h));
  ReportWriter w(detail::out_dir(o.out));
  w.write_text(detail::stem(o.out) + ".csv", tube_csv(fam));
  w.write_json(detail::stem(o.out) + ".sidecar.json", results["sidecar"]);
  w.write_report(detail::fname(o.out), "tubes", params, results);
  w.write_manifest();
  log << "tubes " << fam.size() << "\n";
  return 0;
}

template <int Dim>
json moll_rows(const Options& o) {
  constexpr int D = Dim + 1;
  const auto map = make_map<D>(o.map, o.n);
  const auto mesh = sample_sphere<Dim>(o.mesh);
  const auto values = restrict_to_sphere(map, mesh);
  json rows = json::array();
  for (double e : o.epsilons) {
    const auto k = mollifier_kernel(e, mesh);
    auto row = to_json_value(mollification_bounds<Dim, D>(std::span<const Vec<D>>(values), k, o.alpha));
    row["kernel_mass_error"] = k.mass_error();
    rows.push_back(row);
  }
  return rows;
}

inline int cmd_moll(const Options& o, std::ostream& log) {
  detail::require_out(o);
  Options q = o;
  if (q.epsilons.empty()) q.epsilons = {0.1, 0.05, 0.025};
  json params = detail::map_params(q);
  params.update({{"mesh", q.mesh}, {"epsilons", q.epsilons}, {"alpha", q.alpha}});
  json results;
  results["rows"] = q.n == 3 ? moll_rows<1>(q) : moll_rows<2>(q);
  ReportWriter w(detail::out_dir(q.out));
  w.write_report(detail::fname(q.out), "moll", params, results);
  w.write_manifest();
  log << "moll rows " << results["rows"].size() << "\n";
  return 0;
}

inline int cmd_regularity(const Options& o, std::ostream& log) {
  detail::require_out(o);
  if (o.n != 3) throw Error(ErrorKind::dimension, "regularity supports n=3 only");
  Options q = o;
  if (q.thetas.empty()) q.thetas = {0.25, 0.5, 0.75};
  const auto map = make_map<2>(q.map, 3);
  const auto scales = default_holder_scales();
  const auto fit = holder_estimate(map, std::span<const double>(scales), q.samples);
  const auto mesh = sample_circle(q.mesh);
  json results;
  results["holder"] = to_json_value(fit);
  const auto net = separated_net(0.05);
  std::vector<Vec2> vals(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) vals[i] = map(net[i]);
  results["lipschitz_net_constant"] = lipschitz_constant_on_net<2>(net, vals);
  json sl = json::array();
  for (double th : q.thetas) {
    const auto s = slobodeckij_seminorm(map, th, q.p, mesh);
    sl.push_back({{"theta", s.theta}, {"p", s.p}, {"seminorm", s.seminorm}, {"cutoff", s.cutoff}});
  }
  results["slobodeckij"] = sl;
  json params = detail::map_params(q);
  params.update({{"mesh", q.mesh}, {"thetas", q.thetas}, {"p", q.p}, {"samples", q.samples}});
  ReportWriter w(detail::out_dir(q.out));
  w.write_report(detail::fname(q.out), "regularity", params, results);
  w.write_manifest();
  log << "regularity written\n";
  return 0;
}

inline int cmd_line_kakeya(const Options& o, std::ostream& log) {
  detail::require_out(o);
  if (o.n != 3) throw Error(ErrorKind::dimension, "line-kakeya supports n=3 only");
  const auto map = make_map<3>(o.map, 3, DomainKind::sphere);
  const double sup = sampled_sup_norm(map);
  const double R = o.R > 0.0 ? o.R : sup;
  if (sup > R) throw UsageError("--R", "sampled sup|c| = " + format_number(sup) + " exceeds --R");
  json params = detail::map_params(o);
  params.update({{"tol", o.tol}, {"R", R}});
  json results;
  results["sampled_sup"] = sup;
  if (!o.x.empty()) {
    const auto sol = line_kakeya_cover(map, detail::parse_point(o.x), o.tol, R);
    params["x"] = o.x;
    results["cover"] = {{"v", sol.v},       {"residual", sol.residual}, {"s", sol.s},
                        {"converged", sol.converged}, {"seed_index", sol.seed_index}};
  }
  if (o.cap > 0.0) {
    const auto cov = cone_coverage_check(map, o.cap, R, static_cast<std::size_t>(o.trials), o.seed, o.tol);
    params.update({{"cap", o.cap}, {"trials", o.trials}, {"seed", o.seed}});
    results["cone"] = {{"samples", cov.samples}, {"covered", cov.covered}, {"fraction", cov.fraction},
                       {"max_residual", cov.max_residual}};
  }
  ReportWriter w(detail::out_dir(o.out));
  w.write_report(detail::fname(o.out), "line-kakeya", params, results);
  w.write_manifest();
  log << "line-kakeya written\n";
  return 0;
}

/// Fast invariant checks; every check is reported, the exit status is 0 whenever the suite ran.
inline json core_suite(int n) {
  json checks = json::array();
  auto add = [&](const std::string& name, bool passed, double value) {
    checks.push_back({{"name", name}, {"passed", passed}, {"value", value}});
  };
  const double pi = std::numbers::pi;
  {
    const auto c = sample_circle(256);
    double s = 0;
    for (double w : c.weights) s += w;
    add("sphere_weights_s1", std::fabs(s - 2 * pi) < 1e-12, s);
    const auto s2 = sample_sphere2(642);
    s = 0;
    for (double w : s2.weights) s += w;
    add("sphere_weights_s2", std::fabs(s - 4 * pi) < 1e-6, s);
  }
  {
    const auto mesh = sample_circle(256);
    const auto loop = slice_loop<2>(make_map<2>("zero", 3), 1.0, mesh);
    add("winding_inside", winding_number_2d(loop, {0, 0}) == 1, 1);
    add("winding_reversed", winding_number_2d(reversed(loop), {0, 0}) == -1, -1);
    add("winding_outside", winding_number_2d(loop, {2, 0}) == 0, 0);
    const auto iso = isoperimetric_check(loop, 0.005);
    add("isoperimetric_circle", std::fabs(iso.ratio - 1.0 / (2.0 * std::sqrt(pi))) < 0.01 / (2.0 * std::sqrt(pi)),
        iso.ratio);
  }
  {
    const auto mesh = sample_circle(1024);
    const auto map = make_map<2>("lacunary:alpha=0.8", 3);
    const auto k = mollifier_kernel(0.05, mesh);
    const auto loop = slice_loop<2>(map, 0.7, mesh, &k);
    std::size_t mism = 0;
    const auto f = winding_field(loop, 0.02);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!f.masked[i] && winding_number_2d(loop, f.center(i), 0.01) != ray_crossing_oracle(loop, f.center(i), 0.01))
        ++mism;
    add("winding_vs_ray_oracle", mism == 0, static_cast<double>(mism));
    const double h = 0.005;
    const double diff = std::fabs(signed_volume_grid(loop, h).value - signed_volume_stokes(loop));
    add("grid_vs_stokes", diff <= 3 * h * loop_area(loop), diff);
    add("kernel_mass", k.mass_error() < 1e-8, k.mass_error());
    add("d_epsilon_range", k.d_epsilon >= 0.1 && k.d_epsilon <= 10, k.d_epsilon);
  }
  {
    const auto mesh = sample_circle(2048);
    const auto t = uniform_t_grid(64);
    const auto p = sweep_signed_volume<2>(make_map<2>("zero", 3), t, mesh, std::nullopt, SvMethod::stokes);
    const auto fit = fit_sv_polynomial(p, 3);
    add("sv_leading_zero_map", std::fabs(fit.leading_coefficient - pi) < 1e-5, fit.leading_coefficient);
  }
  {
    const auto tri = triangle_inequality_check<2>(100000, 1);
    add("triangle_inequality_r2", tri.violations == 0, static_cast<double>(tri.violations));
    const auto tri3 = triangle_inequality_check<3>(100000, 2);
    add("triangle_inequality_r3", tri3.violations == 0, static_cast<double>(tri3.violations));
  }
  {
    const auto mesh = sample_circle(512);
    std::vector<Vec2> id(mesh.vertices.begin(), mesh.vertices.end());
    add("degree_identity", degree_circle_map(id) == 1, 1);
    std::vector<Vec2> cst(mesh.size(), Vec2{1, 0});
    add("degree_integral_constant_zero", degree_integral_bound(cst, 1.0, mesh) == 0.0, 0.0);
  }
  {
    const auto c = make_map<3>("radial:r=0.2", 3, DomainKind::sphere);
    const auto sol = line_kakeya_cover(c, {0, 0, 5}, 1e-12, 0.2);
    add("line_kakeya_radial", sol.converged, sol.residual);
  }
  {
    const auto fam = build_tube_family(make_map<2>("lacunary:alpha=0.8", 3), 0.1);
    const auto u = tube_union_volume(fam, 0.025);
    double sum = 0, mx = 0;
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const auto one = tube_union_volume(build_tube_family({fam.net[i]}, {fam.centers[i]}, 0.1), 0.025);
      sum += one.value;
      mx = std::max(mx, one.value);
    }
    add("tube_subadditive", u.value <= sum && u.value >= mx, u.value);
  }
  if (n == 4) {
    const auto ico = sample_sphere2(642);
    const auto mesh = make_trimesh(ico.vertices, ico.cells);
    add("winding_3d_inside", generalized_winding_3d(mesh, {0, 0, 0}) == 1, 1);
    add("winding_3d_outside", generalized_winding_3d(mesh, {3, 0, 0}) == 0, 0);
    const double v = signed_volume_stokes(mesh);
    add("stokes_3d_ball", std::fabs(v - 4 * pi / 3) < 0.02 * 4 * pi / 3, v);
  }
  return checks;
}

inline int cmd_verify(const Options& o, std::ostream& log) {
  if (o.suite != "core") throw UsageError("--suite", "unknown suite '" + o.suite + "'");
  const auto checks = core_suite(o.n);
  bool all = true;
  for (const auto& c : checks) all = all && c["passed"].get<bool>();
  json results = {{"suite", o.suite}, {"checks", checks}, {"all_passed", all}};
  json params = {{"suite", o.suite}, {"n", o.n}};
  if (!o.out.empty()) {
    ReportWriter w(detail::out_dir(o.out));
    w.write_report(detail::fname(o.out), "verify", params, results);
    w.write_manifest();
  } else {
    json j = {{"schema_version", 1}, {"command", "verify"}, {"params", params}, {"results", results}};
    log << j.dump(2) << "\n";
  }
  return 0;
}

// Entry point ---------------------------------------------------------------

/// Runs one subcommand. Returns 0 on success and 2 on validation failure, after writing a
/// one-line JSON error to err.
inline int run_command(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Numerical experiments on Kakeya maps", "kakeya_lab"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--jobs", o.jobs, "worker threads (0 = all cores)")->check(CLI::Range(0, 1024));

  auto common = [&](CLI::App* s) {
    s->add_option("--map", o.map, "map spec variant:key=val,...");
    s->add_option("--n", o.n, "ambient dimension")->check(CLI::Range(3, 4));
    s->add_option("--out", o.out, "primary output file");
    s->add_option("--jobs", o.jobs, "worker threads (0 = all cores)")->check(CLI::Range(0, 1024));
    s->add_option("--config", o.config, "key=value file");
  };
  auto* sweep = app.add_subcommand("sweep", "signed volume SV(t) over a t grid");
  common(sweep);
  sweep->add_option("--t-steps", o.t_steps)->check(CLI::Range(4, 100000));
  sweep->add_option("--mesh", o.mesh)->check(CLI::Range(8, 1 << 20));
  sweep->add_option("--epsilon", o.epsilon)->check(CLI::Range(1e-6, 0.3));
  sweep->add_option("--method", o.method)->check(CLI::IsMember({"stokes", "spectral", "grid"}));
  sweep->add_option("--h", o.h)->check(CLI::Range(1e-4, 0.5));

  auto* slice = app.add_subcommand("slice", "one slice: winding field, volumes, isoperimetric ratio");
  common(slice);
  slice->add_option("--t", o.t)->check(CLI::Range(0.0, 1.0));
  slice->add_option("--mesh", o.mesh)->check(CLI::Range(8, 1 << 20));
  slice->add_option("--epsilon", o.epsilon)->check(CLI::Range(1e-6, 0.3));
  slice->add_option("--h", o.h)->check(CLI::Range(1e-4, 0.5));

  auto* measure = app.add_subcommand("measure", "grid estimate of the Kakeya set measure");
  common(measure);
  measure->add_option("--h", o.h)->check(CLI::Range(1e-4, 0.1));

  auto* tubes = app.add_subcommand("tubes", "delta-tube family and union volume");
  common(tubes);
  tubes->add_option("--delta", o.delta)->check(CLI::Range(0.005, 0.1));
  tubes->add_option("--h", o.h)->check(CLI::Range(1e-4, 0.1));
  tubes->add_option("--L", o.L)->delimiter(',')->check(CLI::Range(0.0, 8.0));

  auto* moll = app.add_subcommand("moll", "mollification bounds");
  common(moll);
  moll->add_option("--mesh", o.mesh)->check(CLI::Range(8, 1 << 20));
  moll->add_option("--epsilon", o.epsilons)->delimiter(',')->check(CLI::Range(1e-6, 0.3));
  moll->add_option("--alpha", o.alpha)->check(CLI::Range(1e-6, 1.0));

  auto* reg = app.add_subcommand("regularity", "Hoelder, net-Lipschitz and Slobodeckij estimates");
  common(reg);
  reg->add_option("--mesh", o.mesh)->check(CLI::Range(64, 1 << 16));
  reg->add_option("--theta", o.thetas)->delimiter(',')->check(CLI::Range(1e-6, 1.0 - 1e-6));
  reg->add_option("--p", o.p)->check(CLI::Range(1.0, 64.0));
  reg->add_option("--samples", o.samples)->check(CLI::Range(1 << 10, 1 << 20));

  auto* lk = app.add_subcommand("line-kakeya", "fixed-point line cover and cone coverage");
  common(lk);
  lk->add_option("--x", o.x)->delimiter(',');
  lk->add_option("--tol", o.tol)->check(CLI::Range(1e-15, 1e-2));
  lk->add_option("--R", o.R)->check(CLI::Range(0.0, 1e6));
  lk->add_option("--cap", o.cap)->check(CLI::Range(0.0, 0.5));
  lk->add_option("--trials", o.trials)->check(CLI::Range(1, 1000000));
  lk->add_option("--seed", o.seed);

  auto* verify = app.add_subcommand("verify", "invariant suite");
  common(verify);
  verify->add_option("--suite", o.suite);

  auto error_line = [&](const std::string& kind, const std::string& flag, const std::string& msg) {
    json j = {{"error", kind}, {"message", msg}};
    if (!flag.empty()) j["flag"] = flag;
    err << j.dump() << "\n";
    return 2;
  };

  try {
    args = detail::expand_config(args);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return error_line("usage", detail::flag_of(e), e.what());
  } catch (const UsageError& e) {
    return error_line("usage", e.flag, e.what());
  }

  if (const char* env = std::getenv("KAKEYA_LAB_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) return error_line("usage", "KAKEYA_LAB_JOBS", "invalid job count");
    o.jobs = static_cast<int>(v);
  }
  set_jobs(o.jobs);

  try {
    if (*sweep) return cmd_sweep(o, out);
    if (*slice) return cmd_slice(o, out);
    if (*measure) return cmd_measure(o, out);
    if (*tubes) return cmd_tubes(o, out);
    if (*moll) return cmd_moll(o, out);
    if (*reg) return cmd_regularity(o, out);
    if (*lk) return cmd_line_kakeya(o, out);
    if (*verify) return cmd_verify(o, out);
  } catch (const UsageError& e) {
    return error_line("usage", e.flag, e.what());
  } catch (const Error& e) {
    return error_line(std::string(to_string(e.kind())), "", e.what());
  }
  return error_line("usage", "", "no subcommand");
}

inline int run_command(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_command(std::move(args));
}

}  // namespace kakeya::cli
