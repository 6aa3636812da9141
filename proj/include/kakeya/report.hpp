#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "kakeya/error.hpp"
#include "kakeya/kakeya_measure.hpp"
#include "kakeya/mollification.hpp"
#include "kakeya/regularity.hpp"
#include "kakeya/slice_analysis.hpp"
#include "kakeya/sobolev_convergence.hpp"
#include "kakeya/winding.hpp"

namespace kakeya {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_number(double x) {
  std::array<char, 64> buf;
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr, ErrorKind::io, "cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  require(ok, ErrorKind::io, "SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Collects emitted files so a manifest can be written at the end.
class ReportWriter {
 public:
  explicit ReportWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    if (!dir_.empty()) std::filesystem::create_directories(dir_, ec);
    require(!ec, ErrorKind::io, "cannot create output directory " + dir_.string());
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path write_text(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
    out << text;
    out.close();
    require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
    files_.push_back(name);
    return path;
  }

  std::filesystem::path write_json(const std::string& name, const json& j) { return write_text(name, j.dump(2) + "\n"); }

  /// {schema_version: 1, command, params, results}
  std::filesystem::path write_report(const std::string& name, const std::string& command, const json& params,
                                     const json& results) {
    json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["params"] = params;
    j["results"] = results;
    return write_json(name, j);
  }

  /// MANIFEST.json with a SHA-256 per emitted file.
  std::filesystem::path write_manifest() {
    json files = json::array();
    for (const auto& name : files_) {
      const auto bytes = read_file(dir_ / name);
      files.push_back({{"path", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    json j;
    j["schema_version"] = 1;
    j["files"] = files;
    const auto path = dir_ / "MANIFEST.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
    out << j.dump(2) << "\n";
    return path;
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline std::string sv_csv(const SVProfile& p) {
  std::string s = "t,sv\n";
  for (std::size_t i = 0; i < p.t_values.size(); ++i)
    s += format_number(p.t_values[i]) + "," + format_number(p.sv_values[i]) + "\n";
  return s;
}

/// Header x,y[,z],wind,masked; masked cells leave wind empty.
template <int A>
std::string wind_csv(const WindingField<A>& f) {
  std::string s = A == 2 ? "x,y,wind,masked\n" : "x,y,z,wind,masked\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto p = f.center(i);
    for (int a = 0; a < A; ++a) s += format_number(p[a]) + ",";
    if (f.masked[i]) s += ",1\n";
    else s += std::to_string(f.values[i]) + ",0\n";
  }
  return s;
}

inline std::string tube_csv(const TubeFamily& f) {
  std::string s = "v1,v2,c1,c2\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    s += format_number(f.net[i][0]) + "," + format_number(f.net[i][1]) + "," + format_number(f.centers[i][0]) + "," +
         format_number(f.centers[i][1]) + "\n";
  return s;
}

/// gnuplot script plotting the two named columns of a CSV file.
inline std::string gnuplot_script(const std::string& csv, const std::string& xlabel, const std::string& ylabel,
                                  const std::string& title) {
  return "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set xlabel '" + xlabel + "'\n"
         "set ylabel '" + ylabel + "'\n"
         "set title '" + title + "'\n"
         "plot '" + csv + "' using 1:2 with linespoints\n";
}

inline json to_json_value(const PolyFit& f) {
  return {{"coefficients", f.coefficients}, {"residual_rms", f.residual_rms}, {"leading", f.leading_coefficient},
          {"condition_number", f.condition_number}};
}

inline json to_json_value(const LowerBoundCheck& c) {
  return {{"integral_abs_sv", c.integral_abs_sv}, {"kappa", c.kappa}, {"passed", c.passed}};
}

inline json to_json_value(const MeasureEstimate& m) {
  return {{"value", m.value}, {"h", m.h}, {"cells_hit", m.cells_hit}, {"mode", std::string(to_string(m.mode))}};
}

inline json to_json_value(const HolderFit& f) {
  json j;
  if (f.exponent) j["exponent"] = *f.exponent;
  else j["exponent"] = "degenerate";
  j["constant"] = f.constant;
  j["raw_slope"] = f.raw_slope;
  j["residual"] = f.residual;
  j["reliable"] = f.reliable;
  j["scales"] = f.scales;
  j["oscillation"] = f.oscillation;
  j["sup_norm"] = f.sup_norm;
  return j;
}

inline json to_json_value(const MollificationBounds& b) {
  return {{"epsilon", b.epsilon},       {"alpha", b.alpha},         {"d_epsilon", b.d_epsilon},
          {"sup_deviation", b.sup_deviation}, {"grad_sup", b.grad_sup}, {"bound_ratios", {b.sup_ratio, b.grad_ratio}}};
}

inline json to_json_value(const IsoperimetricResult& r) {
  return {{"lhs", r.lhs}, {"rhs_area", r.rhs_area}, {"ratio", r.ratio}, {"threshold", r.threshold}, {"passed", r.passed}};
}

inline json to_json_value(const TubeScalingReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"L", row.L}, {"tubes", row.tubes}, {"union_volume", row.union_volume}, {"scaled", row.scaled}});
  return {{"delta", r.delta}, {"h", r.h}, {"base_lipschitz", r.base_lipschitz}, {"rows", rows},
          {"spread", r.spread()}, {"min_scaled", r.min_scaled()}};
}

inline json to_json_value(const ConvergenceReport& r) {
  return {{"epsilons", r.epsilons},
          {"total_integral", r.total_integral},
          {"i1", r.i1},
          {"i2", r.i2},
          {"collar_measure", r.collar_measure},
          {"i1_bound", r.i1_bound},
          {"agreement_region_fraction", r.agreement_region_fraction},
          {"mismatches_outside_collar", r.mismatches_outside_collar},
          {"reference_total", r.reference_total},
          {"calibrated_constant", r.calibrated_constant},
          {"gap_ratios", r.gap_ratios},
          {"i1_bound_holds", r.i1_bound_holds},
          {"cauchy", r.cauchy},
          {"collar", {{"H", r.collar.H}, {"delta_prime", r.collar.delta_prime}}},
          {"h", r.h}};
}

}  // namespace kakeya
