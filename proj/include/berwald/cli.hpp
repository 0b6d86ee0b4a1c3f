#pragma once

// Run configuration and the subcommands behind the `berwald` executable.
// Each command returns an exit code and a JSON report; the executable only
// parses flags and writes files.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "berwald/connection.hpp"
#include "berwald/curvature.hpp"
#include "berwald/errors.hpp"
#include "berwald/fundamental_tensor.hpp"
#include "berwald/geodesic.hpp"
#include "berwald/lambda_series.hpp"
#include "berwald/validation.hpp"

namespace berwald::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitConfigError = 2;

inline const char* const kCsvHeader = "t,x0,x1,x2,x3,v0,v1,v2,v3,L,tau";

/// Keys accepted in a config file or through --set, with their defaults.
inline const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> d = {
      {"seed", "20240601"},
      {"tol_scale", "1"},
      {"metric.base", "minkowski"},
      {"metric.chart", "cartesian"},
      {"metric.epsilon", "0"},
      {"metric.scale_factor", "constant"},
      {"metric.scale_value", "1"},
      {"metric.phi", "0"},
      {"metric.params", ""},
      {"metric.length_scale", "0"},
      {"metric.curvature_mode", "zero"},
      {"metric.orientation", "1, 0, 0, 0"},
      {"verify.points", "20"},
      {"verify.directions", "500"},
      {"verify.berwald_points", "20"},
      {"verify.berwald_velocities", "8"},
      {"verify.einstein_samples", "50"},
      {"verify.cone_samples", "1000"},
      {"geodesic.x0", ""},
      {"geodesic.v0", ""},
      {"geodesic.t_end", "1"},
      {"geodesic.step", "0.01"},
      {"geodesic.adaptive", "true"},
      {"geodesic.csv", ""},
      {"curvature.points", ""},
      {"curvature.velocity", "1, 0, 0, 0"},
      {"cones.samples", "1000"},
      {"cones.points", "20"},
      {"lambda.phi", "0"},
      {"lambda.Lambda", "1"},
      {"lambda.order", "1"},
      {"lambda.length_scale", ""},
      {"lambda.epsilon", ""},
  };
  return d;
}

inline bool is_field_key(const std::string& key) {
  static const std::regex re("metric\\.field\\.[A-Z]");
  return std::regex_match(key, re);
}

inline bool known_key(const std::string& key) { return default_values().count(key) > 0 || is_field_key(key); }

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Flat `key = value` settings. Lines starting with '#' are comments.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "config") {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(t.substr(0, eq));
      if (c.values_.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
      c.set(key, trim(t.substr(eq + 1)), origin + ":" + std::to_string(lineno));
    }
    return c;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  /// Override one key; `key=value` form as given to --set.
  void set_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set");
  }

  void set(const std::string& key, const std::string& value, const std::string& origin = "flag") {
    if (!known_key(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
    values_[key] = value;
  }

  std::string get(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    auto d = default_values().find(key);
    if (d != default_values().end()) return d->second;
    throw ConfigError("unknown key '" + key + "'");
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double number(const std::string& key) const { return to_number(key, get(key)); }

  long integer(const std::string& key) const {
    std::string s = get(key);
    long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t seed() const {
    std::string s = get("seed");
    std::uint64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("seed: expected a non-negative integer");
    return v;
  }

  bool boolean(const std::string& key) const {
    std::string s = get(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key + ": expected true or false");
  }

  std::vector<std::string> list(const std::string& key, char sep = ',') const {
    std::vector<std::string> out;
    std::string s = get(key);
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) out.push_back(to_number(key, s));
    return out;
  }

  Vec4<> vec4(const std::string& key) const {
    auto v = numbers(key);
    if (v.size() != 4) throw ConfigError(key + ": expected 4 comma-separated numbers");
    return {v[0], v[1], v[2], v[3]};
  }

  /// Every key, defaults included, as resolved for this run.
  json resolved() const {
    json j = json::object();
    for (const auto& [k, v] : default_values()) j[k] = get(k);
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  static double to_number(const std::string& key, const std::string& s) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
    return v;
  }

  std::map<std::string, std::string> values_;
};

/// Build the fundamental tensor described by the metric.* keys.
inline FundamentalTensor build_metric(const RunConfig& c) {
  std::string family = c.get("metric.base");
  std::string chart_name = c.get("metric.chart");
  ChartId chart{chart_name};
  if (!(chart == kCartesian) && !(chart == kSpherical)) throw ConfigError("metric.chart: cartesian or spherical");
  BaseMetric base;
  if (family == "minkowski") {
    base = BaseMetric::minkowski(chart);
  } else if (family == "robertson_walker") {
    if (!(chart == kSpherical)) throw ConfigError("robertson_walker needs metric.chart = spherical");
    std::string kind = c.get("metric.scale_factor");
    double value = c.number("metric.scale_value");
    ScaleFactor a = kind == "constant"      ? ScaleFactor::constant(value)
                    : kind == "power"       ? ScaleFactor::power(value)
                    : kind == "exponential" ? ScaleFactor::exponential(value)
                                            : throw ConfigError("metric.scale_factor: constant, power or exponential");
    base = BaseMetric::robertson_walker(c.number("metric.epsilon"), a);
  } else {
    throw ConfigError("metric.base: minkowski or robertson_walker");
  }

  std::vector<std::string> extra;
  ArgumentBinding binding;
  const json resolved = c.resolved();
  for (const auto& item : resolved.items()) {
    const std::string& key = item.key();
    if (!is_field_key(key)) continue;
    std::string name = key.substr(std::string("metric.field.").size());
    auto comps = c.list(key);
    if (comps.size() != 4) throw ConfigError(key + ": expected 4 comma-separated component expressions");
    binding.fields[name] = VectorField(chart, {comps[0], comps[1], comps[2], comps[3]});
    extra.push_back(name);
  }
  auto phi = ScalarFactorExpr::parse(c.get("metric.phi"), extra)
                 .with_params(c.numbers("metric.params"))
                 .with_length_scale(c.number("metric.length_scale"));
  for (const auto& name : phi.used_fields()) {
    if (!binding.fields.count(name)) throw ConfigError("phi uses theta" + name + " but metric.field." + name + " is not set");
  }
  std::string mode = c.get("metric.curvature_mode");
  if (mode == "constant") {
    binding.curvature_mode = CurvatureMode::constant;
    auto r = certify_constant_curvature(base, 10, c.seed());
    if (!r) throw ConfigError("metric.curvature_mode = constant but the base metric has no constant scalar curvature");
    binding.curvature_value = *r;
    binding.curvature_certified = true;
  } else if (mode != "zero") {
    throw ConfigError("metric.curvature_mode: zero or constant");
  }
  auto o = c.list("metric.orientation");
  if (o.size() != 4) throw ConfigError("metric.orientation: expected 4 component expressions");
  return FundamentalTensor(base, phi, binding).with_time_orientation(VectorField(chart, {o[0], o[1], o[2], o[3]}));
}

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Outcome {
  int exit_code = kExitPass;
  json report;
  std::string csv;  // geodesic only
};

inline json report_skeleton(const std::string& command, const RunConfig& c) {
  json r;
  r["header"] = {{"timestamp", utc_timestamp()}, {"tool", "berwald"}};
  r["schema_version"] = kSchemaVersion;
  r["command"] = command;
  r["config"] = c.resolved();
  r["seed"] = c.seed();
  return r;
}

inline json vec_json(const Vec4<>& v) { return json::array({v[0], v[1], v[2], v[3]}); }

inline json sym_json(const SymMatrix4& m) {
  json a = json::array();
  for (int i = 0; i < kDim; ++i) {
    json row = json::array();
    for (int j = 0; j < kDim; ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

inline json tensor_json(const Tensor3& t) {
  json a = json::array();
  for (const auto& m : t) {
    json b = json::array();
    for (const auto& row : m) b.push_back(json(std::vector<double>(row.begin(), row.end())));
    a.push_back(b);
  }
  return a;
}

inline json tensor_json(const Tensor4& t) {
  json a = json::array();
  for (const auto& x : t) a.push_back(tensor_json(x));
  return a;
}

inline json error_json(const Error& e) {
  json j = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  if (auto* le = dynamic_cast<const LocatedError*>(&e)) {
    j["parameter"] = le->parameter();
    j["coords"] = vec_json(le->coords());
  }
  return j;
}

/// One verification entry: passes when measured <= tolerance * tol_scale.
struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool heuristic = false;
  json details = json::object();
};

inline json check_json(const Check& c, std::uint64_t seed) {
  json j = {{"name", c.name},       {"measured", c.measured}, {"tolerance", c.tolerance},
            {"passed", c.passed},   {"seed", seed},           {"heuristic", c.heuristic}};
  if (!c.details.empty()) j["details"] = c.details;
  return j;
}

namespace detail {

/// Random regular events and velocities (half timelike, half spacelike) for sweeps.
inline std::vector<TangentVector> regular_samples(const FundamentalTensor& f, int count, Rng& rng) {
  std::vector<TangentVector> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts++ < 1000 * count) {
    Vec4<> x = sample_coords(f.base().sample_box(), rng);
    if (f.base().domain_violation(x)) continue;
    auto vs = sample_velocities(f, x, 2, rng);
    if (vs.empty()) continue;
    out.push_back(TangentVector{Event{f.chart(), x}, vs[out.size() % vs.size()]});
  }
  return out;
}

}  // namespace detail

inline Outcome cmd_verify(const RunConfig& c) {
  Outcome out;
  out.report = report_skeleton("verify", c);
  FundamentalTensor f = build_metric(c);
  const std::uint64_t seed = c.seed();
  const double scale = c.number("tol_scale");
  std::vector<Check> checks;

  SamplingPlan plan;
  plan.points = static_cast<int>(c.integer("verify.points"));
  plan.directions = static_cast<int>(c.integer("verify.directions"));
  plan.seed = seed;
  ValidationReport v = validate(f, plan);
  for (const auto& cl : v.clauses) {
    Check k{cl.name, cl.measured, cl.tolerance, cl.passed, cl.heuristic, {{"note", cl.note}}};
    if (cl.name == "homogeneity") k.passed = v.homogeneity.samples > 0 && cl.measured <= cl.tolerance * scale && v.homogeneity.samples == plan.points * plan.directions;
    if (cl.name == "null_cone") k.passed = cl.measured <= cl.tolerance * scale;
    if (cl.name == "homogeneity") {
      k.details["estimated_degree"] = v.homogeneity.estimated_degree;
      k.details["singular_resampled"] = v.homogeneity.singular_resampled;
      k.details["samples"] = v.homogeneity.samples;
    }
    if (cl.name == "singular_locus") {
      k.details["probes"] = v.singular_locus.probes;
      k.details["probes_detected"] = v.singular_locus.probes_detected;
      k.details["random_denominator_zero"] = v.singular_locus.random_denominator_zero;
      k.details["random_non_real"] = v.singular_locus.random_non_real;
      k.details["random_bound_violation"] = v.singular_locus.random_bound_violation;
      k.details["random_degeneracy"] = v.singular_locus.random_degeneracy;
    }
    checks.push_back(k);
  }

  // Berwald certificate at random events.
  Rng rng(seed + 2);
  bool berwald_ok = true;
  {
    Check k{"berwald", 0.0, 0.0, true, false, {}};
    double worst_ratio = -1.0;
    int points = 0;
    try {
      const int n = static_cast<int>(c.integer("verify.berwald_points"));
      const int nv = static_cast<int>(c.integer("verify.berwald_velocities"));
      int attempts = 0;
      while (points < n && attempts++ < 100 * n) {
        Vec4<> x = sample_coords(f.base().sample_box(), rng);
        if (f.base().domain_violation(x)) continue;
        Event e{f.chart(), x};
        auto vs = sample_velocities(f, x, nv, rng);
        BerwaldCertificate cert = berwald_check(f, e, vs, seed);
        double ratio = cert.max_variation / cert.tolerance;
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          k.measured = cert.max_variation;
          k.tolerance = cert.tolerance;
        }
        ++points;
      }
      k.passed = points == n && worst_ratio <= scale;
      k.details["points"] = points;
    } catch (const Error& e) {
      k.passed = false;
      k.details["error"] = error_json(e);
    }
    berwald_ok = k.passed;
    checks.push_back(k);
  }

  // Einstein tensors of g and h, and the scalar relation.
  {
    Check kc{"einstein_coincidence", 0.0, 0.0, false, false, {}};
    Check ks{"scalar_relation", 0.0, kEinsteinTolerance, false, false, {}};
    if (!berwald_ok) {
      kc.details["skipped"] = "no Berwald certificate";
      ks.details["skipped"] = "no Berwald certificate";
    } else {
      try {
        const int n = static_cast<int>(c.integer("verify.einstein_samples"));
        auto samples = detail::regular_samples(f, n, rng);
        double worst = -1.0;
        for (const auto& tv : samples) {
          EinsteinCoincidenceReport r = einstein_coincidence(f, tv, seed);
          if (r.max_deviation / r.tolerance > worst) {
            worst = r.max_deviation / r.tolerance;
            kc.measured = r.max_deviation;
            kc.tolerance = r.tolerance;
          }
          ks.measured = std::max(ks.measured, r.scalar_deviation);
        }
        kc.passed = static_cast<int>(samples.size()) == n && worst <= scale;
        ks.passed = static_cast<int>(samples.size()) == n && ks.measured <= ks.tolerance * scale;
        kc.details["samples"] = samples.size();
      } catch (const Error& e) {
        kc.details["error"] = error_json(e);
        ks.details["error"] = error_json(e);
      }
    }
    checks.push_back(kc);
    checks.push_back(ks);
  }

  // Flat base: every curvature component vanishes.
  if (f.base().family() == BaseMetric::Family::minkowski) {
    Check k{"flatness", 0.0, 1e-8, false, false, {}};
    if (!berwald_ok) {
      k.details["skipped"] = "no Berwald certificate";
    } else {
      try {
        auto samples = detail::regular_samples(f, plan.points, rng);
        for (const auto& tv : samples) k.measured = std::max(k.measured, linalg::max_abs(curvature(f, tv, seed).riemann));
        k.passed = k.measured <= k.tolerance * scale;
      } catch (const Error& e) {
        k.details["error"] = error_json(e);
      }
    }
    checks.push_back(k);
  }

  bool all = true;
  out.report["checks"] = json::array();
  for (const auto& k : checks) {
    out.report["checks"].push_back(check_json(k, seed));
    all = all && k.passed;
  }
  out.report["passed"] = all;
  out.exit_code = all ? kExitPass : kExitCheckFailure;
  return out;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline Outcome cmd_geodesic(const RunConfig& c) {
  Outcome out;
  out.report = report_skeleton("geodesic", c);
  FundamentalTensor f = build_metric(c);
  if (c.get("geodesic.x0").empty() || c.get("geodesic.v0").empty()) throw ConfigError("geodesic.x0 and geodesic.v0 are required");
  Vec4<> x0 = c.vec4("geodesic.x0");
  Vec4<> v0 = c.vec4("geodesic.v0");
  StepControl control;
  control.step = c.number("geodesic.step");
  control.adaptive = c.boolean("geodesic.adaptive");
  control.tolerance *= c.number("tol_scale");
  control.seed = c.seed();
  double t_end = c.number("geodesic.t_end");
  json summary;
  try {
    GeodesicTrajectory traj = integrate_geodesic(f, make_tangent(make_event(f.chart(), x0), v0), t_end, control);
    std::ostringstream csv;
    csv << kCsvHeader << "\n";
    for (const auto& s : traj.samples) {
      csv << format_double(s.t);
      for (double x : s.x) csv << "," << format_double(x);
      for (double v : s.v) csv << "," << format_double(v);
      csv << "," << format_double(s.lagrangian) << "," << (traj.timelike ? format_double(s.tau) : "") << "\n";
    }
    out.csv = csv.str();
    summary["steps"] = traj.stats.steps;
    summary["rejected_steps"] = traj.stats.rejected;
    summary["max_halving_error"] = traj.stats.max_halving_error;
    summary["min_step"] = traj.stats.min_step_used;
    summary["lagrangian_initial"] = traj.samples.front().lagrangian;
    summary["lagrangian_drift"] = traj.max_lagrangian_drift;
    summary["drift_bound"] = traj.drift_bound();
    summary["drift_within_bound"] = traj.drift_within_bound();
    summary["timelike"] = traj.timelike;
    summary["proper_time"] = traj.timelike ? json(traj.proper_time()) : json(nullptr);
    summary["final_x"] = vec_json(traj.back().x);
    summary["final_v"] = vec_json(traj.back().v);
    summary["berwald_variation"] = traj.certificate->max_variation;
    out.report["passed"] = true;
  } catch (const Error& e) {
    summary["error"] = error_json(e);
    out.report["passed"] = false;
    out.exit_code = kExitCheckFailure;
  }
  out.report["summary"] = summary;
  return out;
}

inline Outcome cmd_curvature(const RunConfig& c) {
  Outcome out;
  out.report = report_skeleton("curvature", c);
  FundamentalTensor f = build_metric(c);
  Vec4<> v = c.vec4("curvature.velocity");
  auto groups = c.list("curvature.points", ';');
  if (groups.empty()) throw ConfigError("curvature.points: expected ';'-separated events");
  json points = json::array();
  bool all = true;
  for (const auto& g : groups) {
    RunConfig one;
    one.set("geodesic.x0", g);
    Vec4<> x = one.vec4("geodesic.x0");
    json p = {{"x", vec_json(x)}, {"v", vec_json(v)}};
    try {
      TangentVector tv = make_tangent(make_event(f.chart(), x), v);
      CurvatureBundle b = curvature(f, tv, c.seed());
      BaseCurvature h = base_curvature(f.base(), x);
      p["riemann"] = tensor_json(b.riemann);
      p["ricci"] = sym_json(b.ricci);
      p["ricci_asymmetry"] = b.ricci_asymmetry;
      p["scalar"] = b.scalar;
      p["einstein"] = sym_json(b.einstein);
      p["base_einstein"] = sym_json(h.einstein);
      p["einstein_deviation"] = linalg::max_abs_diff(b.einstein, h.einstein);
      p["max_abs_riemann"] = linalg::max_abs(b.riemann);
      p["certificate"] = {{"max_variation", b.certificate.max_variation},
                          {"tolerance", b.certificate.tolerance},
                          {"samples", b.certificate.samples},
                          {"seed", b.certificate.seed}};
    } catch (const Error& e) {
      p["error"] = error_json(e);
      all = false;
    }
    points.push_back(p);
  }
  out.report["points"] = points;
  out.report["passed"] = all;
  out.exit_code = all ? kExitPass : kExitCheckFailure;
  return out;
}

inline Outcome cmd_cones(const RunConfig& c) {
  Outcome out;
  out.report = report_skeleton("cones", c);
  FundamentalTensor f = build_metric(c);
  ConeReport r = cone_coincidence(f, static_cast<int>(c.integer("cones.samples")),
                                  static_cast<int>(c.integer("cones.points")), c.seed());
  double tol = kConeTolerance * c.number("tol_scale");
  bool ok = r.samples > 0 && r.max_relative_lagrangian <= tol;
  out.report["cones"] = {{"max_relative_lagrangian", r.max_relative_lagrangian},
                         {"tolerance", tol},
                         {"samples", r.samples},
                         {"skipped", r.skipped},
                         {"future", r.future},
                         {"past", r.past},
                         {"two_components_heuristic", r.future > 0 && r.past > 0}};
  out.report["passed"] = ok;
  out.exit_code = ok ? kExitPass : kExitCheckFailure;
  return out;
}

inline Outcome cmd_lambda(const RunConfig& c) {
  Outcome out;
  out.report = report_skeleton("lambda-series", c);
  try {
    double phi = c.number("lambda.phi");
    double lambda = c.number("lambda.Lambda");
    long order = c.integer("lambda.order");
    LambdaSeries s = (c.get("lambda.length_scale").empty() || c.get("lambda.epsilon").empty())
                         ? lambda_series(phi, lambda, static_cast<int>(order))
                         : lambda_series(phi, lambda, static_cast<int>(order), c.number("lambda.length_scale"),
                                         c.number("lambda.epsilon"));
    json j = {{"phi", s.phi},
              {"Lambda", s.lambda},
              {"order", s.order},
              {"exact", s.exact},
              {"truncated", s.truncated},
              {"taylor_truncated", s.taylor_truncated},
              {"remainder_bound", s.remainder_bound},
              {"remainder_honored", std::abs(s.exact - s.taylor_truncated) <= s.remainder_bound},
              {"printed_coefficients", s.printed_coefficients},
              {"taylor_coefficients", s.taylor_coefficients},
              {"coefficient_discrepancy", s.coefficient_discrepancy},
              {"discrepancy_affects_truncation", s.discrepancy_affects_truncation},
              {"discrepancy_note", s.discrepancy_note}};
    if (s.l2_eps) {
      j["l2_eps"] = *s.l2_eps;
      j["log10_l2_eps"] = s.log10_l2_eps ? json(*s.log10_l2_eps) : json(nullptr);
      j["reference_log10_l2_eps"] = kReferenceLog10L2Eps;
      j["first_order_correction"] = *s.l2_eps;
    }
    out.report["series"] = j;
    out.report["passed"] = true;
  } catch (const Error& e) {
    out.report["error"] = error_json(e);
    out.report["passed"] = false;
    out.exit_code = kExitCheckFailure;
  }
  return out;
}

inline Outcome run(const std::string& command, const RunConfig& c) {
  if (command == "verify") return cmd_verify(c);
  if (command == "geodesic") return cmd_geodesic(c);
  if (command == "curvature") return cmd_curvature(c);
  if (command == "cones") return cmd_cones(c);
  if (command == "lambda-series") return cmd_lambda(c);
  throw ConfigError("unknown command " + command);
}

/// The report serialized with sorted keys; `header` holds the only
/// run-dependent field.
inline std::string dump(const json& report) { return report.dump(2) + "\n"; }

}  // namespace berwald::cli
