#pragma once

// The scalar factor phi of g = (1 + phi) h, written in the expression
// language over 0-homogeneous-capable arguments:
//
//   chi     = h(v, v)
//   thetaA  = h(v, A), thetaB = h(v, B), thetaC = h(v, C), ...  (bound fields)
//   curv    = l^2 R   (R: certified constant scalar curvature of h, or 0)
//   p0, p1, ...       dimensionless parameters
//
// with functions exp, log, sqrt and integer powers.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "berwald/base_metric.hpp"
#include "berwald/dual.hpp"
#include "berwald/errors.hpp"
#include "berwald/expression.hpp"
#include "berwald/sampling.hpp"
#include "berwald/vector_field.hpp"

namespace berwald {

enum class CurvatureMode { zero, constant };

/// Vector fields and curvature value that the expression's arguments refer to.
struct ArgumentBinding {
  std::map<std::string, VectorField> fields;  // keyed "A", "B", "C", ...
  CurvatureMode curvature_mode = CurvatureMode::zero;
  double curvature_value = 0.0;
  bool curvature_certified = false;
};

enum class CausalType { timelike, spacelike, lightlike };

inline const char* to_string(CausalType c) {
  switch (c) {
    case CausalType::timelike: return "timelike";
    case CausalType::spacelike: return "spacelike";
    case CausalType::lightlike: return "lightlike";
  }
  return "?";
}

class ScalarFactorExpr {
 public:
  static constexpr int kChiSlot = 0;
  static constexpr int kCurvSlot = 1;
  static constexpr int kFirstThetaSlot = 2;
  /// Relative magnitude below which a denominator argument counts as zero.
  static constexpr double kSingularThreshold = 1e-12;

  ScalarFactorExpr() : ScalarFactorExpr(parse("0")) {}

  /// Parse phi. `extra_fields` declares further bound fields beyond A and B
  /// (e.g. {"C"} admits `thetaC`).
  static ScalarFactorExpr parse(std::string_view source, const std::vector<std::string>& extra_fields = {}) {
    std::vector<std::string> names = {"A", "B"};
    for (const auto& f : extra_fields) {
      if (std::find(names.begin(), names.end(), f) != names.end()) continue;
      if (f.empty() || f.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ") != std::string::npos) {
        throw InvalidArgument("field names are upper-case letters, got '" + f + "'");
      }
      names.push_back(f);
    }
    expr::Vocabulary vocab;
    vocab.allow_parameters = true;
    vocab.functions = {expr::Function::exp, expr::Function::log, expr::Function::sqrt};
    vocab.variables["chi"] = kChiSlot;
    vocab.variables["curv"] = kCurvSlot;
    for (std::size_t i = 0; i < names.size(); ++i) vocab.variables["theta" + names[i]] = kFirstThetaSlot + static_cast<int>(i);
    ScalarFactorExpr out(Raw{});
    out.expr_ = expr::parse(source, vocab);
    out.field_names_ = std::move(names);
    out.params_.assign(static_cast<std::size_t>(out.expr_.parameter_count()), 0.0);
    return out;
  }

  ScalarFactorExpr with_params(std::vector<double> params) const {
    if (static_cast<int>(params.size()) < expr_.parameter_count()) {
      throw InvalidArgument("expression uses " + std::to_string(expr_.parameter_count()) + " parameters, " +
                            std::to_string(params.size()) + " given");
    }
    ScalarFactorExpr out = *this;
    out.params_ = std::move(params);
    return out;
  }

  ScalarFactorExpr with_length_scale(double l) const {
    if (!(l >= 0.0)) throw InvalidArgument("length scale must be non-negative");
    ScalarFactorExpr out = *this;
    out.length_scale_ = l;
    return out;
  }

  const expr::Expression& expression() const { return expr_; }
  const std::vector<double>& params() const { return params_; }
  double length_scale() const { return length_scale_; }
  const std::vector<std::string>& field_names() const { return field_names_; }
  std::string print() const { return expr_.print(); }
  bool is_constant() const { return expr_.is_constant(); }
  bool uses_curvature() const { return expr_.variable_slots().count(kCurvSlot) > 0; }

  /// Fields actually referenced by the expression.
  std::vector<std::string> used_fields() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < field_names_.size(); ++i) {
      if (expr_.variable_slots().count(kFirstThetaSlot + static_cast<int>(i))) out.push_back(field_names_[i]);
    }
    return out;
  }

  int slot_count() const { return kFirstThetaSlot + static_cast<int>(field_names_.size()); }

  /// Argument values (chi, curv, thetas...) at (x, v), in slot order. Throws
  /// SingularArgument where an argument the expression divides by vanishes.
  template <typename T>
  std::vector<T> arguments(const Vec4<T>& x, const Vec4<T>& v, const ArgumentBinding& binding,
                           const BaseMetric& base) const {
    Mat4<T> h = base.components(x);
    std::vector<T> slots(static_cast<std::size_t>(slot_count()), T(0.0));
    std::vector<double> scale(slots.size(), 1.0);
    Vec4<T> hv;
    for (int m = 0; m < kDim; ++m) {
      hv[m] = T(0.0);
      for (int n = 0; n < kDim; ++n) hv[m] = hv[m] + h[m][n] * v[n];
    }
    double hmax = 0.0, vnorm = 0.0;
    for (int m = 0; m < kDim; ++m) {
      vnorm += value_of(v[m]) * value_of(v[m]);
      for (int n = 0; n < kDim; ++n) hmax = std::max(hmax, std::abs(value_of(h[m][n])));
    }
    vnorm = std::sqrt(vnorm);
    const auto& used = expr_.variable_slots();
    if (used.count(kChiSlot)) {
      T chi(0.0);
      for (int m = 0; m < kDim; ++m) chi = chi + hv[m] * v[m];
      slots[kChiSlot] = chi;
      scale[kChiSlot] = hmax * vnorm * vnorm;
    }
    if (used.count(kCurvSlot)) {
      if (binding.curvature_mode == CurvatureMode::constant && !binding.curvature_certified) {
        throw InvalidArgument("curv requires a certified constant-curvature base metric");
      }
      double r = binding.curvature_mode == CurvatureMode::zero ? 0.0 : binding.curvature_value;
      slots[kCurvSlot] = T(length_scale_ * length_scale_ * r);
    }
    for (std::size_t i = 0; i < field_names_.size(); ++i) {
      int slot = kFirstThetaSlot + static_cast<int>(i);
      if (!used.count(slot)) continue;
      auto it = binding.fields.find(field_names_[i]);
      if (it == binding.fields.end()) throw InvalidArgument("field " + field_names_[i] + " is not bound");
      Vec4<T> f = it->second.evaluate(x, base);
      T theta(0.0);
      double fnorm = 0.0;
      for (int m = 0; m < kDim; ++m) {
        theta = theta + hv[m] * f[m];
        fnorm += value_of(f[m]) * value_of(f[m]);
      }
      slots[static_cast<std::size_t>(slot)] = theta;
      scale[static_cast<std::size_t>(slot)] = hmax * vnorm * std::sqrt(fnorm);
    }
    for (int slot : expr_.denominator_slots()) {
      double a = std::abs(value_of(slots[static_cast<std::size_t>(slot)]));
      if (a <= kSingularThreshold * scale[static_cast<std::size_t>(slot)]) {
        throw SingularArgument(slot_name(slot) + " vanishes at this direction (singular locus)");
      }
    }
    return slots;
  }

  /// Signed, normalised values of the arguments the expression divides by.
  /// A sign change between two velocities means the segment crosses the
  /// singular locus.
  std::vector<double> denominator_values(const Vec4<>& x, const Vec4<>& v, const ArgumentBinding& binding,
                                         const BaseMetric& base) const {
    std::vector<double> out;
    if (expr_.denominator_slots().empty()) return out;
    Mat4<> h = base.components(x);
    Vec4<> hv = linalg::mul(h, v);
    double vn = norm2(v);
    for (int slot : expr_.denominator_slots()) {
      if (slot == kChiSlot) {
        double chi = 0.0;
        for (int m = 0; m < kDim; ++m) chi += hv[m] * v[m];
        out.push_back(chi / (vn * vn));
      } else if (slot >= kFirstThetaSlot) {
        const auto& name = field_names_[static_cast<std::size_t>(slot - kFirstThetaSlot)];
        auto it = binding.fields.find(name);
        if (it == binding.fields.end()) throw InvalidArgument("field " + name + " is not bound");
        Vec4<> f = it->second.evaluate(x, base);
        double theta = 0.0;
        for (int m = 0; m < kDim; ++m) theta += hv[m] * f[m];
        out.push_back(theta / (vn * std::max(norm2(f), 1e-300)));
      }
    }
    return out;
  }

  template <typename T>
  T evaluate_arguments(const std::vector<T>& slots) const {
    T r = expr_.evaluate<T>(std::span<const T>(slots), std::span<const double>(params_));
    if (!all_finite(r)) throw NonFinite("phi evaluated to a non-finite value");
    return r;
  }

  /// phi(x, v)
  template <typename T>
  T evaluate(const Vec4<T>& x, const Vec4<T>& v, const ArgumentBinding& binding, const BaseMetric& base) const {
    return evaluate_arguments(arguments(x, v, binding, base));
  }

  double evaluate(const TangentVector& tv, const ArgumentBinding& binding, const BaseMetric& base) const {
    return evaluate<double>(tv.base.coords, tv.comps, binding, base);
  }

  /// d phi / d(argument) for every slot, by forward mode over the arguments.
  std::vector<double> argument_partials(const Vec4<>& x, const Vec4<>& v, const ArgumentBinding& binding,
                                        const BaseMetric& base) const {
    std::vector<double> args = arguments<double>(x, v, binding, base);
    std::vector<double> out(args.size(), 0.0);
    for (int slot : expr_.variable_slots()) {
      std::vector<Dual<double>> seeded(args.size());
      for (std::size_t i = 0; i < args.size(); ++i) {
        seeded[i] = Dual<double>(args[i], static_cast<int>(i) == slot ? 1.0 : 0.0);
      }
      out[static_cast<std::size_t>(slot)] = evaluate_arguments(seeded).eps;
    }
    return out;
  }

  /// d phi / d v^mu by the chain rule through the arguments:
  ///   2 (h v)_mu dphi/dchi + sum_F (h F)_mu dphi/dthetaF.
  Vec4<> gradient_v(const Vec4<>& x, const Vec4<>& v, const ArgumentBinding& binding, const BaseMetric& base) const {
    std::vector<double> dphi = argument_partials(x, v, binding, base);
    Mat4<> h = base.components(x);
    Vec4<> hv = linalg::mul(h, v);
    Vec4<> g{};
    for (int mu = 0; mu < kDim; ++mu) g[mu] = 2.0 * hv[mu] * dphi[kChiSlot];
    for (std::size_t i = 0; i < field_names_.size(); ++i) {
      double d = dphi[kFirstThetaSlot + i];
      if (d == 0.0) continue;
      Vec4<> hf = linalg::mul(h, binding.fields.at(field_names_[i]).evaluate(x, base));
      for (int mu = 0; mu < kDim; ++mu) g[mu] += d * hf[mu];
    }
    return g;
  }

  double derivative_v(const TangentVector& tv, const ArgumentBinding& binding, const BaseMetric& base, int mu) const {
    return gradient_v(tv.base.coords, tv.comps, binding, base)[mu];
  }

  std::string slot_name(int slot) const {
    if (slot == kChiSlot) return "chi";
    if (slot == kCurvSlot) return "curv";
    return "theta" + field_names_[static_cast<std::size_t>(slot - kFirstThetaSlot)];
  }

 private:
  struct Raw {};
  explicit ScalarFactorExpr(Raw) {}

  expr::Expression expr_;
  std::vector<double> params_;
  double length_scale_ = 0.0;
  std::vector<std::string> field_names_;
};

struct HomogeneityReport {
  double max_deviation = 0.0;  // max |phi(lambda v) - phi(v)| / (1 + |phi(v)|)
  bool passed = false;
  int samples = 0;
  int singular_resampled = 0;
  double worst_scale = 1.0;
  /// log|phi(lambda v)/phi(v)| / log(lambda) at the worst sample; 0 for a homogeneous phi.
  double estimated_degree = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> scales;
};

inline constexpr double kHomogeneityTolerance = 1e-10;

/// Numerical 0-homogeneity test of phi over random events and directions.
inline HomogeneityReport homogeneity_check(const ScalarFactorExpr& phi, const ArgumentBinding& binding,
                                           const BaseMetric& base, int samples,
                                           const std::vector<double>& scales = {0.5, 2.0, 10.0},
                                           std::uint64_t seed = SamplingPlan{}.seed) {
  if (samples < 1) throw InvalidArgument("homogeneity check needs at least one sample");
  for (double s : scales)
    if (!(s > 0.0)) throw InvalidArgument("scales must be positive");
  HomogeneityReport rep;
  rep.seed = seed;
  rep.scales = scales;
  Rng rng(seed);
  double worst = -1.0;
  const int max_attempts = 100 * samples;
  int attempts = 0;
  while (rep.samples < samples && attempts++ < max_attempts) {
    Vec4<> x = sample_coords(base.sample_box(), rng);
    Vec4<> v = sample_direction(rng);
    if (base.domain_violation(x)) continue;
    try {
      double p = phi.evaluate<double>(x, v, binding, base);
      for (double s : scales) {
        Vec4<> sv = v;
        for (double& c : sv) c *= s;
        double ps = phi.evaluate<double>(x, sv, binding, base);
        double dev = std::abs(ps - p) / (1.0 + std::abs(p));
        if (dev > worst) {
          worst = dev;
          rep.worst_scale = s;
          rep.estimated_degree =
              (p != 0.0 && ps != 0.0 && s != 1.0) ? std::log(std::abs(ps / p)) / std::log(s) : 0.0;
        }
      }
      ++rep.samples;
    } catch (const SingularArgument&) {
      ++rep.singular_resampled;
    } catch (const NonFinite&) {
      ++rep.singular_resampled;
    }
  }
  rep.max_deviation = std::max(worst, 0.0);
  rep.passed = rep.samples == samples && rep.max_deviation <= kHomogeneityTolerance;
  return rep;
}

}  // namespace berwald
