#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "berwald/base_metric.hpp"
#include "berwald/errors.hpp"
#include "berwald/scalar_factor.hpp"
#include "berwald/tensor.hpp"
#include "berwald/vector_field.hpp"

namespace berwald {

/// g_{mu nu}(x, v) = (1 + phi(x, v)) h_{mu nu}(x).
class FundamentalTensor {
 public:
  FundamentalTensor() = default;

  explicit FundamentalTensor(BaseMetric base, ScalarFactorExpr phi = {}, ArgumentBinding binding = {})
      : base_(std::move(base)), phi_(std::move(phi)), binding_(std::move(binding)) {}

  const BaseMetric& base() const { return base_; }
  const ScalarFactorExpr& phi() const { return phi_; }
  const ArgumentBinding& binding() const { return binding_; }
  const ChartId& chart() const { return base_.chart(); }

  const std::optional<VectorField>& time_orientation() const { return orientation_; }
  FundamentalTensor with_time_orientation(VectorField t) const {
    FundamentalTensor f = *this;
    f.orientation_ = std::move(t);
    return f;
  }

  /// Multiplies phi by a function of the coordinates. This breaks the
  /// velocity-only dependence of phi; it exists so that the Berwald test has
  /// a negative control.
  const std::optional<CoordinateExpression>& phi_modulation() const { return modulation_; }
  FundamentalTensor with_phi_modulation(CoordinateExpression m) const {
    FundamentalTensor f = *this;
    f.modulation_ = std::move(m);
    return f;
  }

  /// Same base metric with phi = 0.
  FundamentalTensor base_only() const {
    FundamentalTensor f(base_);
    f.orientation_ = orientation_;
    return f;
  }

  /// phi(x, v), including the modulation when present.
  template <typename T>
  T phi_value(const Vec4<T>& x, const Vec4<T>& v) const {
    T p = phi_.is_constant() ? phi_.evaluate_arguments(std::vector<T>(static_cast<std::size_t>(phi_.slot_count()), T(0.0)))
                             : phi_.evaluate(x, v, binding_, base_);
    if (modulation_) p = p * modulation_->evaluate(x, base_);
    return p;
  }

  /// Conformal factor 1 + phi; throws BoundViolation when it is not positive.
  template <typename T>
  T conformal_factor(const Vec4<T>& x, const Vec4<T>& v) const {
    T c = T(1.0) + phi_value(x, v);
    if (!(value_of(c) > 0.0)) {
      throw BoundViolation("1 + phi = " + std::to_string(value_of(c)) + " is not positive");
    }
    return c;
  }

  /// Components g_{mu nu}(x, v) over any scalar type.
  template <typename T>
  Mat4<T> components(const Vec4<T>& x, const Vec4<T>& v) const {
    Mat4<T> h = base_.components(x);
    T c = conformal_factor(x, v);
    for (auto& row : h)
      for (auto& e : row) e = c * e;
    return h;
  }

  bool forward_capable() const { return base_.forward_capable(); }

 private:
  BaseMetric base_ = BaseMetric::minkowski();
  ScalarFactorExpr phi_;
  ArgumentBinding binding_;
  std::optional<VectorField> orientation_;
  std::optional<CoordinateExpression> modulation_;
};

namespace detail {

inline void check_chart(const FundamentalTensor& f, const Event& e) {
  if (!(e.chart == f.chart())) {
    throw InvalidArgument("event in chart " + e.chart.name + ", metric defined on " + f.chart().name);
  }
}

/// Runs `fn`, reporting singular arguments as SingularEvaluation.
template <typename Fn>
auto regular(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SingularArgument& e) {
    throw SingularEvaluation(e.what());
  }
}

}  // namespace detail

/// g(x, v) as a symmetric matrix.
inline SymMatrix4 evaluate_g(const FundamentalTensor& f, const TangentVector& tv) {
  detail::check_chart(f, tv.base);
  return detail::regular([&] { return SymMatrix4::symmetrize(f.components<double>(tv.base.coords, tv.comps)); });
}

/// L(x, v) = (1 + phi) h(v, v), computed without forming g.
inline double lagrangian(const FundamentalTensor& f, const TangentVector& tv) {
  detail::check_chart(f, tv.base);
  return detail::regular([&] {
    const Vec4<>& x = tv.base.coords;
    const Vec4<>& v = tv.comps;
    double c = f.conformal_factor(x, v);
    return c * f.base().evaluate(x).contract(v, v);
  });
}

struct CausalClass {
  CausalType type = CausalType::timelike;
  std::optional<bool> future;  // set only when a time orientation exists
};

inline constexpr double kLightlikeBand = 1e-12;

/// Sign of L with a relative band for lightlike, plus future/past from g(v, T) < 0.
inline CausalClass classify_causal(const FundamentalTensor& f, const TangentVector& tv) {
  double l = lagrangian(f, tv);
  double n2 = norm2(tv.comps) * norm2(tv.comps);
  CausalClass c;
  c.type = std::abs(l) <= kLightlikeBand * n2 ? CausalType::lightlike
           : l < 0.0                          ? CausalType::timelike
                                              : CausalType::spacelike;
  if (f.time_orientation()) {
    SymMatrix4 g = evaluate_g(f, tv);
    Vec4<> t = f.time_orientation()->evaluate(tv.base.coords, f.base());
    c.future = g.contract(tv.comps, t) < 0.0;
  }
  return c;
}

namespace families {

/// Source of the worked example: phi = exp(p0 thetaA^2 / thetaB^2) - 1.
inline constexpr const char* kExponentialRatioPhi = "exp(p0 * thetaA^2 / thetaB^2) - 1";

/// A = d/dx of the cartesian chart, written in the requested chart.
inline VectorField cartesian_x_direction(const ChartId& chart) {
  if (chart == kCartesian) return VectorField::constant(kCartesian, {0.0, 1.0, 0.0, 0.0});
  return VectorField(kSpherical, {"0", "sin(theta) * cos(phi)", "cos(theta) * cos(phi) / r", "-sin(phi) / (r * sin(theta))"});
}

/// g = (1 + phi) eta with the given phi, A = d/dx, B = T = d/dt.
inline FundamentalTensor flat_deformed(const ChartId& chart, const std::string& phi_source, std::vector<double> params) {
  ArgumentBinding b;
  b.fields["A"] = cartesian_x_direction(chart);
  b.fields["B"] = VectorField::constant(chart, {1.0, 0.0, 0.0, 0.0});
  auto phi = ScalarFactorExpr::parse(phi_source).with_params(std::move(params));
  return FundamentalTensor(BaseMetric::minkowski(chart), phi, b)
      .with_time_orientation(VectorField::constant(chart, {1.0, 0.0, 0.0, 0.0}));
}

/// g = (1 + phi) eta in the spherical chart with A = d/dr, B = T = d/dt, so
/// thetaA = v^r and thetaB = -v^t do not depend on the event at fixed
/// components. Straight lines are autoparallels.
inline FundamentalTensor flat_deformed_radial(const std::string& phi_source, std::vector<double> params) {
  ArgumentBinding b;
  b.fields["A"] = VectorField::constant(kSpherical, {0.0, 1.0, 0.0, 0.0});
  b.fields["B"] = VectorField::constant(kSpherical, {1.0, 0.0, 0.0, 0.0});
  auto phi = ScalarFactorExpr::parse(phi_source).with_params(std::move(params));
  return FundamentalTensor(BaseMetric::minkowski(kSpherical), phi, b)
      .with_time_orientation(VectorField::constant(kSpherical, {1.0, 0.0, 0.0, 0.0}));
}

/// Deformed Robertson-Walker: phi = exp(p0 thetaA^2/thetaB^2) - 1 with
/// A = (1 - eps r^2)/a^2 d/dr and B = T = d/dt, so thetaA^2/thetaB^2 = (dr/dt)^2.
inline FundamentalTensor deformed_robertson_walker(double epsilon, ScaleFactor a, double p0,
                                                   const std::string& phi_source = kExponentialRatioPhi) {
  ArgumentBinding b;
  b.fields["A"] = VectorField(kSpherical, {"0", "(1 - eps * r^2) / a^2", "0", "0"});
  b.fields["B"] = VectorField::constant(kSpherical, {1.0, 0.0, 0.0, 0.0});
  auto phi = ScalarFactorExpr::parse(phi_source).with_params({p0});
  return FundamentalTensor(BaseMetric::robertson_walker(epsilon, a), phi, b)
      .with_time_orientation(VectorField::constant(kSpherical, {1.0, 0.0, 0.0, 0.0}));
}

/// g = (1 + c) h for a constant c.
inline FundamentalTensor constant_factor(BaseMetric base, double c) {
  auto phi = ScalarFactorExpr::parse("p0").with_params({c});
  const ChartId chart = base.chart();
  return FundamentalTensor(std::move(base), phi, {}).with_time_orientation(VectorField::constant(chart, {1.0, 0.0, 0.0, 0.0}));
}

}  // namespace families
}  // namespace berwald
