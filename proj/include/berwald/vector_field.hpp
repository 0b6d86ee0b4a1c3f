#pragma once

#include <array>
#include <charconv>
#include <string>
#include <string_view>

#include "berwald/base_metric.hpp"
#include "berwald/expression.hpp"

namespace berwald {

/// A scalar function of the coordinates of a base metric's chart. Besides the
/// coordinate names (t,x,y,z or t,r,theta,phi; always also x0..x3) it may use
/// `eps` (RW curvature) and `a` (scale factor at the current t).
class CoordinateExpression {
 public:
  CoordinateExpression() : CoordinateExpression(kCartesian, "0") {}

  CoordinateExpression(const ChartId& chart, std::string_view source)
      : expr_(expr::parse(source, vocabulary(chart))) {}

  static expr::Vocabulary vocabulary(const ChartId& chart) {
    expr::Vocabulary v;
    v.functions = {expr::Function::exp, expr::Function::log, expr::Function::sqrt, expr::Function::sin,
                   expr::Function::cos};
    for (int i = 0; i < kDim; ++i) v.variables["x" + std::to_string(i)] = i;
    if (chart == kCartesian) {
      v.variables["t"] = 0;
      v.variables["x"] = 1;
      v.variables["y"] = 2;
      v.variables["z"] = 3;
    } else if (chart == kSpherical) {
      v.variables["t"] = 0;
      v.variables["r"] = 1;
      v.variables["theta"] = 2;
      v.variables["phi"] = 3;
    }
    v.variables["eps"] = 4;
    v.variables["a"] = 5;
    return v;
  }

  template <typename T>
  T evaluate(const Vec4<T>& x, const BaseMetric& base) const {
    std::array<T, 6> slots{x[0], x[1], x[2], x[3], T(base.epsilon()), base.scale_factor()(x[0])};
    return expr_.evaluate<T>(std::span<const T>(slots), std::span<const double>());
  }

  const expr::Expression& expression() const { return expr_; }
  std::string print() const { return expr_.print(); }
  const std::string& source() const { return expr_.source(); }
  bool is_constant() const { return expr_.is_constant(); }

 private:
  expr::Expression expr_;
};

/// Vector field given by coordinate component expressions in one chart.
class VectorField {
 public:
  VectorField() = default;

  VectorField(const ChartId& chart, const std::array<std::string, kDim>& sources) : chart_(chart) {
    for (int i = 0; i < kDim; ++i) comps_[i] = CoordinateExpression(chart, sources[i]);
  }

  /// Constant components, e.g. d/dt = {1, 0, 0, 0}.
  static VectorField constant(const ChartId& chart, const Vec4<>& c) {
    std::array<std::string, kDim> src;
    for (int i = 0; i < kDim; ++i) {
      char buf[32];
      auto res = std::to_chars(buf, buf + sizeof(buf), c[i]);
      src[i] = std::string(buf, res.ptr);
    }
    return VectorField(chart, src);
  }

  const ChartId& chart() const { return chart_; }
  const CoordinateExpression& component(int i) const { return comps_[i]; }

  template <typename T>
  Vec4<T> evaluate(const Vec4<T>& x, const BaseMetric& base) const {
    Vec4<T> out;
    for (int i = 0; i < kDim; ++i) out[i] = comps_[i].evaluate(x, base);
    return out;
  }

  std::array<std::string, kDim> sources() const {
    std::array<std::string, kDim> s;
    for (int i = 0; i < kDim; ++i) s[i] = comps_[i].source();
    return s;
  }

 private:
  ChartId chart_ = kCartesian;
  std::array<CoordinateExpression, kDim> comps_;
};

}  // namespace berwald
