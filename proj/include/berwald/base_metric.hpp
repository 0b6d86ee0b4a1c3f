#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "berwald/dual.hpp"
#include "berwald/errors.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

/// Robertson-Walker scale factor a(t).
struct ScaleFactor {
  enum class Kind { constant, power, exponential };

  Kind kind = Kind::constant;
  double value = 1.0;  // c, p or H

  static ScaleFactor constant(double c) { return {Kind::constant, c}; }
  static ScaleFactor power(double p) { return {Kind::power, p}; }
  static ScaleFactor exponential(double h) { return {Kind::exponential, h}; }

  template <typename T>
  T operator()(const T& t) const {
    using std::exp;
    using std::pow;
    switch (kind) {
      case Kind::constant: return T(value);
      case Kind::power: return pow(t, value);
      case Kind::exponential: return exp(value * t);
    }
    return T(value);
  }

  const char* kind_name() const {
    switch (kind) {
      case Kind::constant: return "constant";
      case Kind::power: return "power";
      case Kind::exponential: return "exponential";
    }
    return "?";
  }
};

/// Axis-aligned coordinate box used for random sampling of events.
struct CoordinateBox {
  Vec4<> lo{};
  Vec4<> hi{};
};

/// The Lorentzian base metric h of signature (-,+,+,+).
class BaseMetric {
 public:
  enum class Family { minkowski, robertson_walker, custom };

  using Callable = std::function<SymMatrix4(const Vec4<>&)>;

  static constexpr double kRadiusFloor = 1e-3;
  static constexpr double kPoleMargin = 1e-3;
  static constexpr double kCurvatureMargin = 1e-3;

  /// Minkowski in cartesian (t,x,y,z) or spherical (t,r,theta,phi) coordinates.
  static BaseMetric minkowski(ChartId chart = kCartesian) {
    if (!(chart == kCartesian) && !(chart == kSpherical)) throw InvalidArgument("minkowski is built for cartesian or spherical charts");
    BaseMetric m;
    m.family_ = Family::minkowski;
    m.chart_ = std::move(chart);
    m.box_ = default_box(m);
    return m;
  }

  /// -dt^2 + a(t)^2 (dr^2/(1 - eps r^2) + r^2 (dtheta^2 + sin^2 theta dphi^2)), spherical chart.
  static BaseMetric robertson_walker(double epsilon, ScaleFactor a) {
    BaseMetric m;
    m.family_ = Family::robertson_walker;
    m.chart_ = kSpherical;
    m.epsilon_ = epsilon;
    m.scale_ = a;
    m.box_ = default_box(m);
    return m;
  }

  /// A user-supplied metric; only finite differences are available for it.
  static BaseMetric custom(ChartId chart, Callable fn, CoordinateBox box) {
    BaseMetric m;
    m.family_ = Family::custom;
    m.chart_ = std::move(chart);
    m.custom_ = std::move(fn);
    m.box_ = box;
    return m;
  }

  Family family() const { return family_; }
  const char* family_name() const {
    switch (family_) {
      case Family::minkowski: return "minkowski";
      case Family::robertson_walker: return "robertson_walker";
      case Family::custom: return "custom";
    }
    return "?";
  }
  const ChartId& chart() const { return chart_; }
  double epsilon() const { return epsilon_; }
  const ScaleFactor& scale_factor() const { return scale_; }
  bool forward_capable() const { return family_ != Family::custom; }

  const CoordinateBox& sample_box() const { return box_; }
  void set_sample_box(const CoordinateBox& b) { box_ = b; }

  /// Largest admissible radius in the spherical chart.
  double radius_limit() const {
    if (family_ == Family::robertson_walker && epsilon_ > 0.0) return std::sqrt((1.0 - kCurvatureMargin) / epsilon_);
    return 1e6;
  }

  /// Why `x` lies outside the chart's validity region, if it does. Coordinate
  /// poles are excluded so that stencils never straddle them.
  std::optional<std::string> domain_violation(const Vec4<>& x) const {
    if (!is_finite(x)) return "non-finite coordinates";
    if (chart_ == kSpherical) {
      if (x[1] < kRadiusFloor) return "r below " + std::to_string(kRadiusFloor);
      if (x[1] > radius_limit()) return "r beyond " + std::to_string(radius_limit());
      if (x[2] < kPoleMargin || x[2] > std::numbers::pi - kPoleMargin) return "theta too close to a pole";
    }
    if (family_ == Family::robertson_walker) {
      if (1.0 - epsilon_ * x[1] * x[1] < kCurvatureMargin) return "1 - eps r^2 below margin";
      double a = scale_(x[0]);
      if (!(a > 0.0) || !std::isfinite(a)) return "scale factor not positive";
    }
    return std::nullopt;
  }

  /// h_{mu nu}(x) for any scalar type; custom metrics accept double only.
  template <typename T>
  Mat4<T> components(const Vec4<T>& x) const {
    using std::sin;
    Mat4<T> h{};
    for (auto& row : h) row.fill(T(0.0));
    switch (family_) {
      case Family::minkowski:
        h[0][0] = T(-1.0);
        if (chart_ == kCartesian) {
          h[1][1] = h[2][2] = h[3][3] = T(1.0);
        } else {
          h[1][1] = T(1.0);
          h[2][2] = x[1] * x[1];
          T s = sin(x[2]);
          h[3][3] = x[1] * x[1] * s * s;
        }
        return h;
      case Family::robertson_walker: {
        T a = scale_(x[0]);
        T a2 = a * a;
        T r2 = x[1] * x[1];
        T s = sin(x[2]);
        h[0][0] = T(-1.0);
        h[1][1] = a2 / (T(1.0) - epsilon_ * r2);
        h[2][2] = a2 * r2;
        h[3][3] = a2 * r2 * s * s;
        return h;
      }
      case Family::custom:
        if constexpr (std::is_same_v<T, double>) {
          return custom_(x).full();
        } else {
          throw InvalidArgument("custom base metrics support finite differences only");
        }
    }
    return h;
  }

  SymMatrix4 evaluate(const Vec4<>& x) const {
    Mat4<> h = components(x);
    return SymMatrix4::symmetrize(h);
  }

 private:
  static CoordinateBox default_box(const BaseMetric& m) {
    if (m.chart_ == kCartesian) return CoordinateBox{{-1.0, -1.0, -1.0, -1.0}, {1.0, 1.0, 1.0, 1.0}};
    double rmax = std::min(2.0, 0.8 * m.radius_limit());
    return CoordinateBox{{0.5, 0.2, 0.3, -std::numbers::pi}, {3.0, rmax, std::numbers::pi - 0.3, std::numbers::pi}};
  }

  Family family_ = Family::minkowski;
  ChartId chart_ = kCartesian;
  double epsilon_ = 0.0;
  ScaleFactor scale_{};
  Callable custom_;
  CoordinateBox box_{};
};

}  // namespace berwald
