#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "berwald/dual.hpp"
#include "berwald/errors.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

/// A registered diffeomorphism between two charts: the coordinate map, its
/// inverse and the Jacobian d(map)/dx (rows: target coordinate).
struct ChartMap {
  ChartId from;
  ChartId to;
  std::function<Vec4<>(const Vec4<>&)> map;
  std::function<Vec4<>(const Vec4<>&)> inverse;
  std::function<Mat4<>(const Vec4<>&)> jacobian;
};

/// Jacobian of a map written generically over the scalar type, by forward mode.
template <typename F>
Mat4<> forward_jacobian(const F& f, const Vec4<>& x) {
  Mat4<> jac{};
  for (int col = 0; col < kDim; ++col) {
    Vec4<Dual<double>> xd;
    for (int i = 0; i < kDim; ++i) xd[i] = Dual<double>(x[i], i == col ? 1.0 : 0.0);
    Vec4<Dual<double>> y = f(xd);
    for (int row = 0; row < kDim; ++row) jac[row][col] = y[row].eps;
  }
  return jac;
}

namespace charts {

/// (t, r, theta, phi) -> (t, x, y, z)
template <typename T>
Vec4<T> spherical_to_cartesian(const Vec4<T>& s) {
  using std::cos;
  using std::sin;
  const T& r = s[1];
  return {s[0], r * sin(s[2]) * cos(s[3]), r * sin(s[2]) * sin(s[3]), r * cos(s[2])};
}

/// (t, x, y, z) -> (t, r, theta, phi), phi in (-pi, pi].
inline Vec4<> cartesian_to_spherical(const Vec4<>& c) {
  double rho = std::hypot(c[1], c[2]);
  double r = std::hypot(rho, c[3]);
  return {c[0], r, std::atan2(rho, c[3]), std::atan2(c[2], c[1])};
}

}  // namespace charts

class ChartRegistry {
 public:
  /// Cartesian and spherical charts with the maps between them.
  static ChartRegistry builtin() {
    ChartRegistry reg;
    reg.register_chart(kCartesian);
    reg.register_chart(kSpherical);
    auto sph_jac = [](const Vec4<>& s) {
      return forward_jacobian([](const auto& y) { return charts::spherical_to_cartesian(y); }, s);
    };
    reg.register_map(ChartMap{kSpherical, kCartesian,
                              [](const Vec4<>& s) { return charts::spherical_to_cartesian(s); },
                              charts::cartesian_to_spherical, sph_jac});
    reg.register_map(ChartMap{kCartesian, kSpherical, charts::cartesian_to_spherical,
                              [](const Vec4<>& s) { return charts::spherical_to_cartesian(s); },
                              [sph_jac](const Vec4<>& c) {
                                return linalg::inverse(sph_jac(charts::cartesian_to_spherical(c)), 0.0);
                              }});
    return reg;
  }

  void register_chart(const ChartId& id) {
    if (!has_chart(id)) charts_.push_back(id);
  }

  bool has_chart(const ChartId& id) const {
    for (const auto& c : charts_)
      if (c == id) return true;
    return false;
  }

  void register_map(ChartMap m) {
    if (!has_chart(m.from) || !has_chart(m.to)) {
      throw InvalidArgument("chart map between unregistered charts " + m.from.name + " -> " + m.to.name);
    }
    auto key = std::make_pair(m.from.name, m.to.name);
    maps_[key] = std::move(m);
  }

  /// The registered map between two charts; identity when they coincide.
  ChartMap find(const ChartId& from, const ChartId& to) const {
    if (!has_chart(from) || !has_chart(to)) throw InvalidArgument("unregistered chart " + from.name + " or " + to.name);
    if (from == to) {
      auto id = [](const Vec4<>& x) { return x; };
      return ChartMap{from, to, id, id, [](const Vec4<>&) {
                        Mat4<> e{};
                        for (int i = 0; i < kDim; ++i) e[i][i] = 1.0;
                        return e;
                      }};
    }
    auto it = maps_.find(std::make_pair(from.name, to.name));
    if (it == maps_.end()) throw InvalidArgument("no chart map " + from.name + " -> " + to.name);
    return it->second;
  }

 private:
  std::vector<ChartId> charts_;
  std::map<std::pair<std::string, std::string>, ChartMap> maps_;
};

/// Push an event and a velocity attached to it through a chart map.
inline std::pair<Event, TangentVector> change_chart(const Event& e, const TangentVector& v, const ChartMap& m) {
  if (!(e.chart == m.from)) throw InvalidArgument("event is in chart " + e.chart.name + ", map starts at " + m.from.name);
  Mat4<> jac = m.jacobian(e.coords);
  double det = linalg::determinant(jac);
  if (!(std::abs(det) >= 1e-12)) throw SingularJacobian("|det J| = " + std::to_string(std::abs(det)));
  Event out{m.to, m.map(e.coords)};
  TangentVector vout{out, linalg::mul(jac, v.comps)};
  return {out, vout};
}

}  // namespace berwald
