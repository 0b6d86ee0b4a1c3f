#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "berwald/errors.hpp"

namespace berwald {

inline constexpr int kDim = 4;

template <typename T = double>
using Vec4 = std::array<T, kDim>;

template <typename T = double>
using Mat4 = std::array<std::array<T, kDim>, kDim>;

/// T[a][b][c]; for connection coefficients the first index is the upper one.
using Tensor3 = std::array<std::array<std::array<double, kDim>, kDim>, kDim>;
using Tensor4 = std::array<Tensor3, kDim>;

/// Name of a coordinate chart, e.g. "cartesian" (t,x,y,z) or "spherical" (t,r,theta,phi).
struct ChartId {
  std::string name;

  friend bool operator==(const ChartId&, const ChartId&) = default;
};

inline const ChartId kCartesian{"cartesian"};
inline const ChartId kSpherical{"spherical"};

/// A spacetime point in a chart.
struct Event {
  ChartId chart;
  Vec4<> coords{};
};

/// A velocity attached to an event; must lie in the slit tangent bundle.
struct TangentVector {
  Event base;
  Vec4<> comps{};
};

inline bool is_finite(const Vec4<>& v) {
  return std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); });
}

inline double norm_inf(const Vec4<>& v) {
  double m = 0.0;
  for (double c : v) m = std::max(m, std::abs(c));
  return m;
}

inline double norm2(const Vec4<>& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

inline Event make_event(ChartId chart, Vec4<> coords) {
  if (!is_finite(coords)) throw InvalidArgument("event coordinates must be finite");
  return Event{std::move(chart), coords};
}

inline TangentVector make_tangent(const Event& base, Vec4<> comps) {
  if (!is_finite(comps)) throw InvalidArgument("tangent components must be finite");
  if (norm_inf(comps) == 0.0) throw InvalidArgument("zero tangent vector lies outside the slit tangent bundle");
  return TangentVector{base, comps};
}

/// Symmetric 4x4 matrix stored by its 10 independent entries, so symmetry is exact.
class SymMatrix4 {
 public:
  SymMatrix4() { data_.fill(0.0); }

  static SymMatrix4 diagonal(const Vec4<>& d) {
    SymMatrix4 m;
    for (int i = 0; i < kDim; ++i) m(i, i) = d[i];
    return m;
  }

  /// Symmetric part of a full matrix.
  static SymMatrix4 symmetrize(const Mat4<>& a) {
    SymMatrix4 m;
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) m(i, j) = 0.5 * (a[i][j] + a[j][i]);
    return m;
  }

  double& operator()(int i, int j) { return data_[index(i, j)]; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }

  Mat4<> full() const {
    Mat4<> a{};
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) a[i][j] = (*this)(i, j);
    return a;
  }

  /// m(u, w) = m_ij u^i w^j
  double contract(const Vec4<>& u, const Vec4<>& w) const {
    double s = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) s += (*this)(i, j) * u[i] * w[j];
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double d : data_) m = std::max(m, std::abs(d));
    return m;
  }

  bool finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double d) { return std::isfinite(d); });
  }

  friend bool operator==(const SymMatrix4&, const SymMatrix4&) = default;

 private:
  static int index(int i, int j) {
    if (i > j) std::swap(i, j);
    // row-major upper triangle: (0,0..3)=0..3, (1,1..3)=4..6, (2,2..3)=7..8, (3,3)=9
    static constexpr int offset[kDim] = {0, 4, 7, 9};
    return offset[i] + (j - i);
  }

  std::array<double, 10> data_;
};

namespace linalg {

inline Eigen::Matrix4d to_eigen(const Mat4<>& a) {
  Eigen::Matrix4d m;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) m(i, j) = a[i][j];
  return m;
}

inline Mat4<> from_eigen(const Eigen::Matrix4d& m) {
  Mat4<> a{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) a[i][j] = m(i, j);
  return a;
}

inline double determinant(const Mat4<>& a) { return to_eigen(a).determinant(); }

/// Inverse by partially pivoted LU. Throws DegenerateMetric below the determinant floor.
inline Mat4<> inverse(const Mat4<>& a, double det_floor = 1e-12) {
  Eigen::PartialPivLU<Eigen::Matrix4d> lu(to_eigen(a));
  double det = lu.determinant();
  if (!(std::abs(det) >= det_floor)) {
    throw DegenerateMetric("|det| = " + std::to_string(std::abs(det)) + " below " + std::to_string(det_floor));
  }
  return from_eigen(lu.inverse());
}

/// Ascending eigenvalues of a symmetric matrix.
inline Vec4<> eigenvalues(const SymMatrix4& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(to_eigen(m.full()), Eigen::EigenvaluesOnly);
  Vec4<> ev{};
  for (int i = 0; i < kDim; ++i) ev[i] = solver.eigenvalues()(i);
  return ev;
}

inline Vec4<> mul(const Mat4<>& a, const Vec4<>& v) {
  Vec4<> r{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) r[i] += a[i][j] * v[j];
  return r;
}

inline Mat4<> mul(const Mat4<>& a, const Mat4<>& b) {
  Mat4<> r{};
  for (int i = 0; i < kDim; ++i)
    for (int k = 0; k < kDim; ++k)
      for (int j = 0; j < kDim; ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Mat4<> transpose(const Mat4<>& a) {
  Mat4<> r{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) r[i][j] = a[j][i];
  return r;
}

inline double max_abs(const Tensor3& t) {
  double m = 0.0;
  for (const auto& a : t)
    for (const auto& b : a)
      for (double c : b) m = std::max(m, std::abs(c));
  return m;
}

inline double max_abs(const Tensor4& t) {
  double m = 0.0;
  for (const auto& a : t) m = std::max(m, max_abs(a));
  return m;
}

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) m = std::max(m, std::abs(a[i][j][k] - b[i][j][k]));
  return m;
}

inline double max_abs_diff(const SymMatrix4& a, const SymMatrix4& b) {
  double m = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

/// Gram-Schmidt of the coordinate basis (or `seed` columns) against a
/// Lorentzian form m. frame[a] is the a-th vector; frame[0] is timelike.
inline std::array<Vec4<>, kDim> orthonormal_frame(const SymMatrix4& m, std::array<Vec4<>, kDim> seed = {
                                                                            Vec4<>{1, 0, 0, 0}, Vec4<>{0, 1, 0, 0},
                                                                            Vec4<>{0, 0, 1, 0}, Vec4<>{0, 0, 0, 1}}) {
  std::array<Vec4<>, kDim> e{};
  Vec4<> sign{};
  for (int a = 0; a < kDim; ++a) {
    Vec4<> u = seed[a];
    for (int b = 0; b < a; ++b) {
      double c = m.contract(u, e[b]) * sign[b];
      for (int i = 0; i < kDim; ++i) u[i] -= c * e[b][i];
    }
    double n = m.contract(u, u);
    if (!(std::abs(n) > 1e-14)) throw DegenerateMetric("frame vector " + std::to_string(a) + " is null");
    sign[a] = n < 0 ? -1.0 : 1.0;
    for (double& c : u) c /= std::sqrt(std::abs(n));
    e[a] = u;
  }
  if (sign[0] > 0) throw InvalidArgument("first frame vector is not timelike");
  return e;
}

}  // namespace linalg
}  // namespace berwald
