#pragma once

// Riemann, Ricci, scalar and Einstein tensors of a Berwald-certified
// fundamental tensor, an independent pipeline for the base metric, and the
// comparison of the two Einstein tensors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "berwald/connection.hpp"
#include "berwald/errors.hpp"
#include "berwald/fundamental_tensor.hpp"
#include "berwald/sampling.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

struct CurvatureBundle {
  Event at;
  Vec4<> velocity{};
  Tensor4 riemann{};  // riemann[mu][nu][rho][sigma] = R^mu_{nu rho sigma}
  SymMatrix4 ricci;
  double ricci_asymmetry = 0.0;  // max |R_{nu sigma} - R_{sigma nu}| before symmetrization
  double scalar = 0.0;
  SymMatrix4 einstein;
  BerwaldCertificate certificate;
};

inline constexpr double kChristoffelStep = 1e-4;

namespace detail {

/// R^mu_{nu rho sigma} = d_rho G^mu_{nu sigma} - d_sigma G^mu_{nu rho}
///                      + G^mu_{rho l} G^l_{nu sigma} - G^mu_{sigma l} G^l_{nu rho}
/// with dgamma[rho] = d_rho G.
inline Tensor4 riemann_from(const Tensor3& gamma, const std::array<Tensor3, kDim>& dgamma) {
  Tensor4 r{};
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu)
      for (int rho = 0; rho < kDim; ++rho)
        for (int sg = 0; sg < kDim; ++sg) {
          double s = dgamma[rho][mu][nu][sg] - dgamma[sg][mu][nu][rho];
          for (int l = 0; l < kDim; ++l) s += gamma[mu][rho][l] * gamma[l][nu][sg] - gamma[mu][sg][l] * gamma[l][nu][rho];
          r[mu][nu][rho][sg] = s;
        }
  return r;
}

/// R_{nu sigma} = R^mu_{nu mu sigma}; returns the raw (unsymmetrized) matrix.
inline Mat4<> ricci_from(const Tensor4& r) {
  Mat4<> ric{};
  for (int nu = 0; nu < kDim; ++nu)
    for (int sg = 0; sg < kDim; ++sg)
      for (int mu = 0; mu < kDim; ++mu) ric[nu][sg] += r[mu][nu][mu][sg];
  return ric;
}

inline double asymmetry(const Mat4<>& m) {
  double a = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) a = std::max(a, std::abs(m[i][j] - m[j][i]));
  return a;
}

inline double trace_with(const Mat4<>& inv, const SymMatrix4& m) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s += inv[i][j] * m(i, j);
  return s;
}

inline SymMatrix4 einstein_from(const SymMatrix4& ricci, double scalar, const SymMatrix4& g) {
  SymMatrix4 e;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) e(i, j) = ricci(i, j) - 0.5 * scalar * g(i, j);
  return e;
}

}  // namespace detail

/// Curvature of g at (x, v). Requires a passed Berwald certificate at x.
inline CurvatureBundle curvature(const FundamentalTensor& f, const TangentVector& tv, const BerwaldCertificate& cert) {
  detail::check_chart(f, tv.base);
  if (!cert.passed || !(cert.at.chart == tv.base.chart) || cert.at.coords != tv.base.coords) {
    throw NotBerwald("no passed Berwald certificate at this event");
  }
  const Vec4<>& x = tv.base.coords;
  const Vec4<>& v = tv.comps;
  CurvatureBundle b;
  b.at = tv.base;
  b.velocity = v;
  b.certificate = cert;
  Tensor3 gamma = christoffel_symbols(f, x, v);
  std::array<Tensor3, kDim> dgamma{};
  const double h = kChristoffelStep;
  for (int rho = 0; rho < kDim; ++rho) {
    std::array<Tensor3, 4> s;
    const double offs[4] = {-2 * h, -h, h, 2 * h};
    for (int k = 0; k < 4; ++k) {
      Vec4<> y = x;
      y[rho] += offs[k];
      s[k] = christoffel_symbols(f, y, v);
    }
    for (int a = 0; a < kDim; ++a)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d)
          dgamma[rho][a][c][d] = (s[0][a][c][d] - 8.0 * s[1][a][c][d] + 8.0 * s[2][a][c][d] - s[3][a][c][d]) / (12.0 * h);
  }
  b.riemann = detail::riemann_from(gamma, dgamma);
  Mat4<> ric = detail::ricci_from(b.riemann);
  b.ricci_asymmetry = detail::asymmetry(ric);
  b.ricci = SymMatrix4::symmetrize(ric);
  SymMatrix4 g = evaluate_g(f, tv);
  b.scalar = detail::trace_with(linalg::inverse(g.full()), b.ricci);
  b.einstein = detail::einstein_from(b.ricci, b.scalar, g);
  return b;
}

/// Runs the Berwald check at x with seeded velocities first; throws
/// NotBerwald when it fails.
inline CurvatureBundle curvature(const FundamentalTensor& f, const TangentVector& tv, std::uint64_t seed = SamplingPlan{}.seed) {
  BerwaldCertificate cert = berwald_check(f, tv.base, kCertificateVelocities, seed);
  if (!cert.passed) {
    throw NotBerwald("Christoffel symbols vary with velocity by " + std::to_string(cert.max_variation) + " (tolerance " +
                     std::to_string(cert.tolerance) + ")");
  }
  return curvature(f, tv, cert);
}

/// max |R^mu_{nu rho sigma} + R^mu_{rho sigma nu} + R^mu_{sigma nu rho}|
inline double first_bianchi_residual(const Tensor4& r) {
  double m = 0.0;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d) m = std::max(m, std::abs(r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]));
  return m;
}

/// max |R^mu_{nu rho sigma} + R^mu_{nu sigma rho}|
inline double riemann_antisymmetry_residual(const Tensor4& r) {
  double m = 0.0;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d) m = std::max(m, std::abs(r[a][b][c][d] + r[a][b][d][c]));
  return m;
}

/// max |d_rho g_{mu nu} - G^l_{rho mu} g_{l nu} - G^l_{rho nu} g_{mu l}| at frozen v,
/// with d_rho g by central differences and G by the default route.
inline double metric_compatibility_residual(const FundamentalTensor& f, const TangentVector& tv) {
  const Vec4<>& x = tv.base.coords;
  const Vec4<>& v = tv.comps;
  MetricDerivative dg = metric_x_derivative(f, x, v, DiffMethod::central_difference);
  Tensor3 gamma = christoffel_symbols(f, x, v);
  Mat4<> g = detail::regular([&] { return f.components(x, v); });
  double m = 0.0;
  for (int rho = 0; rho < kDim; ++rho)
    for (int mu = 0; mu < kDim; ++mu)
      for (int nu = 0; nu < kDim; ++nu) {
        double s = dg[rho][mu][nu];
        for (int l = 0; l < kDim; ++l) s -= gamma[l][rho][mu] * g[l][nu] + gamma[l][rho][nu] * g[mu][l];
        m = std::max(m, std::abs(s));
      }
  return m;
}

// ---------------------------------------------------------------------------
// Base metric pipeline. Uses only BaseMetric::evaluate and five-point
// differences, sharing no code with the routes above.

struct BaseCurvature {
  Vec4<> x{};
  Tensor3 christoffel{};
  Tensor4 riemann{};
  SymMatrix4 ricci;
  double scalar = 0.0;
  SymMatrix4 einstein;
};

inline constexpr double kBaseStep = 1e-3;

namespace detail {

template <typename Fn>
auto five_point(Fn&& fn, const Vec4<>& x, int rho, double h) {
  Vec4<> x1 = x, x2 = x, x3 = x, x4 = x;
  x1[rho] -= 2 * h;
  x2[rho] -= h;
  x3[rho] += h;
  x4[rho] += 2 * h;
  auto f1 = fn(x1), f2 = fn(x2), f3 = fn(x3), f4 = fn(x4);
  return std::array<decltype(f1), 4>{f1, f2, f3, f4};
}

inline double five_point_combine(double f1, double f2, double f3, double f4, double h) {
  return (f1 - 8.0 * f2 + 8.0 * f3 - f4) / (12.0 * h);
}

inline Tensor3 base_christoffel(const BaseMetric& base, const Vec4<>& x, double h) {
  std::array<SymMatrix4, kDim> dh{};
  for (int rho = 0; rho < kDim; ++rho) {
    auto s = five_point([&](const Vec4<>& y) { return base.evaluate(y); }, x, rho, h);
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) dh[rho](i, j) = five_point_combine(s[0](i, j), s[1](i, j), s[2](i, j), s[3](i, j), h);
  }
  Eigen::Matrix4d hm = linalg::to_eigen(base.evaluate(x).full());
  Eigen::Matrix4d hinv = hm.fullPivLu().inverse();
  Tensor3 gamma{};
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu)
      for (int rho = 0; rho < kDim; ++rho) {
        double s = 0.0;
        for (int sg = 0; sg < kDim; ++sg) s += hinv(mu, sg) * (dh[nu](sg, rho) + dh[rho](nu, sg) - dh[sg](nu, rho));
        gamma[mu][nu][rho] = 0.5 * s;
      }
  return gamma;
}

}  // namespace detail

/// Curvature of h at x from five-point differences of h and of its Christoffel symbols.
inline BaseCurvature base_curvature(const BaseMetric& base, const Vec4<>& x, double h = kBaseStep) {
  BaseCurvature b;
  b.x = x;
  b.christoffel = detail::base_christoffel(base, x, h);
  std::array<Tensor3, kDim> dgamma{};
  for (int rho = 0; rho < kDim; ++rho) {
    auto s = detail::five_point([&](const Vec4<>& y) { return detail::base_christoffel(base, y, h); }, x, rho, h);
    for (int a = 0; a < kDim; ++a)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d)
          dgamma[rho][a][c][d] = detail::five_point_combine(s[0][a][c][d], s[1][a][c][d], s[2][a][c][d], s[3][a][c][d], h);
  }
  b.riemann = detail::riemann_from(b.christoffel, dgamma);
  b.ricci = SymMatrix4::symmetrize(detail::ricci_from(b.riemann));
  SymMatrix4 hm = base.evaluate(x);
  b.scalar = detail::trace_with(linalg::inverse(hm.full()), b.ricci);
  b.einstein = detail::einstein_from(b.ricci, b.scalar, hm);
  return b;
}

/// Numerical divergence nabla^mu G_{mu nu} of the base Einstein tensor.
inline Vec4<> einstein_divergence(const BaseMetric& base, const Vec4<>& x, double h = 1e-2) {
  std::array<SymMatrix4, kDim> dG{};
  for (int a = 0; a < kDim; ++a) {
    auto s = detail::five_point([&](const Vec4<>& y) { return base_curvature(base, y).einstein; }, x, a, h);
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) dG[a](i, j) = detail::five_point_combine(s[0](i, j), s[1](i, j), s[2](i, j), s[3](i, j), h);
  }
  BaseCurvature c = base_curvature(base, x);
  Mat4<> hinv = linalg::inverse(base.evaluate(x).full());
  Vec4<> div{};
  for (int nu = 0; nu < kDim; ++nu) {
    double s = 0.0;
    for (int mu = 0; mu < kDim; ++mu)
      for (int a = 0; a < kDim; ++a) {
        double cov = dG[a](mu, nu);
        for (int l = 0; l < kDim; ++l) cov -= c.christoffel[l][a][mu] * c.einstein(l, nu) + c.christoffel[l][a][nu] * c.einstein(mu, l);
        s += hinv[a][mu] * cov;
      }
    div[nu] = s;
  }
  return div;
}

/// Constant scalar curvature of h over sampled events, or nullopt when the
/// samples disagree by more than 1e-6 (1 + |R|).
inline std::optional<double> certify_constant_curvature(const BaseMetric& base, int samples, std::uint64_t seed) {
  Rng rng(seed);
  double lo = 1e300, hi = -1e300, sum = 0.0;
  int n = 0, attempts = 0;
  while (n < samples && attempts++ < 100 * samples) {
    Vec4<> x = sample_coords(base.sample_box(), rng);
    if (base.domain_violation(x)) continue;
    double r = base_curvature(base, x).scalar;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
    ++n;
  }
  if (n < samples) return std::nullopt;
  double mean = sum / n;
  if (hi - lo > 1e-6 * (1.0 + std::abs(mean))) return std::nullopt;
  return mean;
}

struct EinsteinCoincidenceReport {
  double max_deviation = 0.0;  // |G[g] - G[h]|_inf
  double base_einstein_norm = 0.0;
  double tolerance = 0.0;      // 1e-6 (1 + |G[h]|_inf)
  bool passed = false;
  double phi = 0.0;
  double scalar_g = 0.0;
  double scalar_h = 0.0;
  double scalar_deviation = 0.0;  // |R_g - R_h / (1 + phi)| / (1 + |R_h / (1 + phi)|)
  bool scalar_passed = false;
};

inline constexpr double kEinsteinTolerance = 1e-6;

inline EinsteinCoincidenceReport einstein_coincidence(const FundamentalTensor& f, const TangentVector& tv,
                                                      std::uint64_t seed = SamplingPlan{}.seed) {
  CurvatureBundle g = curvature(f, tv, seed);
  BaseCurvature h = base_curvature(f.base(), tv.base.coords);
  EinsteinCoincidenceReport r;
  r.max_deviation = linalg::max_abs_diff(g.einstein, h.einstein);
  r.base_einstein_norm = h.einstein.max_abs();
  r.tolerance = kEinsteinTolerance * (1.0 + r.base_einstein_norm);
  r.passed = r.max_deviation <= r.tolerance;
  r.phi = f.conformal_factor(tv.base.coords, tv.comps) - 1.0;
  r.scalar_g = g.scalar;
  r.scalar_h = h.scalar;
  double expected = h.scalar / (1.0 + r.phi);
  r.scalar_deviation = std::abs(g.scalar - expected) / (1.0 + std::abs(expected));
  r.scalar_passed = r.scalar_deviation <= kEinsteinTolerance;
  return r;
}

}  // namespace berwald
