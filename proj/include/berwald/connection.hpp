#pragma once

// Christoffel symbols of g at frozen velocity, the Berwald certificate (the
// symbols do not depend on the velocity), and the Cartan tensor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "berwald/differentiation.hpp"
#include "berwald/dual.hpp"
#include "berwald/errors.hpp"
#include "berwald/fundamental_tensor.hpp"
#include "berwald/sampling.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

/// dg[rho][mu][nu] = d g_{mu nu} / d x^rho at frozen v.
using MetricDerivative = std::array<Mat4<>, kDim>;

struct BerwaldCertificate {
  Event at;
  double max_variation = 0.0;  // max over components of the spread across velocities
  double gamma_norm = 0.0;     // max |gamma| over all samples
  double tolerance = 0.0;      // 1e-8 (1 + gamma_norm)
  int samples = 0;
  std::uint64_t seed = 0;
  bool passed = false;
};

struct ChristoffelField {
  Event at;
  Vec4<> velocity{};
  Tensor3 symbols{};  // symbols[mu][nu][rho] = gamma^mu_{nu rho}
  std::optional<BerwaldCertificate> berwald_certificate;
};

inline constexpr double kBerwaldTolerance = 1e-8;
inline constexpr int kCertificateVelocities = 12;

/// Horizontal derivatives of g. Forward mode when the base metric supports
/// it, else central differences.
inline MetricDerivative metric_x_derivative(const FundamentalTensor& f, const Vec4<>& x, const Vec4<>& v,
                                            DiffMethod method = DiffMethod::forward_mode) {
  MetricDerivative dg{};
  if (method == DiffMethod::forward_mode && f.forward_capable()) {
    using D = Dual<double>;
    Vec4<D> vd;
    for (int i = 0; i < kDim; ++i) vd[i] = D(v[i]);
    for (int rho = 0; rho < kDim; ++rho) {
      Vec4<D> xd;
      for (int i = 0; i < kDim; ++i) xd[i] = D(x[i], i == rho ? 1.0 : 0.0);
      Mat4<D> g = detail::regular([&] { return f.components(xd, vd); });
      for (int m = 0; m < kDim; ++m)
        for (int n = 0; n < kDim; ++n) {
          if (!std::isfinite(g[m][n].eps)) throw NonFinite("non-finite metric derivative");
          dg[rho][m][n] = g[m][n].eps;
        }
    }
    return dg;
  }
  for (int rho = 0; rho < kDim; ++rho) {
    double h = fd::step_for(x[rho]);
    Vec4<> xp = x, xm = x;
    xp[rho] += h;
    xm[rho] -= h;
    Mat4<> gp = detail::regular([&] { return f.components(xp, v); });
    Mat4<> gm = detail::regular([&] { return f.components(xm, v); });
    for (int m = 0; m < kDim; ++m)
      for (int n = 0; n < kDim; ++n) dg[rho][m][n] = (gp[m][n] - gm[m][n]) / (2.0 * h);
  }
  return dg;
}

/// gamma^mu_{nu rho} = 1/2 g^{mu sigma} (d_nu g_{sigma rho} + d_rho g_{nu sigma} - d_sigma g_{nu rho}),
/// symmetric in (nu, rho) by construction.
inline Tensor3 christoffel_from(const Mat4<>& ginv, const MetricDerivative& dg) {
  Tensor3 gamma{};
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu)
      for (int rho = nu; rho < kDim; ++rho) {
        double s = 0.0;
        for (int sg = 0; sg < kDim; ++sg) s += ginv[mu][sg] * (dg[nu][sg][rho] + dg[rho][nu][sg] - dg[sg][nu][rho]);
        gamma[mu][nu][rho] = gamma[mu][rho][nu] = 0.5 * s;
      }
  return gamma;
}

inline Tensor3 christoffel_symbols(const FundamentalTensor& f, const Vec4<>& x, const Vec4<>& v,
                                   DiffMethod method = DiffMethod::forward_mode) {
  Mat4<> g = detail::regular([&] { return f.components(x, v); });
  Mat4<> ginv = linalg::inverse(g);
  return christoffel_from(ginv, metric_x_derivative(f, x, v, method));
}

inline ChristoffelField christoffel(const FundamentalTensor& f, const TangentVector& tv,
                                    DiffMethod method = DiffMethod::forward_mode) {
  detail::check_chart(f, tv.base);
  ChristoffelField out;
  out.at = tv.base;
  out.velocity = tv.comps;
  out.symbols = christoffel_symbols(f, tv.base.coords, tv.comps, method);
  if (linalg::max_abs(out.symbols) != linalg::max_abs(out.symbols)) throw NonFinite("non-finite Christoffel symbols");
  return out;
}

/// Regular velocities at x: half timelike, half spacelike under g.
inline std::vector<Vec4<>> sample_velocities(const FundamentalTensor& f, const Vec4<>& x, int count, Rng& rng) {
  std::vector<Vec4<>> out;
  int timelike = 0, spacelike = 0;
  const int half = count / 2;
  for (int attempt = 0; attempt < 200 * count && static_cast<int>(out.size()) < count; ++attempt) {
    Vec4<> v = sample_direction(rng);
    if (attempt % 2 == 0) v[0] = (v[0] >= 0 ? 1.0 : -1.0) * (1.5 + std::abs(v[0]));  // bias towards timelike
    try {
      double l = lagrangian(f, TangentVector{Event{f.chart(), x}, v});
      (void)christoffel_symbols(f, x, v);
      if (l < 0.0 && timelike < count - half) {
        ++timelike;
        out.push_back(v);
      } else if (l > 0.0 && spacelike < half) {
        ++spacelike;
        out.push_back(v);
      }
    } catch (const Error&) {
      // singular or unbounded direction: resample
    }
  }
  return out;
}

/// Certify that the Christoffel symbols at x do not depend on the velocity.
inline BerwaldCertificate berwald_check(const FundamentalTensor& f, const Event& at, const std::vector<Vec4<>>& velocities,
                                        std::uint64_t seed = 0) {
  detail::check_chart(f, at);
  std::vector<Tensor3> gammas;
  bool has_timelike = false, has_spacelike = false;
  for (const auto& v : velocities) {
    try {
      double l = lagrangian(f, TangentVector{at, v});
      gammas.push_back(christoffel_symbols(f, at.coords, v));
      has_timelike |= l < 0.0;
      has_spacelike |= l > 0.0;
    } catch (const SingularEvaluation&) {
    } catch (const NonFinite&) {
    }
  }
  if (gammas.size() < 8 || !has_timelike || !has_spacelike) {
    throw InsufficientSamples("need >= 8 regular velocities spanning timelike and spacelike directions, got " +
                              std::to_string(gammas.size()));
  }
  BerwaldCertificate c;
  c.at = at;
  c.samples = static_cast<int>(gammas.size());
  c.seed = seed;
  for (int m = 0; m < kDim; ++m)
    for (int n = 0; n < kDim; ++n)
      for (int r = 0; r < kDim; ++r) {
        double lo = gammas[0][m][n][r], hi = lo;
        for (const auto& g : gammas) {
          lo = std::min(lo, g[m][n][r]);
          hi = std::max(hi, g[m][n][r]);
          c.gamma_norm = std::max(c.gamma_norm, std::abs(g[m][n][r]));
        }
        c.max_variation = std::max(c.max_variation, hi - lo);
      }
  c.tolerance = kBerwaldTolerance * (1.0 + c.gamma_norm);
  c.passed = c.max_variation <= c.tolerance;
  return c;
}

/// Berwald check with `count` seeded random velocities.
inline BerwaldCertificate berwald_check(const FundamentalTensor& f, const Event& at, int count, std::uint64_t seed) {
  Rng rng(seed);
  return berwald_check(f, at, sample_velocities(f, at.coords, count, rng), seed);
}

enum class CartanPath { definition_forward, definition_difference, closed_form };

/// C_{mu nu rho} = 1/2 d g_{nu rho} / d v^mu.
///
/// The closed form uses g = (1 + phi) h: C_{mu nu rho} = 1/2 h_{nu rho} d phi/d v^mu,
/// with d phi/d v^mu from the chain rule through chi and the thetas.
inline Tensor3 cartan(const FundamentalTensor& f, const TangentVector& tv, CartanPath path = CartanPath::definition_forward) {
  detail::check_chart(f, tv.base);
  const Vec4<>& x = tv.base.coords;
  const Vec4<>& v = tv.comps;
  Tensor3 c{};
  switch (path) {
    case CartanPath::definition_forward: {
      if (!f.forward_capable()) return cartan(f, tv, CartanPath::definition_difference);
      using D = Dual<double>;
      Vec4<D> xd;
      for (int i = 0; i < kDim; ++i) xd[i] = D(x[i]);
      for (int mu = 0; mu < kDim; ++mu) {
        Vec4<D> vd;
        for (int i = 0; i < kDim; ++i) vd[i] = D(v[i], i == mu ? 1.0 : 0.0);
        Mat4<D> g = detail::regular([&] { return f.components(xd, vd); });
        for (int n = 0; n < kDim; ++n)
          for (int r = 0; r < kDim; ++r) c[mu][n][r] = 0.5 * g[n][r].eps;
      }
      break;
    }
    case CartanPath::definition_difference: {
      for (int mu = 0; mu < kDim; ++mu) {
        double h = fd::step_for(v[mu]);
        Vec4<> vp = v, vm = v;
        vp[mu] += h;
        vm[mu] -= h;
        Mat4<> gp = detail::regular([&] { return f.components(x, vp); });
        Mat4<> gm = detail::regular([&] { return f.components(x, vm); });
        for (int n = 0; n < kDim; ++n)
          for (int r = 0; r < kDim; ++r) c[mu][n][r] = 0.25 * (gp[n][r] - gm[n][r]) / h;
      }
      break;
    }
    case CartanPath::closed_form: {
      if (f.phi().is_constant()) break;
      Vec4<> dphi = detail::regular([&] { return f.phi().gradient_v(x, v, f.binding(), f.base()); });
      double m = f.phi_modulation() ? f.phi_modulation()->evaluate(x, f.base()) : 1.0;
      Mat4<> h = f.base().components(x);
      for (int mu = 0; mu < kDim; ++mu)
        for (int n = 0; n < kDim; ++n)
          for (int r = 0; r < kDim; ++r) c[mu][n][r] = 0.5 * h[n][r] * m * dphi[mu];
      break;
    }
  }
  return c;
}

/// max_{nu rho} |v^mu C_{mu nu rho}|; zero by 0-homogeneity of g.
inline double cartan_euler_residual(const Tensor3& c, const Vec4<>& v) {
  double m = 0.0;
  for (int n = 0; n < kDim; ++n)
    for (int r = 0; r < kDim; ++r) {
      double s = 0.0;
      for (int mu = 0; mu < kDim; ++mu) s += v[mu] * c[mu][n][r];
      m = std::max(m, std::abs(s));
    }
  return m;
}

/// max |C_{mu nu rho} - C_{nu mu rho}|; zero iff g is a vertical Hessian.
inline double cartan_total_asymmetry(const Tensor3& c) {
  double m = 0.0;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int r = 0; r < kDim; ++r) m = std::max(m, std::abs(c[a][b][r] - c[b][a][r]));
  return m;
}

}  // namespace berwald
