#pragma once

// Autoparallels x'' + G(x, x') x' x' = 0, proper time, the Euler-Lagrange
// residual along autoparallels, and the exponential map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "berwald/connection.hpp"
#include "berwald/errors.hpp"
#include "berwald/fundamental_tensor.hpp"
#include "berwald/sampling.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

struct StepControl {
  double step = 1e-2;
  double tolerance = 1e-9;  // max step-halving deviation per accepted step
  double min_step = 1e-10;
  bool adaptive = true;     // false: fixed steps, no refinement
  long max_steps = 10'000'000;
  std::uint64_t seed = SamplingPlan{}.seed;  // for the Berwald check at x0
};

struct GeodesicSample {
  double t = 0.0;
  Vec4<> x{};
  Vec4<> v{};
  double lagrangian = 0.0;
  double tau = 0.0;  // NaN once the curve stops being timelike
};

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  double max_halving_error = 0.0;
  double min_step_used = 0.0;
};

struct GeodesicTrajectory {
  ChartId chart;
  std::vector<GeodesicSample> samples;
  std::vector<double> midpoint_lagrangian;  // L at the middle of each step
  double max_lagrangian_drift = 0.0;        // max |L(t) - L(0)|
  bool timelike = true;
  IntegratorStats stats;
  std::optional<BerwaldCertificate> certificate;

  double drift_bound() const { return 1e-8 * (1.0 + std::abs(samples.front().lagrangian)); }
  bool drift_within_bound() const { return max_lagrangian_drift <= drift_bound(); }
  double proper_time() const { return samples.back().tau; }
  const GeodesicSample& back() const { return samples.back(); }
};

namespace detail {

struct State {
  Vec4<> x{};
  Vec4<> v{};
};

using Acceleration = std::function<Vec4<>(const Vec4<>&, const Vec4<>&)>;

inline State axpy(const State& s, double h, const State& k) {
  State r;
  for (int i = 0; i < kDim; ++i) {
    r.x[i] = s.x[i] + h * k.x[i];
    r.v[i] = s.v[i] + h * k.v[i];
  }
  return r;
}

inline State rk4_step(const Acceleration& acc, const State& s, double h) {
  auto f = [&](const State& y) { return State{y.v, acc(y.x, y.v)}; };
  State k1 = f(s);
  State k2 = f(axpy(s, h / 2, k1));
  State k3 = f(axpy(s, h / 2, k2));
  State k4 = f(axpy(s, h, k3));
  State r;
  for (int i = 0; i < kDim; ++i) {
    r.x[i] = s.x[i] + h / 6 * (k1.x[i] + 2 * k2.x[i] + 2 * k3.x[i] + k4.x[i]);
    r.v[i] = s.v[i] + h / 6 * (k1.v[i] + 2 * k2.v[i] + 2 * k3.v[i] + k4.v[i]);
  }
  return r;
}

inline double max_diff(const State& a, const State& b) {
  double m = 0.0;
  for (int i = 0; i < kDim; ++i) m = std::max({m, std::abs(a.x[i] - b.x[i]), std::abs(a.v[i] - b.v[i])});
  return m;
}

/// Raised inside the right-hand side; rethrown by the integrator with the parameter.
struct OutsideChart {
  std::string why;
  Vec4<> x;
};
struct OnSingularSet {
  std::string why;
  Vec4<> x;
};

/// a^mu = -G^mu_{nu rho}(x, w) v^nu v^rho with w = v, or w = `frozen` when given.
inline Acceleration acceleration(const FundamentalTensor& f, std::optional<Vec4<>> frozen = std::nullopt) {
  return [&f, frozen](const Vec4<>& x, const Vec4<>& v) {
    if (auto why = f.base().domain_violation(x)) throw OutsideChart{*why, x};
    Tensor3 g;
    try {
      g = christoffel_symbols(f, x, frozen ? *frozen : v);
    } catch (const SingularEvaluation& e) {
      throw OnSingularSet{e.what(), x};
    } catch (const NonFinite& e) {
      throw OnSingularSet{e.what(), x};
    } catch (const BoundViolation& e) {
      throw OnSingularSet{e.what(), x};
    } catch (const DegenerateMetric& e) {
      throw OnSingularSet{e.what(), x};
    }
    Vec4<> a{};
    for (int mu = 0; mu < kDim; ++mu)
      for (int nu = 0; nu < kDim; ++nu)
        for (int rho = 0; rho < kDim; ++rho) a[mu] -= g[mu][nu][rho] * v[nu] * v[rho];
    return a;
  };
}

inline bool sign_change(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    if (a[i] * b[i] < 0.0) return true;
  return false;
}

}  // namespace detail

/// RK4 with a step-halving error estimate. In adaptive mode a step is
/// accepted when the full step and two half steps agree to `tolerance`, and
/// the locally extrapolated result is kept; otherwise the step is halved.
inline GeodesicTrajectory integrate_geodesic(const FundamentalTensor& f, const TangentVector& initial, double t_end,
                                             const StepControl& control = {}) {
  detail::check_chart(f, initial.base);
  if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  if (!(control.step > 0.0)) throw InvalidArgument("step must be positive");
  const Vec4<>& x0 = initial.base.coords;
  if (auto why = f.base().domain_violation(x0)) throw LeftChart(*why, 0.0, x0);

  GeodesicTrajectory traj;
  traj.chart = f.chart();
  traj.certificate = berwald_check(f, initial.base, kCertificateVelocities, control.seed);
  if (!traj.certificate->passed) throw NotBerwald("connection depends on the velocity at x0");

  auto lag = [&](const detail::State& s) { return lagrangian(f, TangentVector{Event{f.chart(), s.x}, s.v}); };
  auto denominators = [&](const detail::State& s) {
    return f.phi().denominator_values(s.x, s.v, f.binding(), f.base());
  };

  detail::State y{x0, initial.comps};
  double l0;
  try {
    l0 = lag(y);
  } catch (const Error& e) {
    throw SingularHit(e.what(), 0.0, x0);
  }
  traj.samples.push_back({0.0, y.x, y.v, l0, l0 < 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN()});
  traj.timelike = l0 < 0.0;
  std::vector<double> den = denominators(y);

  const detail::Acceleration acc = detail::acceleration(f);
  double t = 0.0, h = control.step;
  traj.stats.min_step_used = h;
  while (t < t_end) {
    if (traj.stats.steps >= control.max_steps) throw StepUnderflow("step budget exhausted");
    double step = std::min(h, t_end - t);
    if (t_end - t - step < 1e-9 * step) step = t_end - t;
    detail::State full, mid, half;
    try {
      full = detail::rk4_step(acc, y, step);
      mid = detail::rk4_step(acc, y, step / 2);
      half = detail::rk4_step(acc, mid, step / 2);
    } catch (const detail::OutsideChart& e) {
      throw LeftChart(e.why, t, e.x);
    } catch (const detail::OnSingularSet& e) {
      throw SingularHit(e.why, t, e.x);
    }
    double err = detail::max_diff(full, half);
    if (control.adaptive && err > control.tolerance) {
      ++traj.stats.rejected;
      h = step / 2;
      if (h < control.min_step) throw StepUnderflow("step below " + std::to_string(control.min_step) + " at t = " + std::to_string(t));
      continue;
    }
    detail::State next = half;
    if (control.adaptive) {
      for (int i = 0; i < kDim; ++i) {
        next.x[i] += (half.x[i] - full.x[i]) / 15.0;
        next.v[i] += (half.v[i] - full.v[i]) / 15.0;
      }
    }
    if (auto why = f.base().domain_violation(next.x)) throw LeftChart(*why, t + step, next.x);
    double lm, ln;
    try {
      lm = lag(mid);
      ln = lag(next);
    } catch (const Error& e) {
      throw SingularHit(e.what(), t + step, next.x);
    }
    std::vector<double> den_next = denominators(next);
    if (detail::sign_change(den, den_next)) throw SingularHit("velocity crossed the singular locus", t + step, next.x);
    den = std::move(den_next);

    const auto& prev = traj.samples.back();
    double tau = std::numeric_limits<double>::quiet_NaN();
    if (traj.timelike && lm < 0.0 && ln < 0.0) {
      tau = prev.tau + step / 6.0 * (std::sqrt(-prev.lagrangian) + 4.0 * std::sqrt(-lm) + std::sqrt(-ln));
    } else {
      traj.timelike = false;
    }
    t = (step == t_end - t) ? t_end : t + step;
    y = next;
    traj.samples.push_back({t, y.x, y.v, ln, tau});
    traj.midpoint_lagrangian.push_back(lm);
    traj.max_lagrangian_drift = std::max(traj.max_lagrangian_drift, std::abs(ln - l0));
    traj.stats.max_halving_error = std::max(traj.stats.max_halving_error, err);
    traj.stats.min_step_used = std::min(traj.stats.min_step_used, step);
    ++traj.stats.steps;
    if (control.adaptive && err < control.tolerance / 64.0) h = std::min(2.0 * h, control.step);
  }
  return traj;
}

/// Proper time of an integrated trajectory (Simpson per step on sqrt(-L)).
inline double proper_time(const GeodesicTrajectory& traj) {
  for (const auto& s : traj.samples)
    if (!(s.lagrangian < 0.0)) throw NotTimelike("L >= 0 at t = " + std::to_string(s.t));
  for (double l : traj.midpoint_lagrangian)
    if (!(l < 0.0)) throw NotTimelike("L >= 0 inside a step");
  return traj.samples.back().tau;
}

/// A parameterized curve s -> (x(s), dx/ds).
struct CurveSpec {
  std::function<std::pair<Vec4<>, Vec4<>>(double)> eval;
  double s0 = 0.0;
  double s1 = 1.0;
};

/// Composite Simpson quadrature of sqrt(-L) over `intervals` (rounded up to even).
inline double proper_time(const FundamentalTensor& f, const CurveSpec& curve, int intervals = 1000) {
  if (!(curve.s1 > curve.s0)) throw InvalidArgument("curve parameter range is empty");
  int n = std::max(2, intervals + (intervals % 2));
  double h = (curve.s1 - curve.s0) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    double s = curve.s0 + i * h;
    auto [x, dx] = curve.eval(s);
    double l = lagrangian(f, TangentVector{Event{f.chart(), x}, dx});
    if (!(l < 0.0)) throw NotTimelike("L >= 0 at s = " + std::to_string(s));
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::sqrt(-l);
  }
  return sum * h / 3.0;
}

/// Euler-Lagrange left-hand side at one sample, split as
///   horizontal = 2 g x'' + 2 d_rho g_{mu nu} v^rho v^nu - d_mu g_{rho nu} v^rho v^nu
///   transport  = 2 v^rho v^nu dC_{mu rho nu}/dt
/// The horizontal part vanishes on autoparallels.
struct ELSample {
  double t = 0.0;
  Vec4<> residual{};
  Vec4<> horizontal{};
  Vec4<> transport{};
};

inline constexpr double kELStep = 1e-3;
inline constexpr double kAutoparallelTolerance = 1e-6;

namespace detail {

/// Fine RK4 from s over parameter `dt` (either sign).
inline State advance(const Acceleration& acc, State s, double dt, int substeps) {
  double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) s = rk4_step(acc, s, h);
  return s;
}

}  // namespace detail

inline std::vector<ELSample> el_residual(const FundamentalTensor& f, const GeodesicTrajectory& traj) {
  if (!(traj.chart == f.chart())) throw InvalidArgument("trajectory chart differs from the metric chart");
  if (traj.samples.size() < 2) throw InvalidArgument("trajectory needs at least two samples");
  const detail::Acceleration acc = detail::acceleration(f);
  auto run = [&](auto&& fn) {
    try {
      return fn();
    } catch (const detail::OutsideChart& e) {
      throw LeftChart(e.why, std::numeric_limits<double>::quiet_NaN(), e.x);
    } catch (const detail::OnSingularSet& e) {
      throw SingularHit(e.why, std::numeric_limits<double>::quiet_NaN(), e.x);
    }
  };

  for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
    const auto& a = traj.samples[i];
    const auto& b = traj.samples[i + 1];
    detail::State end = run([&] { return detail::advance(acc, {a.x, a.v}, b.t - a.t, 16); });
    double dev = detail::max_diff(end, {b.x, b.v});
    if (dev > kAutoparallelTolerance) {
      throw NotAutoparallel("samples at t = " + std::to_string(a.t) + " and " + std::to_string(b.t) +
                            " differ from the autoparallel by " + std::to_string(dev));
    }
  }

  std::vector<ELSample> out;
  const double d = kELStep;
  for (const auto& s : traj.samples) {
    ELSample e;
    e.t = s.t;
    std::array<detail::State, 4> nb;
    const double offs[4] = {-2 * d, -d, d, 2 * d};
    for (int k = 0; k < 4; ++k) nb[k] = run([&] { return detail::advance(acc, {s.x, s.v}, offs[k], 4); });
    Vec4<> xdd{};
    for (int m = 0; m < kDim; ++m) xdd[m] = (nb[0].v[m] - 8 * nb[1].v[m] + 8 * nb[2].v[m] - nb[3].v[m]) / (12 * d);
    std::array<Tensor3, 4> c;
    for (int k = 0; k < 4; ++k) c[k] = cartan(f, TangentVector{Event{f.chart(), nb[k].x}, nb[k].v});
    Mat4<> g = detail::regular([&] { return f.components(s.x, s.v); });
    MetricDerivative dg = metric_x_derivative(f, s.x, s.v);
    for (int mu = 0; mu < kDim; ++mu) {
      double hz = 0.0, tr = 0.0;
      for (int nu = 0; nu < kDim; ++nu) hz += 2 * g[mu][nu] * xdd[nu];
      for (int r = 0; r < kDim; ++r)
        for (int nu = 0; nu < kDim; ++nu) {
          hz += (2 * dg[r][mu][nu] - dg[mu][r][nu]) * s.v[r] * s.v[nu];
          double dc = (c[0][mu][r][nu] - 8 * c[1][mu][r][nu] + 8 * c[2][mu][r][nu] - c[3][mu][r][nu]) / (12 * d);
          tr += 2 * s.v[r] * s.v[nu] * dc;
        }
      e.horizontal[mu] = hz;
      e.transport[mu] = tr;
      e.residual[mu] = hz + tr;
    }
    out.push_back(e);
  }
  return out;
}

inline constexpr int kExpMapSteps = 64;

/// x(1) of the autoparallel with x(0) = x0, x'(0) = v, by fixed-step RK4.
/// With `frozen`, the connection is evaluated at that velocity instead of
/// x'(t); for a Berwald-certified tensor the two agree and the frozen form
/// avoids evaluating g on velocities in the singular locus.
inline Vec4<> exp_map_unchecked(const FundamentalTensor& f, const Vec4<>& x0, const Vec4<>& v,
                                std::optional<Vec4<>> frozen = std::nullopt, int steps = kExpMapSteps) {
  if (norm_inf(v) == 0.0) return x0;
  const detail::Acceleration acc = detail::acceleration(f, frozen);
  try {
    return detail::advance(acc, {x0, v}, 1.0, steps).x;
  } catch (const detail::OutsideChart& e) {
    throw LeftChart(e.why, std::numeric_limits<double>::quiet_NaN(), e.x);
  } catch (const detail::OnSingularSet& e) {
    throw SingularHit(e.why, std::numeric_limits<double>::quiet_NaN(), e.x);
  }
}

inline Event exp_map(const FundamentalTensor& f, const Event& x0, const Vec4<>& v, std::uint64_t seed = SamplingPlan{}.seed) {
  detail::check_chart(f, x0);
  if (norm_inf(v) == 0.0) return x0;
  BerwaldCertificate cert = berwald_check(f, x0, kCertificateVelocities, seed);
  if (!cert.passed) throw NotBerwald("connection depends on the velocity at x0");
  return Event{x0.chart, exp_map_unchecked(f, x0.coords, v)};
}

}  // namespace berwald
