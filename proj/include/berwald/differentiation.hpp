#pragma once

// Dual-path differentiation of scalar fields f(x, v) on the tangent bundle:
// forward mode on the evaluation graph, and central finite differences.
//
// A field is any callable `f(const Vec4<T>& x, const Vec4<T>& v) -> T`.
// Generic lambdas get forward mode; callables that only accept doubles fall
// back to finite differences.

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>

#include "berwald/dual.hpp"
#include "berwald/errors.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

enum class DiffMethod { forward_mode, central_difference };

inline const char* to_string(DiffMethod m) {
  return m == DiffMethod::forward_mode ? "forward-mode" : "central-difference";
}

struct DiffResult {
  double value = 0.0;
  Vec4<> partials_x{};
  Vec4<> partials_v{};
  DiffMethod method = DiffMethod::forward_mode;
};

namespace fd {

inline constexpr double kRelativeStep = 1e-5;
inline constexpr double kStepFloor = 1e-6;
inline constexpr double kSecondStep = 1e-4;
inline constexpr double kCrossTolFirst = 1e-6;
inline constexpr double kCrossTolSecond = 1e-4;

/// First-derivative step for a coordinate of the given magnitude.
inline double step_for(double coord) { return std::max(kRelativeStep * std::abs(coord), kStepFloor); }

}  // namespace fd

template <typename F>
inline constexpr bool supports_forward_mode_v =
    std::is_invocable_v<const F&, const Vec4<Dual<double>>&, const Vec4<Dual<double>>&>;

namespace detail {

template <typename F>
double call_checked(const F& f, const Vec4<>& x, const Vec4<>& v) {
  double r;
  try {
    r = static_cast<double>(f(x, v));
  } catch (const SingularArgument& e) {
    throw SingularEvaluation(std::string("stencil touches singular set: ") + e.what());
  }
  if (!std::isfinite(r)) throw NonFinite("field evaluated to a non-finite value");
  return r;
}

/// Forward-mode directional derivative; `seed_x`/`seed_v` pick the tangent direction.
template <typename F>
std::pair<double, double> forward_directional(const F& f, const Vec4<>& x, const Vec4<>& v, const Vec4<>& seed_x,
                                              const Vec4<>& seed_v) {
  using D = Dual<double>;
  Vec4<D> xd, vd;
  for (int i = 0; i < kDim; ++i) {
    xd[i] = D(x[i], seed_x[i]);
    vd[i] = D(v[i], seed_v[i]);
  }
  D r;
  try {
    r = f(xd, vd);
  } catch (const SingularArgument& e) {
    throw SingularEvaluation(std::string("evaluation point is singular: ") + e.what());
  }
  if (!all_finite(r)) throw NonFinite("forward-mode evaluation produced a non-finite value");
  return {r.val, r.eps};
}

inline Vec4<> unit(int mu) {
  Vec4<> e{};
  e[mu] = 1.0;
  return e;
}

}  // namespace detail

/// d f / d x^mu at frozen velocity.
template <typename F>
double partial_x(const F& f, const TangentVector& at, int mu, DiffMethod method = DiffMethod::forward_mode) {
  const Vec4<>& x = at.base.coords;
  const Vec4<>& v = at.comps;
  if constexpr (supports_forward_mode_v<F>) {
    if (method == DiffMethod::forward_mode) return detail::forward_directional(f, x, v, detail::unit(mu), Vec4<>{}).second;
  }
  double h = fd::step_for(x[mu]);
  Vec4<> xp = x, xm = x;
  xp[mu] += h;
  xm[mu] -= h;
  return (detail::call_checked(f, xp, v) - detail::call_checked(f, xm, v)) / (2.0 * h);
}

/// d f / d v^mu at frozen base point.
template <typename F>
double partial_v(const F& f, const TangentVector& at, int mu, DiffMethod method = DiffMethod::forward_mode) {
  const Vec4<>& x = at.base.coords;
  const Vec4<>& v = at.comps;
  if constexpr (supports_forward_mode_v<F>) {
    if (method == DiffMethod::forward_mode) return detail::forward_directional(f, x, v, Vec4<>{}, detail::unit(mu)).second;
  }
  double h = fd::step_for(v[mu]);
  Vec4<> vp = v, vm = v;
  vp[mu] += h;
  vm[mu] -= h;
  return (detail::call_checked(f, x, vp) - detail::call_checked(f, x, vm)) / (2.0 * h);
}

/// Value and all eight first partials by one method. Forward mode silently
/// degrades to finite differences for double-only callables.
template <typename F>
DiffResult gradient(const F& f, const TangentVector& at, DiffMethod method = DiffMethod::forward_mode) {
  DiffResult r;
  r.method = supports_forward_mode_v<F> ? method : DiffMethod::central_difference;
  r.value = detail::call_checked(f, at.base.coords, at.comps);
  for (int mu = 0; mu < kDim; ++mu) {
    r.partials_x[mu] = partial_x(f, at, mu, r.method);
    r.partials_v[mu] = partial_v(f, at, mu, r.method);
  }
  return r;
}

/// Largest disagreement between the forward-mode and finite-difference
/// partials; nullopt when only finite differences are available.
template <typename F>
std::optional<double> cross_check(const F& f, const TangentVector& at) {
  if constexpr (!supports_forward_mode_v<F>) {
    return std::nullopt;
  } else {
    DiffResult a = gradient(f, at, DiffMethod::forward_mode);
    DiffResult b = gradient(f, at, DiffMethod::central_difference);
    double m = 0.0;
    for (int mu = 0; mu < kDim; ++mu) {
      m = std::max(m, std::abs(a.partials_x[mu] - b.partials_x[mu]));
      m = std::max(m, std::abs(a.partials_v[mu] - b.partials_v[mu]));
    }
    return m;
  }
}

/// d^2 f / dx^mu dx^nu. Forward mode nests duals; the fallback is nested
/// central stencils with step 1e-4.
template <typename F>
double second_partial_x(const F& f, const TangentVector& at, int mu, int nu,
                        DiffMethod method = DiffMethod::forward_mode) {
  const Vec4<>& x = at.base.coords;
  const Vec4<>& v = at.comps;
  using DD = Dual<Dual<double>>;
  if constexpr (std::is_invocable_v<const F&, const Vec4<DD>&, const Vec4<DD>&>) {
    if (method == DiffMethod::forward_mode) {
      Vec4<DD> xd, vd;
      for (int i = 0; i < kDim; ++i) {
        xd[i] = DD(Dual<double>(x[i], i == nu ? 1.0 : 0.0), Dual<double>(i == mu ? 1.0 : 0.0, 0.0));
        vd[i] = DD(v[i]);
      }
      DD r;
      try {
        r = f(xd, vd);
      } catch (const SingularArgument& e) {
        throw SingularEvaluation(std::string("evaluation point is singular: ") + e.what());
      }
      if (!all_finite(r)) throw NonFinite("forward-mode evaluation produced a non-finite value");
      return r.eps.eps;
    }
  }
  const double h = fd::kSecondStep;
  auto shifted = [&](double a, double b) {
    Vec4<> y = x;
    y[mu] += a;
    y[nu] += b;
    return detail::call_checked(f, y, v);
  };
  return (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h);
}

}  // namespace berwald
