#pragma once

// Normal coordinates n -> exp_{x0}(n^a e_a) centred at an event, with the
// connection coefficients expressed in the new chart.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "berwald/connection.hpp"
#include "berwald/errors.hpp"
#include "berwald/fundamental_tensor.hpp"
#include "berwald/geodesic.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

struct NormalChartSettings {
  double newton_tolerance = 1e-10;
  int newton_max_iterations = 50;
  double damping = 0.5;
  double max_radius = 0.25;
  int exp_steps = kExpMapSteps;
  double jacobian_step = 1e-3;
  double hessian_step = 2e-3;
  std::uint64_t seed = SamplingPlan{}.seed;
};

class NormalChart {
 public:
  NormalChart(FundamentalTensor f, Event center, std::array<Vec4<>, kDim> frame, Vec4<> reference_velocity,
              NormalChartSettings settings)
      : f_(std::move(f)), center_(std::move(center)), frame_(frame), vref_(reference_velocity), settings_(settings) {}

  const Event& center() const { return center_; }
  const std::array<Vec4<>, kDim>& frame() const { return frame_; }
  const Vec4<>& reference_velocity() const { return vref_; }
  const NormalChartSettings& settings() const { return settings_; }
  double validity_radius() const { return radius_; }
  void set_validity_radius(double r) { radius_ = r; }

  /// Coordinates in the original chart of the point with normal coordinates n.
  Vec4<> to_coords(const Vec4<>& n) const {
    Vec4<> v{};
    for (int a = 0; a < kDim; ++a)
      for (int i = 0; i < kDim; ++i) v[i] += n[a] * frame_[a][i];
    return exp_map_unchecked(f_, center_.coords, v, vref_, settings_.exp_steps);
  }

  /// J^mu_a = d x^mu / d n^a by fourth-order central differences.
  Mat4<> jacobian(const Vec4<>& n, double step = 0.0) const {
    const double d = step > 0.0 ? step : settings_.jacobian_step;
    Mat4<> j{};
    for (int a = 0; a < kDim; ++a) {
      std::array<Vec4<>, 4> p;
      const double offs[4] = {-2 * d, -d, d, 2 * d};
      for (int k = 0; k < 4; ++k) {
        Vec4<> m = n;
        m[a] += offs[k];
        p[k] = to_coords(m);
      }
      for (int mu = 0; mu < kDim; ++mu) j[mu][a] = (p[0][mu] - 8 * p[1][mu] + 8 * p[2][mu] - p[3][mu]) / (12 * d);
    }
    return j;
  }

  /// Normal coordinates of x by damped Newton iteration on the exponential map.
  Vec4<> to_normal(const Vec4<>& x) const {
    Mat4<> jinv = linalg::inverse(jacobian(Vec4<>{}), 0.0);
    Vec4<> n{};
    Vec4<> dx{};
    for (int i = 0; i < kDim; ++i) dx[i] = x[i] - center_.coords[i];
    n = linalg::mul(jinv, dx);
    auto residual = [&](const Vec4<>& m) {
      Vec4<> r = to_coords(m);
      for (int i = 0; i < kDim; ++i) r[i] -= x[i];
      return r;
    };
    Vec4<> r;
    try {
      r = residual(n);
    } catch (const Error& e) {
      throw NewtonDivergence(std::string("initial guess unusable: ") + e.what(), n);
    }
    for (int it = 0; it < settings_.newton_max_iterations; ++it) {
      if (norm_inf(r) <= settings_.newton_tolerance) return n;
      Mat4<> j;
      try {
        j = linalg::inverse(jacobian(n, 1e-5), 0.0);
      } catch (const Error& e) {
        throw NewtonDivergence(e.what(), n);
      }
      Vec4<> dn = linalg::mul(j, r);
      double lambda = 1.0;
      bool improved = false;
      for (int k = 0; k < 30; ++k) {
        Vec4<> trial = n;
        for (int i = 0; i < kDim; ++i) trial[i] -= lambda * dn[i];
        try {
          Vec4<> rt = residual(trial);
          if (norm_inf(rt) < norm_inf(r)) {
            n = trial;
            r = rt;
            improved = true;
            break;
          }
        } catch (const Error&) {
        }
        lambda *= settings_.damping;
      }
      if (!improved) {
        if (norm_inf(r) <= settings_.newton_tolerance) return n;
        throw NewtonDivergence("residual " + std::to_string(norm_inf(r)) + " does not decrease", n);
      }
    }
    if (norm_inf(r) <= settings_.newton_tolerance) return n;
    throw NewtonDivergence("no convergence in " + std::to_string(settings_.newton_max_iterations) + " iterations", n);
  }

  /// Connection coefficients in the normal chart at n:
  ///   G~^a_{bc} = (J^-1)^a_mu (G^mu_{nu rho}(X) J^nu_b J^rho_c + d_b d_c X^mu),
  /// with the second derivatives by polarization of second directional differences.
  Tensor3 christoffel(const Vec4<>& n) const {
    Vec4<> x = to_coords(n);
    Mat4<> j = jacobian(n);
    Mat4<> jinv = linalg::inverse(j, 0.0);
    Tensor3 g = christoffel_symbols(f_, x, vref_);
    const double d = settings_.hessian_step;
    auto second = [&](const Vec4<>& u) {
      std::array<Vec4<>, 4> p;
      const double offs[4] = {-2 * d, -d, d, 2 * d};
      for (int k = 0; k < 4; ++k) {
        Vec4<> m = n;
        for (int i = 0; i < kDim; ++i) m[i] += offs[k] * u[i];
        p[k] = to_coords(m);
      }
      Vec4<> s{};
      for (int mu = 0; mu < kDim; ++mu) s[mu] = (-p[0][mu] + 16 * p[1][mu] - 30 * x[mu] + 16 * p[2][mu] - p[3][mu]) / (12 * d * d);
      return s;
    };
    std::array<Vec4<>, kDim> diag;
    for (int b = 0; b < kDim; ++b) {
      Vec4<> u{};
      u[b] = 1.0;
      diag[b] = second(u);
    }
    Tensor3 out{};
    for (int b = 0; b < kDim; ++b)
      for (int c = b; c < kDim; ++c) {
        Vec4<> hess;
        if (b == c) {
          hess = diag[b];
        } else {
          Vec4<> u{}, w{};
          u[b] = u[c] = 1.0;
          w[b] = 1.0;
          w[c] = -1.0;
          Vec4<> sp = second(u), sm = second(w);
          for (int mu = 0; mu < kDim; ++mu) hess[mu] = 0.25 * (sp[mu] - sm[mu]);
        }
        Vec4<> t{};
        for (int mu = 0; mu < kDim; ++mu) {
          t[mu] = hess[mu];
          for (int nu = 0; nu < kDim; ++nu)
            for (int rho = 0; rho < kDim; ++rho) t[mu] += g[mu][nu][rho] * j[nu][b] * j[rho][c];
        }
        for (int a = 0; a < kDim; ++a) {
          double s = 0.0;
          for (int mu = 0; mu < kDim; ++mu) s += jinv[a][mu] * t[mu];
          out[a][b][c] = out[a][c][b] = s;
        }
      }
    return out;
  }

 private:
  FundamentalTensor f_;
  Event center_;
  std::array<Vec4<>, kDim> frame_;
  Vec4<> vref_;
  NormalChartSettings settings_;
  double radius_ = 0.0;
};

inline constexpr double kRoundTripTolerance = 1e-8;

namespace detail {

/// Probe directions: the frame axes (both signs) and the diagonals of pairs.
inline std::vector<Vec4<>> radius_probes() {
  std::vector<Vec4<>> out;
  for (int a = 0; a < kDim; ++a)
    for (double s : {1.0, -1.0}) {
      Vec4<> u{};
      u[a] = s;
      out.push_back(u);
    }
  for (int a = 0; a < kDim; ++a)
    for (int b = a + 1; b < kDim; ++b) {
      Vec4<> u{};
      u[a] = u[b] = 1.0 / std::sqrt(2.0);
      out.push_back(u);
    }
  return out;
}

}  // namespace detail

/// Largest radius (max_radius / 2^k) at which every probe round-trips
/// through exp and Newton to within 1e-8; 0 if none does.
inline double newton_validity_radius(const NormalChart& chart) {
  double r = chart.settings().max_radius;
  for (int k = 0; k < 12; ++k, r *= 0.5) {
    bool ok = true;
    for (const auto& u : detail::radius_probes()) {
      Vec4<> n{};
      for (int i = 0; i < kDim; ++i) n[i] = r * u[i];
      try {
        Vec4<> back = chart.to_normal(chart.to_coords(n));
        for (int i = 0; i < kDim; ++i) ok = ok && std::abs(back[i] - n[i]) <= kRoundTripTolerance;
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) break;
    }
    if (ok) return r;
  }
  return 0.0;
}

/// Normal chart at x0. The frame (default: coordinate basis) is
/// Gram-Schmidt orthonormalized against g(x0, reference velocity).
inline NormalChart build_normal_chart(const FundamentalTensor& f, const Event& x0,
                                      std::optional<std::array<Vec4<>, kDim>> frame = std::nullopt,
                                      std::optional<Vec4<>> reference_velocity = std::nullopt,
                                      NormalChartSettings settings = {}) {
  detail::check_chart(f, x0);
  if (auto why = f.base().domain_violation(x0.coords)) throw LeftChart(*why, 0.0, x0.coords);
  BerwaldCertificate cert = berwald_check(f, x0, kCertificateVelocities, settings.seed);
  if (!cert.passed) throw NotBerwald("connection depends on the velocity at the centre");
  Vec4<> vref = reference_velocity ? *reference_velocity
                : f.time_orientation() ? f.time_orientation()->evaluate(x0.coords, f.base())
                                       : Vec4<>{1.0, 0.0, 0.0, 0.0};
  SymMatrix4 g = evaluate_g(f, TangentVector{x0, vref});
  std::array<Vec4<>, kDim> seed = frame ? *frame
                                        : std::array<Vec4<>, kDim>{Vec4<>{1, 0, 0, 0}, Vec4<>{0, 1, 0, 0},
                                                                   Vec4<>{0, 0, 1, 0}, Vec4<>{0, 0, 0, 1}};
  NormalChart chart(f, x0, linalg::orthonormal_frame(g, seed), vref, settings);
  chart.set_validity_radius(newton_validity_radius(chart));
  return chart;
}

}  // namespace berwald
