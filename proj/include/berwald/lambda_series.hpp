#pragma once

// Expansion of Lambda / (1 + phi) in powers of phi.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "berwald/errors.hpp"

namespace berwald {

/// Coefficients of the printed expansion Lambda - phi Lambda + (phi^2/2) Lambda - ...
inline const std::vector<double> kPrintedCoefficients = {1.0, -1.0, 0.5};

struct LambdaSeries {
  double phi = 0.0;
  double lambda = 0.0;
  int order = 0;
  double exact = 0.0;            // Lambda / (1 + phi)
  double truncated = 0.0;        // printed coefficients up to `order`, (-1)^k beyond
  double taylor_truncated = 0.0; // (-1)^k phi^k Lambda up to `order`
  double remainder_bound = 0.0;  // |phi|^(order+1) / (1 - |phi|) |Lambda|
  std::vector<double> printed_coefficients;
  std::vector<double> taylor_coefficients;
  /// The printed phi^2 coefficient is 1/2, the Taylor coefficient is 1.
  bool coefficient_discrepancy = true;
  bool discrepancy_affects_truncation = false;  // order >= 2
  std::string discrepancy_note = "printed phi^2 coefficient 1/2, Taylor coefficient of 1/(1+phi) is 1";
  std::optional<double> length_scale;    // l
  std::optional<double> curvature;       // eps
  std::optional<double> l2_eps;          // l^2 eps
  std::optional<double> log10_l2_eps;
};

inline constexpr double kPlanckLength = 1.616255e-35;  // m
inline constexpr double kReferenceLog10L2Eps = -124.0;

inline LambdaSeries lambda_series(double phi, double lambda, int order) {
  if (!std::isfinite(phi) || !(std::abs(phi) < 1.0)) throw DivergentSeries("|phi| >= 1: the series in phi does not converge");
  if (order < 0) throw InvalidArgument("order must be non-negative");
  LambdaSeries s;
  s.phi = phi;
  s.lambda = lambda;
  s.order = order;
  s.exact = lambda / (1.0 + phi);
  double pk = 1.0;
  for (int k = 0; k <= order; ++k) {
    double taylor = (k % 2 == 0) ? 1.0 : -1.0;
    double printed = k < static_cast<int>(kPrintedCoefficients.size()) ? kPrintedCoefficients[static_cast<std::size_t>(k)] : taylor;
    s.taylor_coefficients.push_back(taylor);
    s.printed_coefficients.push_back(printed);
    s.truncated += printed * pk * lambda;
    s.taylor_truncated += taylor * pk * lambda;
    if (printed != taylor) s.discrepancy_affects_truncation = true;
    pk *= phi;
  }
  s.remainder_bound = std::pow(std::abs(phi), order + 1) / (1.0 - std::abs(phi)) * std::abs(lambda);
  return s;
}

/// Also echoes l^2 eps for a length scale l and base curvature eps.
inline LambdaSeries lambda_series(double phi, double lambda, int order, double length_scale, double curvature) {
  LambdaSeries s = lambda_series(phi, lambda, order);
  s.length_scale = length_scale;
  s.curvature = curvature;
  s.l2_eps = length_scale * length_scale * curvature;
  if (*s.l2_eps > 0.0) s.log10_l2_eps = std::log10(*s.l2_eps);
  return s;
}

}  // namespace berwald
