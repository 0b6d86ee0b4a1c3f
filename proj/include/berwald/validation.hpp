#pragma once

// Regularity checks for a fundamental tensor: homogeneity, signature, the
// bound 1 + phi > 0, coincidence of the null cones of g and h, and sampling
// of the singular locus S.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "berwald/errors.hpp"
#include "berwald/fundamental_tensor.hpp"
#include "berwald/sampling.hpp"
#include "berwald/scalar_factor.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

enum class SingularReason { denominator_zero, non_real, bound_violation, degeneracy };

inline const char* to_string(SingularReason r) {
  switch (r) {
    case SingularReason::denominator_zero: return "denominator-zero";
    case SingularReason::non_real: return "non-real";
    case SingularReason::bound_violation: return "bound-violation";
    case SingularReason::degeneracy: return "degeneracy";
  }
  return "?";
}

struct SingularDirection {
  Vec4<> x{};
  Vec4<> v{};
  SingularReason reason = SingularReason::denominator_zero;
  std::string detail;
};

struct SingularLocusReport {
  std::vector<SingularDirection> directions;
  int probes = 0;             // directions projected onto the zero set of a denominator
  int probes_detected = 0;    // of those, reported as denominator-zero
  int random_denominator_zero = 0;
  int random_non_real = 0;
  int random_bound_violation = 0;
  int random_degeneracy = 0;
};

struct ClauseResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  bool heuristic = false;
  std::string note;
};

struct ValidationReport {
  HomogeneityReport homogeneity;
  std::vector<ClauseResult> clauses;  // homogeneity, signature, bound, null_cone, two_components
  SingularLocusReport singular_locus;
  SamplingPlan plan;
  int regular_samples = 0;
  bool passed = false;

  const ClauseResult& clause(const std::string& name) const {
    for (const auto& c : clauses)
      if (c.name == name) return c;
    throw InvalidArgument("no clause " + name);
  }
};

inline constexpr double kEigenvalueFloor = 1e-10;
inline constexpr double kConeTolerance = 1e-10;

struct SignatureCertificate {
  int negative = 0;
  int positive = 0;
  double min_abs_eigenvalue = 0.0;
  bool ok() const { return negative == 1 && positive == 3 && min_abs_eigenvalue >= kEigenvalueFloor; }
};

inline SignatureCertificate signature_from_eigenvalues(const Vec4<>& ev) {
  SignatureCertificate s;
  s.min_abs_eigenvalue = std::abs(ev[0]);
  for (double e : ev) {
    s.min_abs_eigenvalue = std::min(s.min_abs_eigenvalue, std::abs(e));
    if (e < 0) ++s.negative;
    if (e > 0) ++s.positive;
  }
  return s;
}

inline SignatureCertificate signature(const SymMatrix4& g) { return signature_from_eigenvalues(linalg::eigenvalues(g)); }

namespace detail {

/// Classify why (x, v) fails to be regular, or nullopt when it is regular.
/// Uses the raw factor so that the signature can be reported even when the
/// bound is violated.
inline std::optional<SingularDirection> singular_reason(const FundamentalTensor& f, const Vec4<>& x, const Vec4<>& v) {
  SingularDirection d{x, v, SingularReason::denominator_zero, {}};
  try {
    (void)f.conformal_factor(x, v);
    return std::nullopt;
  } catch (const SingularArgument& e) {
    d.detail = e.what();
  } catch (const NonFinite& e) {
    d.reason = SingularReason::non_real;
    d.detail = e.what();
  } catch (const BoundViolation& e) {
    d.reason = SingularReason::bound_violation;
    d.detail = e.what();
  }
  return d;
}

/// Null vectors of h at x: +-e0 + n, n a unit spatial combination of an h-orthonormal frame.
inline Vec4<> base_null_direction(const std::array<Vec4<>, kDim>& frame, Rng& rng) {
  Vec4<> n = sample_direction(rng);
  double s = std::sqrt(n[1] * n[1] + n[2] * n[2] + n[3] * n[3]);
  if (s < 1e-8) n = {0.0, 1.0, 0.0, 0.0}, s = 1.0;
  double sign = n[0] >= 0 ? 1.0 : -1.0;
  Vec4<> v{};
  for (int i = 0; i < kDim; ++i) {
    v[i] = sign * frame[0][i];
    for (int a = 1; a < kDim; ++a) v[i] += n[a] / s * frame[a][i];
  }
  return v;
}

}  // namespace detail

struct ConeReport {
  double max_relative_lagrangian = 0.0;  // max |L_g| / |v|^2 over base-null directions
  int samples = 0;
  int future = 0;
  int past = 0;
  int skipped = 0;  // base-null directions on which g is not regular
  bool passed = false;
};

/// Sample null directions of h and measure L_g on them.
inline ConeReport cone_coincidence(const FundamentalTensor& f, int samples, int points, std::uint64_t seed) {
  ConeReport rep;
  Rng rng(seed);
  const int per_point = std::max(1, (samples + points - 1) / points);
  int attempts = 0;
  while (rep.samples + rep.skipped < samples && attempts++ < 100 * points) {
    Vec4<> x = sample_coords(f.base().sample_box(), rng);
    if (f.base().domain_violation(x)) continue;
    SymMatrix4 h = f.base().evaluate(x);
    auto frame = linalg::orthonormal_frame(h);
    for (int k = 0; k < per_point && rep.samples + rep.skipped < samples; ++k) {
      Vec4<> v = detail::base_null_direction(frame, rng);
      try {
        double l = lagrangian(f, TangentVector{Event{f.chart(), x}, v});
        double n2 = norm2(v) * norm2(v);
        rep.max_relative_lagrangian = std::max(rep.max_relative_lagrangian, std::abs(l) / n2);
        ++rep.samples;
        if (h.contract(v, frame[0]) < 0) ++rep.future;
        else ++rep.past;
      } catch (const Error&) {
        ++rep.skipped;
      }
    }
  }
  rep.passed = rep.samples > 0 && rep.max_relative_lagrangian <= kConeTolerance;
  return rep;
}

/// Directions at x projected onto the zero set of each theta denominator:
/// v -> v - h(v, F)/h(F, F) F.
inline std::vector<Vec4<>> singular_probes(const FundamentalTensor& f, const Vec4<>& x, int count, Rng& rng) {
  std::vector<Vec4<>> out;
  const auto& phi = f.phi();
  SymMatrix4 h = f.base().evaluate(x);
  for (int slot : phi.expression().denominator_slots()) {
    if (slot < ScalarFactorExpr::kFirstThetaSlot) continue;
    const auto& name = phi.field_names()[static_cast<std::size_t>(slot - ScalarFactorExpr::kFirstThetaSlot)];
    auto it = f.binding().fields.find(name);
    if (it == f.binding().fields.end()) continue;
    Vec4<> fv = it->second.evaluate(x, f.base());
    double ff = h.contract(fv, fv);
    if (std::abs(ff) < 1e-12) continue;
    for (int k = 0; k < count; ++k) {
      Vec4<> v = sample_direction(rng);
      double c = h.contract(v, fv) / ff;
      for (int i = 0; i < kDim; ++i) v[i] -= c * fv[i];
      if (norm2(v) < 1e-6) continue;
      out.push_back(v);
    }
  }
  return out;
}

/// All regularity clauses over a seeded sampling plan. Failures are report
/// entries, never exceptions.
inline ValidationReport validate(const FundamentalTensor& f, const SamplingPlan& plan = {}) {
  ValidationReport rep;
  rep.plan = plan;
  Rng rng(plan.seed);

  rep.homogeneity = homogeneity_check(f.phi(), f.binding(), f.base(), plan.points * plan.directions,
                                      {0.5, 2.0, 10.0}, plan.seed);

  double worst_bound = 1.0;  // min of 1 + phi over samples
  int bound_failures = 0, signature_failures = 0;
  double min_eig = 1e300;
  int points = 0, attempts = 0;
  const int probes_per_point = std::max(1, plan.directions / 20);
  while (points < plan.points && attempts++ < 100 * plan.points) {
    Vec4<> x = sample_coords(f.base().sample_box(), rng);
    if (f.base().domain_violation(x)) continue;
    ++points;
    // eig((1 + phi) h) = (1 + phi) eig(h); this stays finite when the product matrix would overflow.
    const Vec4<> h_ev = linalg::eigenvalues(SymMatrix4::symmetrize(f.base().components(x)));
    for (int k = 0; k < plan.directions; ++k) {
      Vec4<> v = sample_direction(rng);
      double c;
      try {
        c = 1.0 + f.phi_value(x, v);
      } catch (const SingularArgument& e) {
        ++rep.singular_locus.random_denominator_zero;
        rep.singular_locus.directions.push_back({x, v, SingularReason::denominator_zero, e.what()});
        continue;
      } catch (const NonFinite& e) {
        ++rep.singular_locus.random_non_real;
        rep.singular_locus.directions.push_back({x, v, SingularReason::non_real, e.what()});
        continue;
      }
      worst_bound = std::min(worst_bound, c);
      Vec4<> ev = h_ev;
      for (double& e : ev) e *= c;
      SignatureCertificate sig = signature_from_eigenvalues(ev);
      min_eig = std::min(min_eig, sig.min_abs_eigenvalue);
      if (!(c > 0.0)) {
        ++bound_failures;
        ++rep.singular_locus.random_bound_violation;
        rep.singular_locus.directions.push_back({x, v, SingularReason::bound_violation, "1 + phi = " + std::to_string(c)});
      } else if (sig.min_abs_eigenvalue < kEigenvalueFloor) {
        ++rep.singular_locus.random_degeneracy;
        rep.singular_locus.directions.push_back({x, v, SingularReason::degeneracy, "eigenvalue below floor"});
      }
      if (!sig.ok()) ++signature_failures;
      else ++rep.regular_samples;
    }
    for (const auto& v : singular_probes(f, x, probes_per_point, rng)) {
      ++rep.singular_locus.probes;
      auto d = detail::singular_reason(f, x, v);
      if (d && d->reason == SingularReason::denominator_zero) {
        ++rep.singular_locus.probes_detected;
        rep.singular_locus.directions.push_back(*d);
      }
    }
  }

  const auto& hr = rep.homogeneity;
  rep.clauses.push_back({"homogeneity", hr.passed, hr.max_deviation, kHomogeneityTolerance, false,
                         hr.passed ? "" : "estimated degree " + std::to_string(hr.estimated_degree)});
  rep.clauses.push_back({"signature", signature_failures == 0 && rep.regular_samples > 0,
                         static_cast<double>(signature_failures), 0.0, false,
                         "min |eigenvalue| " + std::to_string(min_eig == 1e300 ? 0.0 : min_eig)});
  rep.clauses.push_back({"bound", bound_failures == 0, worst_bound, 0.0, false, "min of 1 + phi over regular samples"});

  ConeReport cone = cone_coincidence(f, plan.directions * 2, plan.points, plan.seed + 1);
  rep.clauses.push_back({"null_cone", cone.passed, cone.max_relative_lagrangian, kConeTolerance, false,
                         std::to_string(cone.samples) + " base-null directions"});
  bool two = cone.future > 0 && cone.past > 0;
  rep.clauses.push_back({"two_components", two, static_cast<double>(std::min(cone.future, cone.past)), 0.0, true,
                         "heuristic: both signs of h(v, e0) occur on sampled null directions"});
  rep.clauses.push_back({"singular_locus", rep.singular_locus.probes_detected == rep.singular_locus.probes,
                         static_cast<double>(rep.singular_locus.probes - rep.singular_locus.probes_detected), 0.0, false,
                         std::to_string(rep.singular_locus.probes) + " projected probes"});

  rep.passed = std::all_of(rep.clauses.begin(), rep.clauses.end(), [](const ClauseResult& c) { return c.passed; });
  return rep;
}

}  // namespace berwald
