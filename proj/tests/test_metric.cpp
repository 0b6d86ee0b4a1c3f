#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "berwald/berwald.hpp"

using namespace berwald;

namespace {

const ClauseResult& clause(const ValidationReport& r, const std::string& name) {
  for (const auto& c : r.clauses)
    if (c.name == name) return c;
  throw std::runtime_error("no clause " + name);
}

SamplingPlan small_plan(std::uint64_t seed = 99) {
  SamplingPlan p;
  p.points = 5;
  p.directions = 100;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(EvaluateG, MinkowskiZeroPhi) {
  FundamentalTensor f(BaseMetric::minkowski());
  SymMatrix4 g = evaluate_g(f, {Event{kCartesian, {1, 2, 3, 4}}, {0.3, 1, -2, 0.5}});
  EXPECT_EQ(g, SymMatrix4::diagonal({-1, 1, 1, 1}));
}

TEST(EvaluateG, ConstantPhi) {
  FundamentalTensor f = families::constant_factor(BaseMetric::minkowski(), 0.25);
  SymMatrix4 g = evaluate_g(f, {Event{kCartesian, {0, 0, 0, 0}}, {1, 0, 0, 0}});
  EXPECT_EQ(g, SymMatrix4::diagonal({-1.25, 1.25, 1.25, 1.25}));
}

TEST(EvaluateG, DeformedRobertsonWalkerOracle) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0);
  TangentVector tv{Event{kSpherical, {1, 0.3, std::numbers::pi / 2, 0}}, {2, 1, 0, 0}};
  // Line element at t = 1, r = 0.3, theta = pi/2: diag(-1, 1/(1 - 0.009), 0.09, 0.09).
  // thetaA = v^r = 1, thetaB = -v^t = -2, so 1 + phi = exp(1/4).
  const double c = 1 + 0.2840254166877415;
  const Vec4<> h{-1, 1 / (1 - 0.009), 0.09, 0.09};
  SymMatrix4 g = evaluate_g(f, tv);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) EXPECT_NEAR(g(i, j), i == j ? c * h[i] : 0.0, 1e-9);
  EXPECT_NEAR(lagrangian(f, tv), c * (-4 + 1 / (1 - 0.009)), 1e-9);
}

TEST(EvaluateG, BoundViolationAndSingular) {
  FundamentalTensor f = families::constant_factor(BaseMetric::minkowski(), -2.0);
  EXPECT_THROW(evaluate_g(f, {Event{kCartesian, {0, 0, 0, 0}}, {1, 0, 0, 0}}), BoundViolation);
  FundamentalTensor d = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  EXPECT_THROW(evaluate_g(d, {Event{kCartesian, {0, 0, 0, 0}}, {0, 1, 0, 0}}), SingularEvaluation);
  EXPECT_THROW(evaluate_g(d, {Event{kSpherical, {0, 1, 1, 0}}, {1, 0, 0, 0}}), InvalidArgument);
}

TEST(Lagrangian, IndependentRecomputationAndScaling) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0);
  Rng rng(4);
  int n = 0;
  while (n < 200) {
    Vec4<> x = sample_coords(f.base().sample_box(), rng);
    Vec4<> v = sample_direction(rng);
    if (f.base().domain_violation(x)) continue;
    TangentVector tv{Event{kSpherical, x}, v};
    double l;
    SymMatrix4 g;
    try {
      l = lagrangian(f, tv);
      g = evaluate_g(f, tv);
    } catch (const Error&) {
      continue;
    }
    double s = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) s += g(i, j) * v[i] * v[j];
    EXPECT_NEAR(l, s, 1e-12 * (1 + std::abs(l)));
    for (double lam : {0.5, 2.0, 10.0}) {
      TangentVector sv = tv;
      for (double& c : sv.comps) c *= lam;
      EXPECT_NEAR(lagrangian(f, sv), lam * lam * l, 1e-10 * lam * lam * (1 + std::abs(l)));
      EXPECT_LE(linalg::max_abs_diff(evaluate_g(f, sv), g), 1e-10 * (1 + g.max_abs()));
    }
    ++n;
  }
}

TEST(Lagrangian, VanishesOnBaseNullVectors) {
  FundamentalTensor f = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  EXPECT_NEAR(lagrangian(f, {Event{kCartesian, {0, 0, 0, 0}}, {1, 1, 0, 0}}), 0.0, 1e-15);
  EXPECT_NEAR(lagrangian(f, {Event{kCartesian, {0, 0, 0, 0}}, {1, 0, 0.6, 0.8}}), 0.0, 1e-15);
}

TEST(ClassifyCausal, Trichotomy) {
  FundamentalTensor f = FundamentalTensor(BaseMetric::minkowski()).with_time_orientation(
      VectorField::constant(kCartesian, {1, 0, 0, 0}));
  Event e{kCartesian, {0, 0, 0, 0}};
  CausalClass a = classify_causal(f, {e, {1, 0, 0, 0}});
  EXPECT_EQ(a.type, CausalType::timelike);
  ASSERT_TRUE(a.future.has_value());
  EXPECT_TRUE(*a.future);
  EXPECT_EQ(classify_causal(f, {e, {1, 1, 0, 0}}).type, CausalType::lightlike);
  EXPECT_EQ(classify_causal(f, {e, {0, 1, 0, 0}}).type, CausalType::spacelike);
  EXPECT_FALSE(*classify_causal(f, {e, {-1, 0.2, 0, 0}}).future);
  EXPECT_FALSE(classify_causal(FundamentalTensor(BaseMetric::minkowski()), {e, {1, 0, 0, 0}}).future.has_value());
}

TEST(Validate, FlatDeformedPassesWithSingularSetReported) {
  FundamentalTensor f = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  ValidationReport r = validate(f, small_plan());
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.singular_locus.probes, 0);
  EXPECT_EQ(r.singular_locus.probes, r.singular_locus.probes_detected);
  // Denominator-zero oracle: every such report has h(v, d/dt) = 0 and reproduces.
  int denominator_reports = 0;
  for (const auto& d : r.singular_locus.directions) {
    if (d.reason != SingularReason::denominator_zero) continue;
    ++denominator_reports;
    EXPECT_LE(std::abs(d.v[0]), 1e-12 * norm2(d.v));
    EXPECT_THROW(f.phi_value(d.x, d.v), SingularArgument);
  }
  EXPECT_EQ(denominator_reports, r.singular_locus.probes_detected + r.singular_locus.random_denominator_zero);
  EXPECT_TRUE(clause(r, "two_components").heuristic);
}

TEST(Validate, ConstantMinusTwoFlipsSignature) {
  FundamentalTensor f = families::constant_factor(BaseMetric::minkowski(), -2.0);
  ValidationReport r = validate(f, small_plan());
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(clause(r, "bound").passed);
  EXPECT_DOUBLE_EQ(clause(r, "bound").measured, -1.0);
  EXPECT_FALSE(clause(r, "signature").passed);
  EXPECT_EQ(r.singular_locus.random_bound_violation, 5 * 100);
  SignatureCertificate s = signature(SymMatrix4::diagonal({1, -1, -1, -1}));
  EXPECT_EQ(s.negative, 3);
  EXPECT_FALSE(s.ok());
}

TEST(Validate, ChiFailsHomogeneity) {
  FundamentalTensor f(BaseMetric::minkowski(), ScalarFactorExpr::parse("chi"));
  ValidationReport r = validate(f, small_plan());
  EXPECT_FALSE(clause(r, "homogeneity").passed);
  EXPECT_NEAR(r.homogeneity.estimated_degree, 2.0, 1e-9);
}

TEST(Validate, DeformedRobertsonWalkerPasses) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0);
  ValidationReport r = validate(f, small_plan(5));
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.regular_samples, 0);
  EXPECT_GE(r.homogeneity.samples, 500);
}

TEST(Validate, SignatureSurvivesFactorNearOverflow) {
  // Seed 5 draws directions with 1 + phi within a factor of ten of DBL_MAX.
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0);
  SamplingPlan plan;
  plan.seed = 5;
  ValidationReport r = validate(f, plan);
  EXPECT_TRUE(r.clause("signature").passed) << r.clause("signature").note;
  EXPECT_TRUE(r.passed);
}

TEST(Signature, Certificate) {
  SignatureCertificate s = signature(SymMatrix4::diagonal({-1, 1, 1, 1}));
  EXPECT_TRUE(s.ok());
  EXPECT_EQ(s.negative, 1);
  EXPECT_EQ(s.positive, 3);
  EXPECT_FALSE(signature(SymMatrix4::diagonal({-1, 1, 1, 1e-12})).ok());
}

TEST(Cones, CoincideForBothFamilies) {
  for (const auto& f : {families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0}),
                        families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0)}) {
    ConeReport r = cone_coincidence(f, 1000, 20, 3);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.samples + r.skipped, 1000);
    EXPECT_LE(r.max_relative_lagrangian, 1e-10);
    EXPECT_GT(r.future, 0);
    EXPECT_GT(r.past, 0);
  }
}

TEST(ChartCovariance, PullbackIdentity) {
  ChartRegistry reg = ChartRegistry::builtin();
  FundamentalTensor fc = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  FundamentalTensor fs = families::flat_deformed(kSpherical, families::kExponentialRatioPhi, {1.0});
  ChartMap to_cart = reg.find(kSpherical, kCartesian);
  Rng rng(8);
  int n = 0;
  while (n < 50) {
    Vec4<> x = sample_coords(fs.base().sample_box(), rng);
    Vec4<> v = sample_direction(rng);
    if (fs.base().domain_violation(x) || std::abs(v[0]) < 0.2) continue;
    TangentVector tv{Event{kSpherical, x}, v};
    auto [ce, cv] = change_chart(tv.base, tv, to_cart);
    SymMatrix4 gs = evaluate_g(fs, tv);
    SymMatrix4 gc = evaluate_g(fc, cv);
    Mat4<> j = to_cart.jacobian(x);
    // g_s = J^T g_c J
    Mat4<> pulled = linalg::mul(linalg::transpose(j), linalg::mul(gc.full(), j));
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b) EXPECT_NEAR(gs(a, b), pulled[a][b], 1e-9 * (1 + gs.max_abs()));
    ++n;
  }
}

TEST(BaseMetric, RobertsonWalkerChartDomain) {
  BaseMetric rw = BaseMetric::robertson_walker(0.1, ScaleFactor::power(1.0));
  EXPECT_FALSE(rw.domain_violation({1, 0.3, 1.0, 0}).has_value());
  EXPECT_TRUE(rw.domain_violation({1, 5e-4, 1.0, 0}).has_value());
  EXPECT_TRUE(rw.domain_violation({1, 0.3, 5e-4, 0}).has_value());
  EXPECT_TRUE(rw.domain_violation({1, 3.17, 1.0, 0}).has_value());
  ValidationReport r = validate(FundamentalTensor(rw), small_plan());
  EXPECT_TRUE(clause(r, "signature").passed);
}
