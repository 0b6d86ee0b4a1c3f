#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "berwald/berwald.hpp"

using namespace berwald;

namespace {

ArgumentBinding radial_binding() {
  ArgumentBinding b;
  b.fields["A"] = VectorField::constant(kSpherical, {0, 1, 0, 0});
  b.fields["B"] = VectorField::constant(kSpherical, {1, 0, 0, 0});
  return b;
}

const ScalarFactorExpr kWorked = ScalarFactorExpr::parse("exp(p0 * thetaA^2 / thetaB^2) - 1").with_params({1.0});

}  // namespace

TEST(ScalarFactor, ConstantValue) {
  auto phi = ScalarFactorExpr::parse("0.25");
  TangentVector tv{Event{kCartesian, {1, 2, 3, 4}}, {0.3, 1, 0, 0}};
  EXPECT_EQ(phi.evaluate(tv, {}, BaseMetric::minkowski()), 0.25);
}

TEST(ScalarFactor, WorkedExampleValue) {
  // Minkowski written in the RW chart (eps = 0, a = 1), A = d/dr, B = d/dt.
  BaseMetric h = BaseMetric::robertson_walker(0.0, ScaleFactor::constant(1.0));
  TangentVector tv{Event{kSpherical, {1, 0.3, 1.2, 0}}, {2, 1, 0, 0}};
  // thetaA = h(v, d/dr) = 1, thetaB = h(v, d/dt) = -2.
  const double oracle = std::exp(1.0 / 4.0) - 1.0;
  EXPECT_NEAR(kWorked.evaluate(tv, radial_binding(), h), oracle, 1e-15);
  EXPECT_NEAR(oracle, 0.2840254, 1e-7);
}

TEST(ScalarFactor, SpacelikeSingularDirection) {
  BaseMetric h = BaseMetric::robertson_walker(0.0, ScaleFactor::constant(1.0));
  TangentVector tv{Event{kSpherical, {1, 0.3, 1.2, 0}}, {0, 1, 0, 0}};
  EXPECT_THROW(kWorked.evaluate(tv, radial_binding(), h), SingularArgument);
}

TEST(ScalarFactor, CurvatureArgumentNeedsCertificate) {
  auto phi = ScalarFactorExpr::parse("p0 * curv").with_params({1.0}).with_length_scale(2.0);
  ArgumentBinding b;
  TangentVector tv{Event{kCartesian, {0, 0, 0, 0}}, {1, 0, 0, 0}};
  EXPECT_EQ(phi.evaluate(tv, b, BaseMetric::minkowski()), 0.0);
  b.curvature_mode = CurvatureMode::constant;
  b.curvature_value = 0.5;
  EXPECT_THROW(phi.evaluate(tv, b, BaseMetric::minkowski()), InvalidArgument);
  b.curvature_certified = true;
  EXPECT_DOUBLE_EQ(phi.evaluate(tv, b, BaseMetric::minkowski()), 2.0);
  EXPECT_THROW(phi.with_length_scale(-1.0), InvalidArgument);
}

TEST(Homogeneity, WorkedExamplePasses) {
  auto f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0);
  HomogeneityReport r = homogeneity_check(f.phi(), f.binding(), f.base(), 100);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.samples, 100);
  EXPECT_LE(r.max_deviation, kHomogeneityTolerance);
}

TEST(Homogeneity, ChiFailsWithDegreeTwo) {
  auto phi = ScalarFactorExpr::parse("chi");
  HomogeneityReport r = homogeneity_check(phi, {}, BaseMetric::minkowski(), 100);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.estimated_degree, 2.0, 1e-9);
  TangentVector tv{Event{kCartesian, {0, 0, 0, 0}}, {0.3, 1, 0.2, 0}};
  TangentVector tv2{tv.base, {0.6, 2, 0.4, 0}};
  EXPECT_NEAR(phi.evaluate(tv2, {}, BaseMetric::minkowski()), 4 * phi.evaluate(tv, {}, BaseMetric::minkowski()), 1e-14);
}

TEST(Homogeneity, ConstantIsExact) {
  auto phi = ScalarFactorExpr::parse("p0").with_params({0.3});
  HomogeneityReport r = homogeneity_check(phi, {}, BaseMetric::minkowski(), 100);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.max_deviation, 0.0);
}

TEST(Homogeneity, SingularSamplesAreResampled) {
  // thetaB vanishes on the hyperplane v^t = v^x; random directions almost
  // never land there, but resampling is reported when they do.
  auto f = families::flat_deformed(kCartesian, "thetaA / thetaB", {});
  HomogeneityReport r = homogeneity_check(f.phi(), f.binding(), f.base(), 50);
  EXPECT_EQ(r.samples, 50);
  EXPECT_GE(r.singular_resampled, 0);
  EXPECT_THROW(homogeneity_check(f.phi(), f.binding(), f.base(), 0), InvalidArgument);
  EXPECT_THROW(homogeneity_check(f.phi(), f.binding(), f.base(), 5, {1.0, -2.0}), InvalidArgument);
}

TEST(DerivativeV, ConstantIsZero) {
  auto phi = ScalarFactorExpr::parse("0.7");
  TangentVector tv{Event{kCartesian, {0, 0, 0, 0}}, {1, 0.3, 0, 0}};
  for (int mu = 0; mu < kDim; ++mu) EXPECT_EQ(phi.derivative_v(tv, {}, BaseMetric::minkowski(), mu), 0.0);
}

TEST(DerivativeV, MatchesRichardsonOracle) {
  BaseMetric h = BaseMetric::robertson_walker(0.0, ScaleFactor::constant(1.0));
  TangentVector tv{Event{kSpherical, {1, 0.3, 1.2, 0}}, {2, 1, 0, 0}};
  ArgumentBinding b = radial_binding();
  for (int mu = 0; mu < kDim; ++mu) {
    auto g = [&](double s) {
      TangentVector w = tv;
      w.comps[mu] += s;
      return kWorked.evaluate(w, b, h);
    };
    auto d = [&](double s) { return (g(s) - g(-s)) / (2 * s); };
    double oracle = (4 * d(5e-5) - d(1e-4)) / 3;
    EXPECT_NEAR(kWorked.derivative_v(tv, b, h, mu), oracle, 1e-7) << mu;
  }
  // Hand value: dphi/dv^t = e^{1/4} * (-2 (v^r)^2 / (v^t)^3) = -e^{1/4} / 4.
  EXPECT_NEAR(kWorked.derivative_v(tv, b, h, 0), -std::exp(0.25) / 4, 1e-14);
}

TEST(DerivativeV, EulerIdentity) {
  std::vector<FundamentalTensor> fs = {families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0),
                                       families::flat_deformed(kCartesian, "chi / thetaB^2 + thetaA / thetaB", {}),
                                       families::flat_deformed(kSpherical, families::kExponentialRatioPhi, {0.3})};
  Rng rng(17);
  for (const auto& f : fs) {
    HomogeneityReport hr = homogeneity_check(f.phi(), f.binding(), f.base(), 20);
    ASSERT_TRUE(hr.passed);
    int n = 0;
    while (n < 100) {
      Vec4<> x = sample_coords(f.base().sample_box(), rng);
      Vec4<> v = sample_direction(rng);
      if (f.base().domain_violation(x)) continue;
      Vec4<> grad;
      double value;
      try {
        value = f.phi().evaluate<double>(x, v, f.binding(), f.base());
        grad = f.phi().gradient_v(x, v, f.binding(), f.base());
      } catch (const Error&) {
        continue;
      }
      if (std::abs(value) > 100) continue;
      double s = 0.0;
      for (int mu = 0; mu < kDim; ++mu) s += v[mu] * grad[mu];
      EXPECT_LE(std::abs(s), 1e-8);
      ++n;
    }
  }
}
