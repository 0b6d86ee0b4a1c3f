#include <cmath>

#include <gtest/gtest.h>

#include "berwald/berwald.hpp"

using namespace berwald;

namespace {

double max4(const Tensor4& r) {
  double m = 0.0;
  for (const auto& a : r)
    for (const auto& b : a)
      for (const auto& c : b)
        for (double d : c) m = std::max(m, std::abs(d));
  return m;
}

// Scalar curvature of RW: 6 (a''/a + (a'/a)^2 + eps/a^2).
double rw_scalar(double eps, double a, double ad, double add) { return 6 * (add / a + ad * ad / (a * a) + eps / (a * a)); }

std::vector<TangentVector> regular_samples(const FundamentalTensor& f, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TangentVector> out;
  while (static_cast<int>(out.size()) < count) {
    Vec4<> x = sample_coords(f.base().sample_box(), rng);
    Vec4<> v = sample_direction(rng);
    if (f.base().domain_violation(x) || std::abs(v[0]) < 0.3) continue;
    TangentVector tv{Event{f.chart(), x}, v};
    try {
      (void)evaluate_g(f, tv);
    } catch (const Error&) {
      continue;
    }
    out.push_back(tv);
  }
  return out;
}

}  // namespace

TEST(Curvature, FlatDeformedIsFlat) {
  FundamentalTensor f = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  CurvatureBundle b = curvature(f, {Event{kCartesian, {0, 1, 2, 3}}, {2, 1, 0, 0}});
  EXPECT_EQ(max4(b.riemann), 0.0);
  EXPECT_EQ(b.scalar, 0.0);
  FundamentalTensor s = families::flat_deformed_radial(families::kExponentialRatioPhi, {1.0});
  CurvatureBundle c = curvature(s, {Event{kSpherical, {0, 1.5, 1.0, 0.3}}, {2, 0.4, 0.1, 0.2}});
  EXPECT_LE(max4(c.riemann), 1e-8);
}

TEST(Curvature, ExponentialScaleFactorRicci) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::exponential(1.0), 1.0);
  TangentVector tv{Event{kSpherical, {0.5, 0.4, 1.0, 0.2}}, {2, 1, 0, 0}};
  CurvatureBundle b = curvature(f, tv);
  EXPECT_NEAR(b.ricci(0, 0), -3.0, 1e-6);
  const double a = std::exp(0.5);
  const double phi = std::exp(0.25) - 1;  // thetaA = v^r, thetaB = -v^t
  EXPECT_NEAR(f.phi_value(tv.base.coords, tv.comps), phi, 1e-12);
  EXPECT_NEAR(b.scalar, rw_scalar(0.1, a, a, a) / (1 + phi), 1e-6);
}

TEST(Curvature, PowerScaleFactorScalar) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0).base_only();
  CurvatureBundle b = curvature(f, {Event{kSpherical, {2, 0.3, 1.0, 0}}, {1, 0, 0, 0}});
  EXPECT_NEAR(b.ricci(0, 0), 0.0, 1e-7);
  EXPECT_NEAR(b.scalar, rw_scalar(0.1, 2, 1, 0), 1e-7);
  BaseCurvature h = base_curvature(f.base(), {2, 0.3, 1.0, 0});
  EXPECT_NEAR(h.scalar, rw_scalar(0.1, 2, 1, 0), 1e-7);
  // G_tt = 3 (a'^2 + eps) / a^2.
  EXPECT_NEAR(h.einstein(0, 0), 3 * 1.1 / 4, 1e-7);
}

TEST(Curvature, AlgebraicIdentities) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0);
  for (const auto& tv : regular_samples(f, 20, 41)) {
    CurvatureBundle b = curvature(f, tv);
    const double scale = 1 + max4(b.riemann);
    EXPECT_LE(first_bianchi_residual(b.riemann), 1e-7 * scale);
    EXPECT_LE(riemann_antisymmetry_residual(b.riemann), 1e-7 * scale);
    EXPECT_LE(b.ricci_asymmetry, 1e-7 * scale);
    EXPECT_LE(metric_compatibility_residual(f, tv), 1e-6 * (1 + evaluate_g(f, tv).max_abs()));
  }
}

TEST(Curvature, ContractedBianchi) {
  BaseMetric h = BaseMetric::robertson_walker(0.1, ScaleFactor::power(1.0));
  Rng rng(2);
  int n = 0;
  while (n < 5) {
    Vec4<> x = sample_coords(h.sample_box(), rng);
    if (h.domain_violation(x) || x[1] < 0.2 || x[1] > 2.5 || x[2] < 0.3 || x[2] > 2.8) continue;
    for (double d : einstein_divergence(h, x)) EXPECT_LE(std::abs(d), 1e-4);
    ++n;
  }
}

TEST(Curvature, EinsteinCoincidence) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0);
  for (const auto& tv : regular_samples(f, 50, 8)) {
    EinsteinCoincidenceReport r = einstein_coincidence(f, tv);
    EXPECT_TRUE(r.passed) << r.max_deviation << " > " << r.tolerance;
    EXPECT_TRUE(r.scalar_passed) << r.scalar_deviation;
  }
}

TEST(Curvature, ZeroFactorMatchesBasePipelineTightly) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0).base_only();
  for (const auto& tv : regular_samples(f, 10, 9)) {
    EinsteinCoincidenceReport r = einstein_coincidence(f, tv);
    EXPECT_LE(r.max_deviation, 1e-8 * (1 + r.base_einstein_norm));
    EXPECT_EQ(r.phi, 0.0);
  }
}

TEST(Curvature, RefusesNonBerwald) {
  FundamentalTensor f = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0)
                            .with_phi_modulation(CoordinateExpression(kSpherical, "1 + 0.1 * t"));
  TangentVector tv{Event{kSpherical, {1, 0.3, 1.2, 0.5}}, {2, 1, 0, 0}};
  EXPECT_THROW(curvature(f, tv), NotBerwald);
  BerwaldCertificate failed;
  failed.at = tv.base;
  EXPECT_THROW(curvature(families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0), tv, failed), NotBerwald);
}

TEST(Curvature, ConstantCurvatureCertificate) {
  std::optional<double> flat = certify_constant_curvature(BaseMetric::minkowski(kSpherical), 10, 3);
  ASSERT_TRUE(flat.has_value());
  EXPECT_NEAR(*flat, 0.0, 1e-8);
  // Static closed universe, a = 1: R = 6 eps.
  std::optional<double> closed = certify_constant_curvature(BaseMetric::robertson_walker(0.1, ScaleFactor::constant(1.0)), 10, 3);
  ASSERT_TRUE(closed.has_value());
  EXPECT_NEAR(*closed, 0.6, 1e-6);
  EXPECT_FALSE(certify_constant_curvature(BaseMetric::robertson_walker(0.1, ScaleFactor::power(1.0)), 10, 3).has_value());
}
