#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "berwald/berwald.hpp"

using namespace berwald;

namespace {

FundamentalTensor deformed_rw() { return families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 1.0); }

StepControl fixed(double h) {
  StepControl c;
  c.step = h;
  c.adaptive = false;
  return c;
}

double dist(const Vec4<>& a, const Vec4<>& b) {
  double m = 0.0;
  for (int i = 0; i < kDim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

const TangentVector kRwStart{Event{kSpherical, {1, 0.3, std::numbers::pi / 2, 0}}, {1, 0.2, 0, 0.3}};

}  // namespace

TEST(Geodesic, StraightLinesInFlatCartesian) {
  FundamentalTensor f = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  TangentVector tv{Event{kCartesian, {0, 1, 2, 3}}, {2, 0.5, -0.3, 0.1}};
  GeodesicTrajectory g = integrate_geodesic(f, tv, 3.0);
  for (const auto& s : g.samples)
    for (int i = 0; i < kDim; ++i) {
      EXPECT_NEAR(s.x[i], tv.base.coords[i] + s.t * tv.comps[i], 1e-12);
      EXPECT_NEAR(s.v[i], tv.comps[i], 1e-12);
    }
  EXPECT_EQ(g.back().t, 3.0);
  EXPECT_TRUE(g.drift_within_bound());
}

TEST(Geodesic, StraightLinesInRadialChart) {
  FundamentalTensor f = families::flat_deformed_radial(families::kExponentialRatioPhi, {1.0});
  // Cartesian line (0, 1, 0, 0) + t (2, 0.3, 0.5, 0) written in spherical coordinates.
  TangentVector tv{Event{kSpherical, {0, 1, std::numbers::pi / 2, 0}}, {2, 0.3, 0, 0.5}};
  GeodesicTrajectory g = integrate_geodesic(f, tv, 2.0);
  const auto& s = g.back();
  const double x = 1 + 0.3 * s.t, y = 0.5 * s.t;
  EXPECT_NEAR(s.x[0], 2 * s.t, 1e-9);
  EXPECT_NEAR(s.x[1], std::hypot(x, y), 1e-9);
  EXPECT_NEAR(s.x[3], std::atan2(y, x), 1e-9);
}

TEST(Geodesic, FourthOrderConvergence) {
  FundamentalTensor f = deformed_rw().base_only();
  Vec4<> ref = integrate_geodesic(f, kRwStart, 1.0, fixed(1.0 / 512)).back().x;
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025}) err.push_back(dist(integrate_geodesic(f, kRwStart, 1.0, fixed(h)).back().x, ref));
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    double order = std::log2(err[i] / err[i + 1]);
    EXPECT_GE(order, 3.5) << i;
    EXPECT_LE(order, 4.5) << i;
  }
}

TEST(Geodesic, LagrangianConservedWhereFactorIsInert) {
  std::vector<std::pair<FundamentalTensor, TangentVector>> cases = {
      {FundamentalTensor(BaseMetric::minkowski()), {Event{kCartesian, {0, 0, 0, 0}}, {1, 0.3, 0, 0}}},
      {families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0}), {Event{kCartesian, {0, 0, 0, 0}}, {1, 0.3, 0, 0}}},
      {deformed_rw().base_only(), kRwStart},
      {families::constant_factor(BaseMetric::robertson_walker(0.1, ScaleFactor::power(1.0)), 0.21), kRwStart}};
  for (const auto& [f, tv] : cases) {
    GeodesicTrajectory g = integrate_geodesic(f, tv, 2.0);
    EXPECT_TRUE(g.drift_within_bound()) << g.max_lagrangian_drift;
  }
}

TEST(Geodesic, DeformedLagrangianFollowsFactor) {
  // L_g = (1 + phi(v)) L_h; L_h is conserved while dr/dt and hence phi change.
  FundamentalTensor f = deformed_rw();
  GeodesicTrajectory g = integrate_geodesic(f, kRwStart, 2.0);
  const double lh0 = lagrangian(f.base_only(), kRwStart);
  for (const auto& s : g.samples) {
    double lh = lagrangian(f.base_only(), {Event{kSpherical, s.x}, s.v});
    EXPECT_NEAR(lh, lh0, 1e-8 * (1 + std::abs(lh0)));
    double phi = std::exp(s.v[1] * s.v[1] / (s.v[0] * s.v[0])) - 1;
    EXPECT_NEAR(s.lagrangian, (1 + phi) * lh, 1e-12);
  }
  EXPECT_FALSE(g.drift_within_bound());
}

TEST(Geodesic, DeformedAndBaseAutoparallelsCoincide) {
  GeodesicTrajectory a = integrate_geodesic(deformed_rw(), kRwStart, 2.0);
  GeodesicTrajectory b = integrate_geodesic(deformed_rw().base_only(), kRwStart, 2.0);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_LE(dist(a.samples[i].x, b.samples[i].x), 1e-10);
}

TEST(Geodesic, Failures) {
  TangentVector out{Event{kSpherical, {1, 3.0, std::numbers::pi / 2, 0}}, {1, 0.9, 0, 0}};
  EXPECT_THROW(integrate_geodesic(deformed_rw().base_only(), out, 5.0), LeftChart);
  FundamentalTensor s = families::deformed_robertson_walker(0.1, ScaleFactor::power(1.0), 0.1, "p0 * thetaA^2 / thetaB^2");
  try {
    integrate_geodesic(s, {Event{kSpherical, {1, 0.5, 1.0, 0.2}}, {0.05, 0.5, 0, 0}}, 5.0);
    FAIL() << "no SingularHit";
  } catch (const SingularHit& e) {
    EXPECT_GT(e.parameter(), 0.0);
  }
  FundamentalTensor m = deformed_rw().with_phi_modulation(CoordinateExpression(kSpherical, "1 + 0.1 * t"));
  EXPECT_THROW(integrate_geodesic(m, kRwStart, 1.0), NotBerwald);
  EXPECT_THROW(integrate_geodesic(deformed_rw(), kRwStart, -1.0), InvalidArgument);
}

TEST(ProperTime, ConstantFactorAtRest) {
  TangentVector rest{Event{kCartesian, {0, 0, 0, 0}}, {1, 0, 0, 0}};
  GeodesicTrajectory a = integrate_geodesic(families::constant_factor(BaseMetric::minkowski(), 0.21), rest, 5.0);
  EXPECT_NEAR(proper_time(a), 5.5, 1e-12);
  GeodesicTrajectory b = integrate_geodesic(FundamentalTensor(BaseMetric::minkowski()), rest, 5.0);
  EXPECT_NEAR(proper_time(b), 5.0, 1e-12);
  GeodesicTrajectory c = integrate_geodesic(FundamentalTensor(BaseMetric::minkowski()), {rest.base, {0, 1, 0, 0}}, 1.0);
  EXPECT_THROW(proper_time(c), NotTimelike);
}

TEST(ProperTime, BoostedWorldline) {
  // |v| = 0.6: tau = t sqrt(1 - 0.36) (1 + phi)^(1/2) with phi = e^{0.36} - 1.
  FundamentalTensor f = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  GeodesicTrajectory g = integrate_geodesic(f, {Event{kCartesian, {0, 0, 0, 0}}, {1, 0.6, 0, 0}}, 2.0);
  EXPECT_NEAR(proper_time(g), 2 * 0.8 * std::exp(0.18), 1e-10);
}

TEST(ProperTime, ReparameterizationAndAdditivity) {
  FundamentalTensor f(BaseMetric::minkowski());
  auto eval = [](double s) { return std::pair<Vec4<>, Vec4<>>{{s * s, 0, 0, 0}, {2 * s, 0, 0, 0}}; };
  const double s1 = std::sqrt(6.0);
  EXPECT_NEAR(proper_time(f, CurveSpec{eval, 1.0, s1}), 5.0, 1e-10);
  FundamentalTensor d = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  auto bent = [](double s) { return std::pair<Vec4<>, Vec4<>>{{s, 0.3 * s * s, 0, 0}, {1, 0.6 * s, 0, 0}}; };
  double whole = proper_time(d, CurveSpec{bent, 0.0, 1.0});
  double parts = proper_time(d, CurveSpec{bent, 0.0, 0.4}) + proper_time(d, CurveSpec{bent, 0.4, 1.0});
  EXPECT_NEAR(whole, parts, 1e-10);
  // Same curve with s = (u^2 + u) / 2 over u in [0, 1].
  auto warped = [&](double u) {
    auto [x, dx] = bent((u * u + u) / 2);
    for (double& c : dx) c *= u + 0.5;
    return std::pair<Vec4<>, Vec4<>>{x, dx};
  };
  EXPECT_NEAR(proper_time(d, CurveSpec{warped, 0.0, 1.0}), whole, 1e-10);
  EXPECT_THROW(proper_time(d, CurveSpec{bent, 1.0, 0.0}), InvalidArgument);
}

TEST(EulerLagrange, ConstantFactorResidualVanishes) {
  FundamentalTensor f = families::constant_factor(BaseMetric::robertson_walker(0.1, ScaleFactor::power(1.0)), 0.21);
  GeodesicTrajectory g = integrate_geodesic(f, kRwStart, 1.0, fixed(0.1));
  for (const auto& e : el_residual(f, g)) {
    for (int mu = 0; mu < kDim; ++mu) {
      EXPECT_LE(std::abs(e.residual[mu]), 1e-8) << e.t;
      EXPECT_EQ(e.transport[mu], 0.0);
    }
  }
}

TEST(EulerLagrange, ResidualIsTheTransportTerm) {
  FundamentalTensor f = families::flat_deformed_radial(families::kExponentialRatioPhi, {1.0});
  TangentVector tv{Event{kSpherical, {0, 1, std::numbers::pi / 2, 0}}, {2, 0.3, 0, 0.5}};
  GeodesicTrajectory g = integrate_geodesic(f, tv, 1.0, fixed(0.1));
  double largest = 0.0;
  for (const auto& e : el_residual(f, g))
    for (int mu = 0; mu < kDim; ++mu) {
      EXPECT_LE(std::abs(e.horizontal[mu]), 1e-5);
      EXPECT_NEAR(e.residual[mu], e.transport[mu], 1e-5);
      largest = std::max(largest, std::abs(e.transport[mu]));
    }
  EXPECT_GT(largest, 1e-3);
}

TEST(EulerLagrange, RejectsNonAutoparallel) {
  FundamentalTensor f = deformed_rw().base_only();
  GeodesicTrajectory g = integrate_geodesic(f, kRwStart, 1.0, fixed(0.1));
  g.samples[3].x[1] += 1e-3;
  EXPECT_THROW(el_residual(f, g), NotAutoparallel);
}

TEST(ExpMap, FlatIsTranslation) {
  FundamentalTensor f = families::flat_deformed(kCartesian, families::kExponentialRatioPhi, {1.0});
  Event e = exp_map(f, Event{kCartesian, {0, 1, 2, 3}}, {2, 0.5, -1, 0});
  EXPECT_LE(dist(e.coords, {2, 1.5, 1, 3}), 1e-14);
  EXPECT_EQ(exp_map(f, Event{kCartesian, {0, 1, 2, 3}}, {0, 0, 0, 0}).coords, (Vec4<>{0, 1, 2, 3}));
}

TEST(ExpMap, HomogeneityOfAutoparallels) {
  FundamentalTensor f = deformed_rw();
  for (double lam : {0.5, 1.5}) {
    Vec4<> w = kRwStart.comps;
    for (double& c : w) c *= lam;
    Vec4<> along = integrate_geodesic(f, kRwStart, lam, fixed(lam / 512)).back().x;
    EXPECT_LE(dist(exp_map_unchecked(f, kRwStart.base.coords, w, std::nullopt, 1024), along), 1e-11) << lam;
    // Default 64 fixed steps.
    EXPECT_LE(dist(exp_map(f, kRwStart.base, w).coords, along), 1e-7) << lam;
  }
}
