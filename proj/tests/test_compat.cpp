#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gpm/compat.hpp"
#include "oracles.hpp"

using namespace gpm;
using std::numbers::pi;

namespace {

struct Instance {
  ParticleSystem ps;
  SphParams sph;
  FieldSamples f;
};

Instance random_setup(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RectDomain d = RectDomain::unit_square();
  const PointSet pts = perturbed_lattice(1.0 / 16.0, 0.3, seed, d);
  std::vector<double> raw(pts.size());
  double total = 0.0;
  for (double& v : raw) total += (v = 0.5 + u(rng));
  SphParams sph;
  for (double& v : raw) {
    v *= 1.44 / total;
    sph.masses.push_back(0.5 + u(rng));
    sph.densities.push_back(sph.masses.back() / v);
  }
  ParticleSystem ps(d, pts, sph.volumes(), 0.09);
  AnalyticField field;
  field.value = [](std::span<const double> p) { return std::sin(2.0 * p[0]) + p[1] * p[1]; };
  field.gradient = [](std::span<const double> p) { return std::vector<double>{2.0 * std::cos(2.0 * p[0]), 2.0 * p[1]}; };
  field.laplacian = [](std::span<const double> p) { return -4.0 * std::sin(2.0 * p[0]) + 2.0; };
  FieldSamples f = FieldSamples::sample(ps, field);
  return {std::move(ps), std::move(sph), std::move(f)};
}

/// d/dr of w_h by central differences.
double scaled_slope(const RadialWeight& w, double h, double r) {
  const double e = 1e-7 * h;
  return (evaluate_scaled(w, h, r + e) - evaluate_scaled(w, h, r - e)) / (2.0 * e);
}

}  // namespace

TEST(Compat, SphInterpolantMatchesDirectSum) {
  const Instance s = random_setup(1);
  const RadialWeight& w = catalog_weight("spline2d");
  for (const std::vector<double>& x : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.13, 0.91}}) {
    EXPECT_NEAR(sph_interpolant(s.ps, s.sph, w, s.f, x), oracle::interp_sum(s.ps, w, s.f.values, x), 1e-12);
  }
}

TEST(Compat, SphGradientAndLaplacianMatchKernelDerivative) {
  const Instance s = random_setup(2);
  const RadialWeight& w = catalog_weight("spline2d");
  const double h = s.ps.h();
  const auto vols = s.sph.volumes();
  for (std::size_t k : {0ul, 100ul, 200ul}) {
    const auto x = s.ps.point(k);
    const double fx = s.f.values[k];
    std::vector<double> g(2, 0.0);
    double lap = 0.0;
    for (std::size_t i = 0; i < s.ps.size(); ++i) {
      const double r = oracle::dist(s.ps.point(i), x);
      if (r == 0.0 || r >= h) continue;
      const double slope = scaled_slope(w, h, r);
      for (int c = 0; c < 2; ++c) g[c] += vols[i] * (s.f.values[i] - fx) * slope * (x[c] - s.ps.point(i)[c]) / r;
      lap += 2.0 * vols[i] * (fx - s.f.values[i]) / r * slope;
    }
    const auto got = sph_gradient(s.ps, s.sph, w, s.f, x);
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(got[c], g[c], 1e-5 * (1.0 + std::abs(g[c])));
    EXPECT_NEAR(sph_laplacian(s.ps, s.sph, w, s.f, x), lap, 1e-5 * (1.0 + std::abs(lap)));
  }
}

TEST(Compat, SphEquivalentToGeneralizedOperators) {
  const Instance s = random_setup(3);
  const RadialWeight& w = catalog_weight("spline2d");
  const RadialWeight t = sph_transform(w);
  for (std::size_t k = 0; k < s.ps.size(); k += 7) {
    const auto x = s.ps.point(k);
    const auto a = sph_gradient(s.ps, s.sph, w, s.f, x);
    const auto b = gradient(s.ps, t, s.f, x);
    EXPECT_NEAR(a[0], b[0], 1e-12);
    EXPECT_NEAR(a[1], b[1], 1e-12);
    EXPECT_NEAR(sph_laplacian(s.ps, s.sph, w, s.f, x), laplacian(s.ps, t, s.f, x), 1e-11);
  }
}

TEST(Compat, MpsOperators) {
  const Instance s = random_setup(4);
  const ParticleSystem uni(s.ps.domain(), s.ps.points(), uniform_volumes(s.ps.size(), s.ps.domain()), s.ps.h());
  const RadialWeight& classic = catalog_weight("mps-classic");
  const MpsParams p = MpsParams::canonical(uni, classic);
  EXPECT_NEAR(p.n_hat, static_cast<double>(uni.size()) / 1.44, 1e-9);
  EXPECT_NEAR(p.lambda_hat, pi / 6.0, 1e-14);
  EXPECT_NEAR(mps_lambda(classic, 2), pi / 6.0, 1e-14);
  const FieldSamples f{s.f.values, s.f.analytic};
  const double h = uni.h();
  for (std::size_t k : {0ul, 57ul, 180ul}) {
    const auto x = uni.point(k);
    const double fx = f.values[k];
    double lap = 0.0;
    std::vector<double> g(2, 0.0);
    const RadialWeight& wg = catalog_weight("spline2d");
    for (std::size_t i = 0; i < uni.size(); ++i) {
      const double r = oracle::dist(uni.point(i), x);
      if (r == 0.0 || r >= h) continue;
      lap += (f.values[i] - fx) * evaluate_scaled(classic, h, r);
      for (int c = 0; c < 2; ++c) {
        g[c] += (f.values[i] - fx) / r * (uni.point(i)[c] - x[c]) / r * evaluate_scaled(wg, h, r);
      }
    }
    lap *= 4.0 / (p.n_hat * h * h * p.lambda_hat);
    EXPECT_NEAR(mps_laplacian(uni, p, classic, f, x), lap, 1e-10 * (1.0 + std::abs(lap)));
    const MpsParams pg = MpsParams::canonical(uni, wg);
    const auto got = mps_gradient(uni, pg, wg, f, x);
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(got[c], 2.0 / pg.n_hat * g[c], 1e-11 * (1.0 + std::abs(g[c])));
    // Equivalence with V = 1/n^ and w = r^2 w_mps / lambda^.
    const MpsLaplacianTransform t = mps_laplacian_transform(classic, 2);
    EXPECT_NEAR(mps_laplacian(uni, p, classic, f, x), laplacian(uni, t.weight, f, x), 1e-10 * (1.0 + std::abs(lap)));
  }
  EXPECT_THROW(mps_lambda(RadialWeight("bad", 2, 1.0, {PolyPiece{0.0, 1.0, -4, {1.0}}}), 2), WeightError);
}

TEST(Compat, KernelConditions) {
  EXPECT_TRUE(check_sph_conditions(catalog_weight("spline2d")).satisfied());
  const SphKernelConditions i1 = check_sph_conditions(catalog_weight("I1"));
  EXPECT_FALSE(i1.finite_origin_limit);
  EXPECT_TRUE(i1.decreasing);
  EXPECT_FALSE(check_sph_conditions(catalog_weight("G1")).decreasing);
  EXPECT_FALSE(check_sph_conditions(catalog_weight("mps-classic")).satisfied());
  EXPECT_TRUE(mps_gradient_covered(catalog_weight("G1")));
  EXPECT_FALSE(mps_gradient_covered(catalog_weight("mps-classic")));
  EXPECT_FALSE(mps_gradient_covered(catalog_weight("I1")));
}

TEST(Compat, SphParamsValidation) {
  const Instance s = random_setup(5);
  EXPECT_NO_THROW(s.sph.validate(s.ps));
  SphParams bad = s.sph;
  bad.masses.pop_back();
  EXPECT_THROW(bad.validate(s.ps), GeometryError);
  bad = s.sph;
  bad.masses[0] *= 2.0;
  EXPECT_THROW(bad.validate(s.ps), GeometryError);
}

TEST(Compat, EquivalenceSweep) {
  const auto results = check_equivalences();
  ASSERT_EQ(results.size(), 5u);
  for (const EquivalenceResult& r : results) {
    EXPECT_TRUE(r.passed) << r.name << " " << r.max_abs_diff;
    EXPECT_LE(r.max_abs_diff, 1e-13) << r.name;
    EXPECT_GE(r.evaluations, 100u * 50u) << r.name;
  }
  EXPECT_TRUE(same_profile(sph_transform(catalog_weight("spline2d")), catalog_weight("G2")));
}
