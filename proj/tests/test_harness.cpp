#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gpm/harness.hpp"
#include "oracles.hpp"

using namespace gpm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("gpm_test_harness_" + name)).string();
}

StudyConfig config(double m, const std::string& weight, OperatorKind op, std::string_view levels) {
  StudyConfig c;
  c.dx_levels = parse_dx_levels(levels);
  c.m = m;
  c.weight_name = weight;
  c.op = op;
  c.indicators = false;
  return c;
}

OperatorKind natural_operator(const std::string& weight) {
  switch (weight[0]) {
    case 'G':
      return OperatorKind::gradient;
    case 'L':
      return OperatorKind::laplacian;
    default:
      return OperatorKind::interpolant;
  }
}

}  // namespace

TEST(Harness, InfluenceRadius) {
  for (double m : {1.0, 2.0, 3.0, 5.0, 7.5}) EXPECT_NEAR(influence_radius(std::ldexp(1.0, -5), m), 0.08125, 1e-15);
  EXPECT_NEAR(influence_radius(std::ldexp(1.0, -10), 5.0), 0.040625, 1e-15);
  for (double dx : {0.1, 0.01, 0.003}) EXPECT_NEAR(influence_radius(dx, 1.0), 2.6 * dx, 1e-15);
  EXPECT_NEAR(influence_radius(0.01, 3.0), 2.6 * std::pow(2.0, 5.0 / 3.0 - 5.0) * std::cbrt(0.01), 1e-15);
  EXPECT_THROW(influence_radius(0.0, 3.0), StudyError);
  EXPECT_THROW(influence_radius(0.01, 0.0), StudyError);
  EXPECT_THROW(influence_radius(std::ldexp(1.0, -5), 3.0, 0.08), StudyError);
  EXPECT_THROW(influence_radius(std::ldexp(1.0, -5), 3.0, 0.08125), StudyError);
  EXPECT_NO_THROW(influence_radius(std::ldexp(1.0, -5), 3.0, 0.1));
}

TEST(Harness, ObservedRate) {
  EXPECT_NEAR(observed_rate(1e-2, 0.1, 2.5e-3, 0.05), 2.0, 1e-12);
  EXPECT_NEAR(observed_rate(3e-4, 0.1, 3e-4, 0.05), 0.0, 1e-15);
  const double ratio = std::pow(2.0, 1.0 / 5.0);
  EXPECT_NEAR(observed_rate(1e-2, 0.2, 1e-2 * std::pow(2.0, -7.41 / 5.0), 0.2 / ratio), 7.41, 1e-12);
  EXPECT_THROW(observed_rate(0.0, 0.1, 1e-3, 0.05), StudyError);
  EXPECT_THROW(observed_rate(1e-2, -0.1, 1e-3, 0.05), StudyError);
  EXPECT_THROW(observed_rate(1e-2, 0.1, -1e-3, 0.05), StudyError);
  EXPECT_THROW(observed_rate(1e-2, 0.1, 1e-3, 0.0), StudyError);
  EXPECT_THROW(observed_rate(1e-2, 0.1, 1e-3, 0.1), StudyError);
}

TEST(Harness, TheoreticalRate) {
  EXPECT_EQ(theoretical_rate(OperatorKind::interpolant, 3.0, 1), 2.0);
  EXPECT_EQ(theoretical_rate(OperatorKind::laplacian, 3.0, 1), 1.0);
  EXPECT_EQ(theoretical_rate(OperatorKind::gradient, 1.0, 1), std::nullopt);
  EXPECT_EQ(theoretical_rate(OperatorKind::interpolant, 1.0, 3), std::nullopt);
  EXPECT_EQ(theoretical_rate(OperatorKind::laplacian, 2.0, 3), std::nullopt);
  EXPECT_EQ(theoretical_rate(OperatorKind::interpolant, 5.0, 3), 4.0);
  EXPECT_EQ(theoretical_rate(OperatorKind::gradient, 5.0, 1), 2.0);
  EXPECT_EQ(theoretical_rate(OperatorKind::laplacian, 5.0, 3), 3.0);
  EXPECT_EQ(theoretical_rate(OperatorKind::interpolant, 3.0, catalog_weight("I3")), 2.0);
  EXPECT_EQ(theoretical_rate(OperatorKind::laplacian, 5.0, catalog_weight("L3")), 3.0);
}

TEST(Harness, ParseDxLevels) {
  const auto a = parse_dx_levels("2^-5..2^-9");
  ASSERT_EQ(a.size(), 5u);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(a[k], std::ldexp(1.0, -5 - k));
  const auto b = parse_dx_levels("0.03125,0.015625");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], 0.03125);
  EXPECT_EQ(b[1], 0.015625);
  EXPECT_EQ(parse_dx_levels("2^-7").size(), 1u);
  EXPECT_THROW(parse_dx_levels(""), StudyError);
  EXPECT_THROW(parse_dx_levels("2^-5..x"), StudyError);
  EXPECT_THROW(parse_dx_levels("0.1,,0.05"), StudyError);
  EXPECT_THROW(parse_dx_levels("abc"), StudyError);
}

TEST(Harness, ParseOperatorAndTestFunctions) {
  EXPECT_EQ(parse_operator("interp"), OperatorKind::interpolant);
  EXPECT_EQ(parse_operator("grad"), OperatorKind::gradient);
  EXPECT_EQ(parse_operator("lap"), OperatorKind::laplacian);
  EXPECT_THROW(parse_operator("div"), StudyError);
  for (OperatorKind op : {OperatorKind::interpolant, OperatorKind::gradient, OperatorKind::laplacian}) {
    EXPECT_EQ(parse_operator(operator_name(op)), op);
  }
  EXPECT_THROW(test_function("cos"), StudyError);

  const double pi = std::numbers::pi;
  const AnalyticField f = test_function("sin2pi");
  const double p[2] = {0.1, 0.3};
  EXPECT_NEAR(f.value(p), std::sin(2 * pi * 0.4), 1e-15);
  EXPECT_NEAR(f.gradient(p)[0], 2 * pi * std::cos(2 * pi * 0.4), 1e-14);
  EXPECT_NEAR(f.gradient(p)[1], 2 * pi * std::cos(2 * pi * 0.4), 1e-14);
  EXPECT_NEAR(f.laplacian(p), -8 * pi * pi * std::sin(2 * pi * 0.4), 1e-12);
  for (const std::string& id : test_function_ids()) {
    const AnalyticField g = test_function(id);
    // Finite-difference consistency of the analytic derivatives.
    const double e = 1e-4;
    for (const auto& q : {std::vector<double>{0.2, 0.7}, std::vector<double>{0.9, 0.05}}) {
      const double xp[2] = {q[0] + e, q[1]}, xm[2] = {q[0] - e, q[1]};
      const double yp[2] = {q[0], q[1] + e}, ym[2] = {q[0], q[1] - e};
      const double dx = (g.value(xp) - g.value(xm)) / (2 * e);
      const double dy = (g.value(yp) - g.value(ym)) / (2 * e);
      const double lap = (g.value(xp) + g.value(xm) + g.value(yp) + g.value(ym) - 4 * g.value(q)) / (e * e);
      EXPECT_NEAR(g.gradient(q)[0], dx, 1e-6) << id;
      EXPECT_NEAR(g.gradient(q)[1], dy, 1e-6) << id;
      EXPECT_NEAR(g.laplacian(q), lap, 1e-4) << id;
    }
  }
}

TEST(Harness, RelativeErrorZeroFieldThrows) {
  const RectDomain d = RectDomain::unit_square();
  const PointSet pts = perturbed_lattice(1.0 / 16.0, 0.0, 1, d);
  const ParticleSystem ps(d, pts, uniform_volumes(pts.size(), d), 0.09);
  for (OperatorKind op : {OperatorKind::interpolant, OperatorKind::gradient, OperatorKind::laplacian}) {
    EXPECT_THROW(relative_error(ps, catalog_weight("I1"), test_function("zero"), op), StudyError);
  }
  // A linear field has zero Laplacian everywhere.
  EXPECT_THROW(relative_error(ps, catalog_weight("L1"), test_function("linear"), OperatorKind::laplacian), StudyError);
}

TEST(Harness, RelativeErrorTwoParticleGradient) {
  const RectDomain d({-1.0, -1.0}, {1.0, 1.0}, 0.6);
  const double v = 0.05;
  const PointSet pts(2, {-0.2, 0.0, 0.2, 0.0, 1.5, 1.5});
  const ParticleSystem ps(d, pts, {v, v, d.extended_volume() - 2 * v}, 0.5);
  AnalyticField f;
  f.value = [](std::span<const double> p) { return p[0]; };
  f.gradient = [](std::span<const double>) { return std::vector<double>{1.0, 0.0}; };
  f.laplacian = [](std::span<const double>) { return 0.0; };
  const RadialWeight& w = catalog_weight("G1");
  const std::vector<double> vals{-0.2, 0.2, 1.5};
  double expected = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto g = oracle::grad_sum(ps, w, vals, vals[i], ps.point(i));
    expected = std::max(expected, std::hypot(1.0 - g[0], g[1]));
  }
  EXPECT_NEAR(relative_error(ps, w, f, OperatorKind::gradient), expected, 1e-14);
  // Neighbor at distance 0.4 with h = 0.5.
  const double closed = std::abs(1.0 - 2.0 * v * w.evaluate(0.8) / 0.25);
  EXPECT_NEAR(expected, closed, 1e-14);
}

TEST(Harness, RelativeErrorMatchesBruteForce) {
  const RectDomain d = RectDomain::unit_square();
  const PointSet pts = perturbed_lattice(1.0 / 20.0, 0.25, 3, d);
  const ParticleSystem ps(d, pts, uniform_volumes(pts.size(), d), 0.09);
  const AnalyticField f = test_function("sin2pi");
  const FieldSamples s = FieldSamples::sample(ps, f);
  const double pi = std::numbers::pi;
  double ni = 0, ng = 0, nl = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.point(i);
    if (!(p[0] > 0 && p[0] < 1 && p[1] > 0 && p[1] < 1)) continue;
    ni = std::max(ni, std::abs(f.value(p) - oracle::interp_sum(ps, catalog_weight("I1"), s.values, p)));
    const auto g = oracle::grad_sum(ps, catalog_weight("G1"), s.values, s.values[i], p);
    const auto tg = f.gradient(p);
    ng = std::max(ng, std::hypot(tg[0] - g[0], tg[1] - g[1]));
    nl = std::max(nl, std::abs(f.laplacian(p) - oracle::lap_sum(ps, catalog_weight("L1"), s.values, s.values[i], p)));
  }
  // Maxima of |sin|, |grad| = 2 sqrt 2 pi |cos|, |lap| = 8 pi^2 |sin| are attained on the 512 grid within 1e-4.
  EXPECT_NEAR(relative_error(ps, catalog_weight("I1"), f, OperatorKind::interpolant), ni / 1.0, 1e-4 * ni);
  EXPECT_NEAR(relative_error(ps, catalog_weight("G1"), f, OperatorKind::gradient), ng / (2 * std::sqrt(2.0) * pi),
              1e-4 * ng);
  EXPECT_NEAR(relative_error(ps, catalog_weight("L1"), f, OperatorKind::laplacian), nl / (8 * pi * pi), 1e-4 * nl);
}

TEST(Harness, StudyConfigValidation) {
  StudyConfig c = config(3.0, "I1", OperatorKind::interpolant, "2^-5..2^-6");
  EXPECT_NO_THROW(c.validate());
  c.dx_levels = {0.01, 0.02};
  EXPECT_THROW(c.validate(), StudyError);
  c.dx_levels = {};
  EXPECT_THROW(c.validate(), StudyError);
  c = config(3.0, "I1", OperatorKind::interpolant, "2^-5");
  c.noise = 0.5;
  EXPECT_THROW(c.validate(), StudyError);
  c = config(3.0, "nope", OperatorKind::interpolant, "2^-5");
  EXPECT_ANY_THROW(c.validate());
  c = config(3.0, "I1", OperatorKind::interpolant, "2^-5");
  c.test_function = "nope";
  EXPECT_THROW(c.validate(), StudyError);
  c = config(3.0, "I1", OperatorKind::interpolant, "2^-5");
  c.domain = RectDomain::unit_square(0.05);  // h = 0.08125 reaches beyond H
  EXPECT_THROW(c.validate(), StudyError);
}

TEST(Harness, StudyLevelsAndCsv) {
  StudyConfig c = config(3.0, "I1", OperatorKind::interpolant, "2^-5..2^-6");
  c.indicators = true;
  const StudyResult r = run_study(c);
  ASSERT_EQ(r.levels.size(), 2u);
  EXPECT_EQ(r.rate_theoretical, 2.0);
  for (const StudyLevel& l : r.levels) {
    EXPECT_TRUE(l.failure.empty()) << l.failure;
    ASSERT_TRUE(l.rel_error.has_value());
    ASSERT_TRUE(l.r_n.has_value());
    ASSERT_TRUE(l.d_n.has_value());
    EXPECT_EQ(l.d_n->kind, DeviationKind::upper_bound);
    EXPECT_NEAR(l.h, influence_radius(l.dx, 3.0), 0.0);
    const PointSet pts = perturbed_lattice(l.dx, 0.25, 7, c.domain);
    EXPECT_EQ(l.n, pts.size());
    const ParticleSystem ps(c.domain, pts, uniform_volumes(pts.size(), c.domain), l.h);
    EXPECT_EQ(*l.rel_error, relative_error(ps, catalog_weight("I1"), test_function("sin2pi"), c.op));
  }
  EXPECT_FALSE(r.levels[0].rate_observed.has_value());
  ASSERT_TRUE(r.finest_rate().has_value());
  EXPECT_NEAR(*r.finest_rate(),
              std::log(*r.levels[0].rel_error / *r.levels[1].rel_error) / std::log(r.levels[0].h / r.levels[1].h),
              1e-12);

  const std::string csv = temp_path("study.csv");
  const std::string plot = temp_path("study.dat");
  write_study_csv(r, csv);
  write_study_plot(r, plot);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "dx,h,N,r_N,dN_kind,dN,rel_error,rate_observed,rate_theoretical");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
    EXPECT_NE(line.find("upper_bound"), std::string::npos);
  }
  EXPECT_EQ(rows, 2);
  std::ifstream pin(plot);
  int data = 0;
  while (std::getline(pin, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double h, e;
    ASSERT_TRUE(ls >> h >> e);
    EXPECT_NEAR(h, r.levels[data].h, 1e-12 * h);
    EXPECT_NEAR(e, *r.levels[data].rel_error, 1e-12 * e);
    ++data;
  }
  EXPECT_EQ(data, 2);
  EXPECT_THROW(write_study_csv(r, "/nonexistent/dir/x.csv"), StudyError);
  std::filesystem::remove(csv);
  std::filesystem::remove(plot);
}

TEST(Harness, FailingLevelIsRecordedAndStudyContinues) {
  StudyConfig c = config(3.0, "L1", OperatorKind::laplacian, "2^-5..2^-6");
  c.test_function = "linear";
  const StudyResult r = run_study(c);
  ASSERT_EQ(r.levels.size(), 2u);
  for (const StudyLevel& l : r.levels) {
    EXPECT_FALSE(l.failure.empty());
    EXPECT_FALSE(l.rel_error.has_value());
    EXPECT_FALSE(l.rate_observed.has_value());
  }
  const std::string csv = temp_path("failed.csv");
  write_study_csv(r, csv);
  EXPECT_NE(slurp(csv).find("NA"), std::string::npos);
  std::filesystem::remove(csv);
}

TEST(Harness, BitwiseDeterministic) {
  StudyConfig c = config(5.0, "G2", OperatorKind::gradient, "2^-5..2^-6");
  c.indicators = true;
  const std::string a = temp_path("a.csv");
  const std::string b = temp_path("b.csv");
  write_study_csv(run_study(c), a);
  write_study_csv(run_study(c), b);
  EXPECT_EQ(slurp(a), slurp(b));
  c.seed = 8;
  write_study_csv(run_study(c), b);
  EXPECT_NE(slurp(a), slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(HarnessStudy, LinearCouplingDoesNotConverge) {
  for (const std::string& w : {"I1", "I2", "I3", "G1", "G2", "G3", "L1", "L2", "L3"}) {
    const StudyResult r = run_study(config(1.0, w, natural_operator(w), "2^-5..2^-9"));
    ASSERT_TRUE(r.finest_rate().has_value()) << w;
    EXPECT_FALSE(r.rate_theoretical.has_value()) << w;
    EXPECT_GE(*r.finest_rate(), -2.0) << w;
    EXPECT_LE(*r.finest_rate(), 0.5) << w;
    if (w[0] != 'L') EXPECT_LE(std::abs(*r.finest_rate()), 0.5) << w;
  }
}

TEST(HarnessStudy, QuarticI1CoarsePairRate) {
  const StudyResult r = run_study(config(3.0, "I1", OperatorKind::interpolant, "2^-5..2^-6"));
  ASSERT_TRUE(r.finest_rate().has_value());
  EXPECT_GE(*r.finest_rate(), 1.5);
  EXPECT_LE(*r.finest_rate(), 2.5);
}

TEST(HarnessStudy, HighOrderI3Rate) {
  const StudyResult r = run_study(config(5.0, "I3", OperatorKind::interpolant, "2^-5..2^-9"));
  EXPECT_EQ(r.rate_theoretical, 4.0);
  ASSERT_TRUE(r.finest_rate().has_value());
  EXPECT_GE(*r.finest_rate(), 3.5);
}

TEST(HarnessStudy, SeedsPreserveClassification) {
  StudyConfig c = config(5.0, "I1", OperatorKind::interpolant, "2^-5..2^-7");
  const StudyResult base = run_study(c);
  ASSERT_TRUE(base.finest_rate().has_value());
  const bool converging = *base.finest_rate() > 0.5;
  for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
    c.seed = seed;
    const StudyResult r = run_study(c);
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
      ASSERT_TRUE(r.levels[k].rel_error.has_value());
      const double e0 = *base.levels[k].rel_error;
      EXPECT_LT(std::abs(*r.levels[k].rel_error - e0), 0.5 * e0) << "seed " << seed << " level " << k;
    }
    ASSERT_TRUE(r.finest_rate().has_value());
    EXPECT_EQ(*r.finest_rate() > 0.5, converging) << "seed " << seed;
  }
}
