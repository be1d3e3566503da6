#include "gpm/compat.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <memory>
#include <random>

namespace gpm {

namespace {

std::vector<std::size_t>& scratch() {
  thread_local std::vector<std::size_t> buf;
  return buf;
}

double inverse_power(double h, int d) {
  double hd = 1.0;
  for (int k = 0; k < d; ++k) hd *= h;
  return 1.0 / hd;
}

struct Offset {
  std::vector<double> y;  // x_i - x
  double r = 0.0;
};

Offset offset(const ParticleSystem& ps, std::size_t i, std::span<const double> x) {
  Offset o{std::vector<double>(x.size()), 0.0};
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    o.y[k] = ps.point(i)[k] - x[k];
    d2 += o.y[k] * o.y[k];
  }
  o.r = std::sqrt(d2);
  return o;
}

double second_derivative(const PolyPiece& p, double r) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
    const int e = p.min_power + static_cast<int>(k);
    if (e != 0 && e != 1) acc += static_cast<double>(e) * static_cast<double>(e - 1) * p.coeffs[k] * std::pow(r, e - 2);
  }
  return acc;
}

}  // namespace

std::vector<double> SphParams::volumes() const {
  std::vector<double> v(masses.size());
  for (std::size_t i = 0; i < masses.size(); ++i) v[i] = masses[i] / densities[i];
  return v;
}

void SphParams::validate(const ParticleSystem& ps) const {
  if (masses.size() != ps.size() || densities.size() != ps.size()) {
    throw GeometryError("SphParams: one mass and one density per particle required");
  }
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0) || !(densities[i] > 0.0)) throw GeometryError("SphParams: masses and densities must be positive");
  }
  const double sum = compensated_sum(volumes());
  const double target = ps.domain().extended_volume();
  if (std::abs(sum - target) > 1e-12 * target) throw GeometryError("SphParams: sum m_i / rho_i must equal |Omega_H|");
}

MpsParams MpsParams::canonical(const ParticleSystem& ps, const RadialWeight& w_mps) {
  return MpsParams{static_cast<double>(ps.size()) / ps.domain().extended_volume(), mps_lambda(w_mps, ps.dim())};
}

double sph_interpolant(const ParticleSystem& ps, const SphParams& params, const RadialWeight& w_sph,
                       const FieldSamples& f, std::span<const double> x) {
  const double h = ps.h();
  const double inv_hd = inverse_power(h, ps.dim());
  auto& nbrs = scratch();
  ps.grid().query(x, h, false, nbrs);
  double sum = 0.0;
  for (std::size_t i : nbrs) {
    const Offset o = offset(ps, i, x);
    sum += params.masses[i] / params.densities[i] * f.values[i] * (w_sph.evaluate(o.r / h) * inv_hd);
  }
  return sum;
}

std::vector<double> sph_gradient(const ParticleSystem& ps, const SphParams& params, const RadialWeight& w_sph,
                                 const FieldSamples& f, std::span<const double> x) {
  const double fx = field_value_at(ps, f, x);
  const double h = ps.h();
  const double inv_hd1 = inverse_power(h, ps.dim() + 1);
  auto& nbrs = scratch();
  ps.grid().query(x, h, true, nbrs);
  std::vector<double> sum(x.size(), 0.0);
  for (std::size_t i : nbrs) {
    const Offset o = offset(ps, i, x);
    const double dw = w_sph.derivative(o.r / h) * inv_hd1;  // w_h'(r)
    const double coef = params.masses[i] / params.densities[i] * (f.values[i] - fx);
    // grad_x w_h(|x - x_i|) = w_h'(r) (x - x_i) / r
    for (std::size_t k = 0; k < x.size(); ++k) sum[k] += coef * (dw * (-o.y[k] / o.r));
  }
  return sum;
}

double sph_laplacian(const ParticleSystem& ps, const SphParams& params, const RadialWeight& w_sph,
                     const FieldSamples& f, std::span<const double> x) {
  const double fx = field_value_at(ps, f, x);
  const double h = ps.h();
  const double inv_hd1 = inverse_power(h, ps.dim() + 1);
  auto& nbrs = scratch();
  ps.grid().query(x, h, true, nbrs);
  double sum = 0.0;
  for (std::size_t i : nbrs) {
    const Offset o = offset(ps, i, x);
    const double dw = w_sph.derivative(o.r / h) * inv_hd1;
    double dot = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dot += (-o.y[k] / o.r) * (dw * (-o.y[k] / o.r));
    sum += params.masses[i] / params.densities[i] * (fx - f.values[i]) / o.r * dot;
  }
  return 2.0 * sum;
}

std::vector<double> mps_gradient(const ParticleSystem& ps, const MpsParams& params, const RadialWeight& w_mps,
                                 const FieldSamples& f, std::span<const double> x) {
  const double fx = field_value_at(ps, f, x);
  const double h = ps.h();
  const double inv_hd = inverse_power(h, ps.dim());
  auto& nbrs = scratch();
  ps.grid().query(x, h, true, nbrs);
  std::vector<double> sum(x.size(), 0.0);
  for (std::size_t i : nbrs) {
    const Offset o = offset(ps, i, x);
    const double term = (f.values[i] - fx) / o.r * (w_mps.evaluate(o.r / h) * inv_hd);
    for (std::size_t k = 0; k < x.size(); ++k) sum[k] += term * (o.y[k] / o.r);
  }
  const double pre = static_cast<double>(ps.dim()) / params.n_hat;
  for (double& s : sum) s *= pre;
  return sum;
}

double mps_laplacian(const ParticleSystem& ps, const MpsParams& params, const RadialWeight& w_mps,
                     const FieldSamples& f, std::span<const double> x) {
  const double fx = field_value_at(ps, f, x);
  const double h = ps.h();
  const double inv_hd = inverse_power(h, ps.dim());
  auto& nbrs = scratch();
  ps.grid().query(x, h, true, nbrs);
  double sum = 0.0;
  for (std::size_t i : nbrs) {
    const Offset o = offset(ps, i, x);
    sum += (f.values[i] - fx) * (w_mps.evaluate(o.r / h) * inv_hd);
  }
  const double lambda_h = h * h * params.lambda_hat;
  return 2.0 * static_cast<double>(ps.dim()) / (params.n_hat * lambda_h) * sum;
}

double mps_lambda(const RadialWeight& w_mps, int dim) {
  const double lambda = second_moment(w_mps, dim);
  if (!std::isfinite(lambda)) throw WeightError("mps_lambda: r^2 w is not integrable");
  return lambda;
}

SphKernelConditions check_sph_conditions(const RadialWeight& w_sph) {
  SphKernelConditions out;
  const auto& pieces = w_sph.pieces();
  const bool regular = std::all_of(pieces.begin(), pieces.end(), [](const PolyPiece& p) {
    return p.lowest_degree() >= 0;
  });
  if (!regular) return out;

  double jump = std::abs(pieces.back().eval(1.0)) + std::abs(pieces.back().eval_derivative(1.0)) +
                std::abs(second_derivative(pieces.back(), 1.0));
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    const double b = pieces[k].lo;
    jump = std::max({jump, std::abs(pieces[k - 1].eval(b) - pieces[k].eval(b)),
                     std::abs(pieces[k - 1].eval_derivative(b) - pieces[k].eval_derivative(b)),
                     std::abs(second_derivative(pieces[k - 1], b) - second_derivative(pieces[k], b))});
  }
  out.c2 = std::abs(w_sph.scale()) * jump <= 1e-12;

  // w' < 0 on (0, 1): dense sampling inside every piece.
  constexpr int kSamples = 4096;
  out.decreasing = true;
  for (int s = 1; s < kSamples && out.decreasing; ++s) {
    const double r = static_cast<double>(s) / kSamples;
    out.decreasing = w_sph.derivative(r) < 0.0;
  }

  // w'(s)/s bounded near 0 iff the r^1 coefficient vanishes on the first piece.
  const PolyPiece& first = pieces.front();
  double linear = 0.0;
  for (std::size_t k = 0; k < first.coeffs.size(); ++k) {
    if (first.min_power + static_cast<int>(k) == 1) linear = first.coeffs[k];
  }
  out.finite_origin_limit = linear == 0.0;
  return out;
}

bool mps_gradient_covered(const RadialWeight& w_mps) {
  return check_admissible(w_mps).admissible() && check_smoothness_order(w_mps, 0);
}

namespace {

struct RandomConfig {
  std::unique_ptr<ParticleSystem> ps;
  SphParams sph;
  FieldSamples f;
  PointSet probes;
};

RandomConfig random_config(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Omega_H = (0,1)^2 with h in [0.3, 0.44): about 20 neighbors per particle.
  const RectDomain domain({0.45, 0.45}, {0.55, 0.55}, 0.45);
  const Box box = domain.extended();

  PointSet pts(2, {});
  for (std::size_t i = 0; i < n; ++i) {
    const double p[2] = {box.lower[0] + box.extent(0) * unit(rng), box.lower[1] + box.extent(1) * unit(rng)};
    pts.push_back(p);
  }
  std::vector<double> raw(n);
  double total = 0.0;
  for (double& v : raw) {
    v = 0.5 + unit(rng);
    total += v;
  }
  RandomConfig cfg;
  cfg.sph.masses.resize(n);
  cfg.sph.densities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double volume = raw[i] / total * domain.extended_volume();
    cfg.sph.masses[i] = 0.5 + unit(rng);
    cfg.sph.densities[i] = cfg.sph.masses[i] / volume;
  }
  const double h = 0.3 + 0.14 * unit(rng);
  cfg.ps = std::make_unique<ParticleSystem>(domain, pts, cfg.sph.volumes(), h);

  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double c[6] = {coef(rng), coef(rng), coef(rng), coef(rng), coef(rng), coef(rng)};
  AnalyticField field{
      [c](std::span<const double> p) {
        return c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[0] + c[4] * p[0] * p[1] + c[5] * p[1] * p[1];
      },
      [c](std::span<const double> p) {
        return std::vector<double>{c[1] + 2.0 * c[3] * p[0] + c[4] * p[1], c[2] + c[4] * p[0] + 2.0 * c[5] * p[1]};
      },
      [c](std::span<const double>) { return 2.0 * (c[3] + c[5]); }};
  cfg.f = FieldSamples::sample(*cfg.ps, std::move(field));

  cfg.probes = cfg.ps->points();
  for (int k = 0; k < 10; ++k) {
    const double p[2] = {box.lower[0] + box.extent(0) * unit(rng), box.lower[1] + box.extent(1) * unit(rng)};
    cfg.probes.push_back(p);
  }
  return cfg;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double out = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, std::abs(a[k] - b[k]));
  return out;
}

}  // namespace

std::vector<EquivalenceResult> check_equivalences(const EquivalenceOptions& options) {
  std::vector<EquivalenceResult> out{{"sph_interpolant"}, {"sph_gradient"}, {"sph_laplacian"},
                                     {"mps_gradient"},    {"mps_laplacian"}};
  const RadialWeight& spline = catalog_weight("spline2d");
  const RadialWeight sph_grad_weight = sph_transform(spline);
  const RadialWeight& mps_classic = catalog_weight("mps-classic");
  const RadialWeight mps_lap_weight = mps_laplacian_transform(mps_classic, 2).weight;

  std::mt19937_64 rng(options.seed);
  for (int c = 0; c < options.configs; ++c) {
    const RandomConfig cfg = random_config(rng, options.particles);
    const ParticleSystem& ps = *cfg.ps;
    const MpsParams grad_params = MpsParams::canonical(ps, spline);
    const MpsParams lap_params = MpsParams::canonical(ps, mps_classic);
    const ParticleSystem mps_ps(ps.domain(), ps.points(), uniform_volumes(ps.size(), ps.domain()), ps.h());

    for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
      const auto x = cfg.probes[k];
      const double diffs[5] = {
          std::abs(sph_interpolant(ps, cfg.sph, spline, cfg.f, x) - interpolate(ps, spline, cfg.f, x)),
          max_diff(sph_gradient(ps, cfg.sph, spline, cfg.f, x), gradient(ps, sph_grad_weight, cfg.f, x)),
          std::abs(sph_laplacian(ps, cfg.sph, spline, cfg.f, x) - laplacian(ps, sph_grad_weight, cfg.f, x)),
          max_diff(mps_gradient(ps, grad_params, spline, cfg.f, x), gradient(mps_ps, spline, cfg.f, x)),
          std::abs(mps_laplacian(ps, lap_params, mps_classic, cfg.f, x) - laplacian(mps_ps, mps_lap_weight, cfg.f, x))};
      for (int e = 0; e < 5; ++e) {
        out[e].max_abs_diff = std::max(out[e].max_abs_diff, diffs[e]);
        ++out[e].evaluations;
      }
    }
  }
  for (auto& r : out) r.passed = r.max_abs_diff <= options.tolerance;
  return out;
}

}  // namespace gpm
