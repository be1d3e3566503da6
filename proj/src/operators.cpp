#include "gpm/operators.hpp"

#include <cmath>

namespace gpm {

namespace {

std::vector<std::size_t>& scratch() {
  thread_local std::vector<std::size_t> buf;
  return buf;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

double inverse_power(double h, int d) {
  double hd = 1.0;
  for (int k = 0; k < d; ++k) hd *= h;
  return 1.0 / hd;
}

// f(x): a particle sitting exactly at x wins, then the analytic field.
double center_value(const ParticleSystem& ps, const FieldSamples& f, std::span<const double> x,
                    const std::vector<std::size_t>& nbrs) {
  for (std::size_t i : nbrs) {
    const auto p = ps.point(i);
    bool same = true;
    for (std::size_t k = 0; k < x.size() && same; ++k) same = p[k] == x[k];
    if (same) return f.values[i];
  }
  if (f.analytic && f.analytic->value) return f.analytic->value(x);
  throw OperatorError("f(x) is unknown: x is not a particle and no analytic field was given");
}

void check_sizes(const ParticleSystem& ps, const FieldSamples& f, std::span<const double> x) {
  if (f.values.size() != ps.size()) throw OperatorError("field sample count does not match the particle count");
  if (static_cast<int>(x.size()) != ps.dim()) throw OperatorError("evaluation point has the wrong dimension");
}

}  // namespace

double field_value_at(const ParticleSystem& ps, const FieldSamples& f, std::span<const double> x) {
  check_sizes(ps, f, x);
  auto& nbrs = scratch();
  ps.grid().query(x, ps.h(), false, nbrs);
  return center_value(ps, f, x, nbrs);
}

FieldSamples FieldSamples::sample(const ParticleSystem& ps, AnalyticField field) {
  FieldSamples out;
  out.values.resize(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) out.values[i] = field.value(ps.point(i));
  out.analytic = std::move(field);
  return out;
}

double interpolate(const ParticleSystem& ps, const RadialWeight& w, const FieldSamples& f, std::span<const double> x) {
  check_sizes(ps, f, x);
  auto& nbrs = scratch();
  const double h = ps.h();
  ps.grid().query(x, h, false, nbrs);
  const double inv_hd = inverse_power(h, ps.dim());
  double sum = 0.0;
  for (std::size_t i : nbrs) {
    const double r = distance(ps.point(i), x);
    sum += ps.volume(i) * f.values[i] * (w.evaluate(r / h) * inv_hd);
  }
  return sum;
}

std::vector<double> gradient(const ParticleSystem& ps, const RadialWeight& w, const FieldSamples& f,
                             std::span<const double> x) {
  check_sizes(ps, f, x);
  auto& nbrs = scratch();
  const double h = ps.h();
  const int d = ps.dim();
  ps.grid().query(x, h, false, nbrs);
  const double fx = center_value(ps, f, x, nbrs);
  const double inv_hd = inverse_power(h, d);
  std::vector<double> sum(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i : nbrs) {
    const auto p = ps.point(i);
    const double r = distance(p, x);
    if (r == 0.0) continue;
    const double coef = ps.volume(i) * (f.values[i] - fx) / r * (w.evaluate(r / h) * inv_hd);
    for (int k = 0; k < d; ++k) sum[static_cast<std::size_t>(k)] += coef * ((p[k] - x[k]) / r);
  }
  for (double& s : sum) s *= static_cast<double>(d);
  return sum;
}

double laplacian(const ParticleSystem& ps, const RadialWeight& w, const FieldSamples& f, std::span<const double> x) {
  check_sizes(ps, f, x);
  auto& nbrs = scratch();
  const double h = ps.h();
  const int d = ps.dim();
  ps.grid().query(x, h, false, nbrs);
  const double fx = center_value(ps, f, x, nbrs);
  const double inv_hd = inverse_power(h, d);
  double sum = 0.0;
  for (std::size_t i : nbrs) {
    const double r = distance(ps.point(i), x);
    if (r == 0.0) continue;
    sum += ps.volume(i) * (f.values[i] - fx) / (r * r) * (w.evaluate(r / h) * inv_hd);
  }
  return 2.0 * static_cast<double>(d) * sum;
}

std::vector<std::vector<double>> evaluate_field(const ParticleSystem& ps, const RadialWeight& w,
                                                const FieldSamples& f, const PointSet& points, OperatorKind which) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> out(n);
  if (n == 0) return out;
  if (points.dim() != ps.dim()) throw OperatorError("evaluation points have the wrong dimension");
  if (f.values.size() != ps.size()) throw OperatorError("field sample count does not match the particle count");

  // Exceptions may not cross the parallel region; keep the first message.
  std::string failure;
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < n; ++k) {
    try {
      switch (which) {
        case OperatorKind::interpolant:
          out[k] = {interpolate(ps, w, f, points[k])};
          break;
        case OperatorKind::gradient:
          out[k] = gradient(ps, w, f, points[k]);
          break;
        case OperatorKind::laplacian:
          out[k] = {laplacian(ps, w, f, points[k])};
          break;
      }
    } catch (const std::exception& e) {
#pragma omp critical
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw OperatorError(failure);
  return out;
}

}  // namespace gpm
