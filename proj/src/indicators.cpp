#include "gpm/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gpm/simplex.hpp"

namespace gpm {

namespace {

constexpr double kMarginalTol = 1e-9;

double site_distance(const ParticleSystem& ps, std::size_t i, std::size_t j) {
  const auto a = ps.point(i);
  const auto b = ps.point(j);
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(d2);
}

void check_marginals(const TransportPlan& plan, const ParticleSystem& ps, const VoronoiDiagram& diagram) {
  const std::size_t n = ps.size();
  if (plan.size() != n || diagram.size() != n) throw IndicatorError("plan, diagram and particles differ in size");
  const auto rows = plan.row_sums();
  const auto cols = plan.column_sums();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(rows[i] - diagram.volumes[i]) > kMarginalTol * std::max(diagram.volumes[i], 1e-300) ||
        std::abs(cols[i] - ps.volume(i)) > kMarginalTol * ps.volume(i)) {
      throw IndicatorError("transport plan marginals do not match volumes at index " + std::to_string(i));
    }
  }
}

}  // namespace

void TransportPlan::add(std::size_t i, std::size_t j, double mass) {
  if (mass < 0.0) throw IndicatorError("transport plan entries must be nonnegative");
  if (mass == 0.0) return;
  for (auto& [col, value] : rows_[i]) {
    if (col == j) {
      value += mass;
      return;
    }
  }
  rows_[i].emplace_back(j, mass);
}

double TransportPlan::at(std::size_t i, std::size_t j) const {
  for (const auto& [col, value] : rows_[i]) {
    if (col == j) return value;
  }
  return 0.0;
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const auto& [j, a] : rows_[i]) out[i] += a;
  }
  return out;
}

std::vector<double> TransportPlan::column_sums() const {
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const auto& [j, a] : rows_[i]) out[j] += a;
  }
  return out;
}

double TransportPlan::min_entry() const {
  double m = 0.0;
  for (const auto& row : rows_) {
    for (const auto& entry : row) m = std::min(m, entry.second);
  }
  return m;
}

std::string to_string(DeviationKind kind) { return kind == DeviationKind::exact ? "exact" : "upper_bound"; }

double local_deviation(const TransportPlan& plan, const ParticleSystem& ps, const VoronoiDiagram& diagram) {
  check_marginals(plan, ps, diagram);
  const std::size_t n = ps.size();
  std::vector<double> weighted(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, a] : plan.row(i)) {
      if (i == j) continue;
      const double moved = a * site_distance(ps, i, j);
      weighted[i] += moved;  // a_ij for row i
      weighted[j] += moved;  // a_ji for row j
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(diagram.volumes[i] > 0.0)) throw IndicatorError("zero-volume Voronoi cell " + std::to_string(i));
    worst = std::max(worst, weighted[i] / diagram.volumes[i]);
  }
  return worst;
}

DeviationResult voronoi_deviation_exact(const ParticleSystem& ps, const VoronoiDiagram& diagram, std::size_t cap) {
  const std::size_t n = ps.size();
  if (n > cap) {
    throw IndicatorError("exact Voronoi deviation refused for N = " + std::to_string(n) + " > cap " +
                         std::to_string(cap) + "; use voronoi_deviation_bound for large instances");
  }
  if (diagram.size() != n) throw IndicatorError("diagram and particles differ in size");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(diagram.volumes[i] > 0.0)) throw IndicatorError("zero-volume Voronoi cell " + std::to_string(i));
  }

  const auto nn = static_cast<Eigen::Index>(n);
  const Eigen::Index vars = nn * nn + nn + 1;
  const Eigen::Index q = vars - 1;
  LinearProgram lp;
  lp.A = Eigen::MatrixXd::Zero(3 * nn, vars);
  lp.b = Eigen::VectorXd::Zero(3 * nn);
  lp.c = Eigen::VectorXd::Zero(vars);
  lp.c(q) = 1.0;
  auto a_index = [nn](Eigen::Index i, Eigen::Index j) { return i * nn + j; };

  for (Eigen::Index i = 0; i < nn; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < nn; ++j) {
      lp.A(i, a_index(i, j)) = 1.0;       // row sums: |sigma_i|
      lp.A(nn + i, a_index(j, i)) = 1.0;  // column sums: V_i
    }
    lp.b(i) = diagram.volumes[iu];
    lp.b(nn + i) = ps.volume(iu);

    // q - s_i - sum_j (a_ij + a_ji) |x_i - x_j| / |sigma_i| = 0
    const Eigen::Index row = 2 * nn + i;
    lp.A(row, q) = 1.0;
    lp.A(row, nn * nn + i) = -1.0;
    for (Eigen::Index j = 0; j < nn; ++j) {
      if (j == i) continue;
      const double coef = site_distance(ps, iu, static_cast<std::size_t>(j)) / diagram.volumes[iu];
      lp.A(row, a_index(i, j)) -= coef;
      lp.A(row, a_index(j, i)) -= coef;
    }
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) {
    throw IndicatorError("Voronoi deviation LP did not reach an optimum (volumes must sum to |Omega_H|)");
  }
  if (!(sol.feasibility_residual < 1e-9)) {
    throw IndicatorError("Voronoi deviation LP solution violates the constraints");
  }

  DeviationResult out;
  out.value = sol.objective;
  out.kind = DeviationKind::exact;
  out.n_particles = n;
  TransportPlan plan(n);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      const double a = sol.x(a_index(i, j));
      if (a > 0.0) plan.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j), a);
    }
  }
  out.plan = std::move(plan);
  return out;
}

DeviationResult voronoi_deviation_bound(const ParticleSystem& ps, const VoronoiDiagram& diagram) {
  const std::size_t n = ps.size();
  if (diagram.size() != n) throw IndicatorError("diagram and particles differ in size");
  TransportPlan plan(n);
  std::vector<double> capacity(n, 0.0);
  std::vector<double> excess(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double kept = std::min(diagram.volumes[i], ps.volume(i));
    plan.add(i, i, kept);
    excess[i] = diagram.volumes[i] - kept;
    capacity[i] = ps.volume(i) - kept;
  }

  const Box box = ps.domain().extended();
  double diagonal = 0.0;
  for (int k = 0; k < box.dim(); ++k) diagonal += box.extent(k) * box.extent(k);
  diagonal = std::sqrt(diagonal);
  const double spacing = std::pow(box.volume() / static_cast<double>(n), 1.0 / box.dim());
  // Rounding can leave the two marginal totals a few ulps apart.
  const double negligible = 1e-13 * box.volume() / static_cast<double>(n);

  // Rounds of growing radius: each surplus cell (ascending index) ships to
  // the nearest deficits within the current radius only, so mass moves no
  // farther than the first radius at which it finds room. Each round searches
  // a grid holding only the cells that still have room.
  std::vector<std::pair<double, std::size_t>> candidates;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i) {
    if (excess[i] > negligible) pending.push_back(i);
  }
  const int dim = ps.dim();
  for (double radius = 1.5 * spacing; !pending.empty(); radius *= 2.0) {
    std::vector<std::size_t> open;
    std::vector<double> open_coords;
    for (std::size_t j = 0; j < n; ++j) {
      if (capacity[j] <= 0.0) continue;
      open.push_back(j);
      const auto p = ps.point(j);
      open_coords.insert(open_coords.end(), p.begin(), p.end());
    }
    if (open.empty()) break;
    const NeighborGrid grid(dim, open_coords, radius);

    std::vector<std::size_t> still;
    for (std::size_t i : pending) {
      grid.query_with_distance(ps.point(i), radius, false, candidates);
      std::sort(candidates.begin(), candidates.end());
      for (const auto& [d2, k] : candidates) {
        const std::size_t j = open[k];
        if (j == i || capacity[j] <= 0.0) continue;
        const double moved = std::min(excess[i], capacity[j]);
        plan.add(i, j, moved);
        excess[i] -= moved;
        capacity[j] -= moved;
        if (excess[i] <= 0.0) break;
      }
      if (excess[i] > negligible) still.push_back(i);
    }
    pending.swap(still);
    if (radius > 2.0 * diagonal) break;
  }

  DeviationResult out;
  out.kind = DeviationKind::upper_bound;
  out.n_particles = n;
  out.value = local_deviation(plan, ps, diagram);
  out.plan = std::move(plan);
  return out;
}

RegularityReport regularity_report(double r_n, double d_n, double h, double m) {
  if (!(h > 0.0) || !(m >= 1.0)) throw IndicatorError("regularity_report: need h > 0 and m >= 1");
  if (r_n < 0.0 || d_n < 0.0) throw IndicatorError("regularity_report: indicators must be nonnegative");
  RegularityReport out;
  const double denom = r_n + d_n;
  if (denom == 0.0) {
    out.unbounded = true;
    out.c0 = std::numeric_limits<double>::infinity();
    return out;
  }
  out.c0 = std::pow(h, m) / denom;
  return out;
}

RegularitySummary summarize_regularity(std::span<const double> c0, double band) {
  RegularitySummary out;
  if (c0.empty()) return out;
  out.min_c0 = *std::min_element(c0.begin(), c0.end());
  out.max_c0 = *std::max_element(c0.begin(), c0.end());
  out.regular = out.min_c0 > 0.0 && out.max_c0 <= band * out.min_c0;
  return out;
}

std::vector<std::vector<int>> multi_indices(int dim, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(static_cast<std::size_t>(dim), 0);
  // Recursive fill of the first component, remainder distributed over the rest.
  auto fill = [&](auto&& self, int axis, int remaining) -> void {
    if (axis == dim - 1) {
      alpha[static_cast<std::size_t>(axis)] = remaining;
      out.push_back(alpha);
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[static_cast<std::size_t>(axis)] = a;
      self(self, axis + 1, remaining - a);
    }
  };
  fill(fill, 0, order);
  return out;
}

double sphere_monomial_integral(std::span<const int> alpha) {
  double log_num = 0.0;
  int total = 0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    log_num += std::lgamma(0.5 * (a + 1));
    total += a;
  }
  const double dim = static_cast<double>(alpha.size());
  return 2.0 * std::exp(log_num - std::lgamma(0.5 * (total + dim)));
}

double continuum_moment(const RadialWeight& w, double h, std::span<const int> alpha, int l) {
  const double sphere = sphere_monomial_integral(alpha);
  if (sphere == 0.0) return 0.0;
  const int order = std::accumulate(alpha.begin(), alpha.end(), 0);
  const int d = static_cast<int>(alpha.size());
  // y = h t: the integral scales as h^(|alpha| - l).
  return std::pow(h, order - l) * sphere * radial_moment(w, order - l + d - 1);
}

double consistency_functional(const ParticleSystem& ps, const RadialWeight& w, std::span<const double> x) {
  std::vector<std::size_t> nbrs;
  ps.grid().query(x, ps.h(), false, nbrs);
  const double h = ps.h();
  const double inv_hd = 1.0 / std::pow(h, ps.dim());
  double sum = 0.0;
  for (std::size_t i : nbrs) {
    double d2 = 0.0;
    for (int k = 0; k < ps.dim(); ++k) d2 += (ps.point(i)[k] - x[k]) * (ps.point(i)[k] - x[k]);
    sum += ps.volume(i) * w.evaluate(std::sqrt(d2) / h) * inv_hd;
  }
  return sum - 1.0;
}

ErrorFunctionals error_functionals(const ParticleSystem& ps, const RadialWeight& w, std::span<const double> x,
                                   int max_order) {
  if (max_order < 0) throw IndicatorError("error_functionals: order must be nonnegative");
  const int d = ps.dim();
  const double h = ps.h();
  const double inv_hd = 1.0 / std::pow(h, d);
  std::vector<std::size_t> nbrs;
  ps.grid().query(x, h, false, nbrs);

  struct Term {
    std::vector<double> offset;
    double r;
    double weighted;  // V_i w_h(r)
  };
  std::vector<Term> terms;
  for (std::size_t i : nbrs) {
    Term t{std::vector<double>(static_cast<std::size_t>(d)), 0.0, 0.0};
    double d2 = 0.0;
    for (int k = 0; k < d; ++k) {
      t.offset[static_cast<std::size_t>(k)] = ps.point(i)[k] - x[k];
      d2 += t.offset[static_cast<std::size_t>(k)] * t.offset[static_cast<std::size_t>(k)];
    }
    t.r = std::sqrt(d2);
    t.weighted = ps.volume(i) * w.evaluate(t.r / h) * inv_hd;
    terms.push_back(std::move(t));
  }
  auto monomial = [](const std::vector<double>& y, const std::vector<int>& alpha) {
    double v = 1.0;
    for (std::size_t k = 0; k < y.size(); ++k) v *= std::pow(y[k], alpha[k]);
    return v;
  };

  ErrorFunctionals out;
  for (int order = 0; order <= max_order; ++order) {
    for (auto& alpha : multi_indices(d, order)) {
      double sum = 0.0;
      for (const Term& t : terms) sum += monomial(t.offset, alpha) * t.weighted;
      const double cont = continuum_moment(w, h, alpha, 0);
      out.j.push_back({alpha, sum - cont, cont});
    }
  }
  for (int order = 1; order <= max_order + 2; ++order) {
    for (auto& alpha : multi_indices(d, order)) {
      double sum = 0.0;
      for (const Term& t : terms) {
        if (t.r > 0.0) sum += monomial(t.offset, alpha) / (t.r * t.r) * t.weighted;
      }
      const double cont = continuum_moment(w, h, alpha, 2);
      out.j_tilde.push_back({alpha, sum - cont, cont});
    }
  }
  for (const Term& t : terms) {
    out.k += std::pow(t.r, max_order + 1) * std::abs(t.weighted);
  }
  return out;
}

}  // namespace gpm
