#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpm/geometry.hpp"
#include "gpm/voronoi.hpp"
#include "gpm/weights.hpp"

namespace gpm {

class IndicatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse nonnegative matrix a_ij: row sums are Voronoi volumes |sigma_i|,
/// column sums are particle volumes V_j.
class TransportPlan {
 public:
  explicit TransportPlan(std::size_t n = 0) : rows_(n) {}

  std::size_t size() const { return rows_.size(); }
  void add(std::size_t i, std::size_t j, double mass);
  double at(std::size_t i, std::size_t j) const;
  const std::vector<std::pair<std::size_t, double>>& row(std::size_t i) const { return rows_[i]; }

  std::vector<double> row_sums() const;
  std::vector<double> column_sums() const;
  double min_entry() const;

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

enum class DeviationKind { exact, upper_bound };

std::string to_string(DeviationKind kind);

struct DeviationResult {
  double value = 0.0;
  DeviationKind kind = DeviationKind::upper_bound;
  std::optional<TransportPlan> plan;
  std::size_t n_particles = 0;
};

/// max_i sum_j (a_ij + a_ji) / |sigma_i| * |x_i - x_j| for a plan whose
/// marginals match the diagram and the particle volumes (relative 1e-9).
double local_deviation(const TransportPlan& plan, const ParticleSystem& ps, const VoronoiDiagram& diagram);

/// Minimizes q over z = (a_11..a_NN, s_1..s_N, q) >= 0 subject to the two
/// marginal families and q = s_i + sum_j (a_ij + a_ji)/|sigma_i| |x_i - x_j|.
/// Refuses N above `cap` since the program has N^2 + N + 1 variables.
DeviationResult voronoi_deviation_exact(const ParticleSystem& ps, const VoronoiDiagram& diagram,
                                        std::size_t cap = 40);

/// Greedy transport: every cell keeps min(|sigma_i|, V_i) in place, and the
/// excess of each cell (ascending index) goes to the nearest sites that still
/// lack volume. The result is feasible, so its deviation bounds d_N above.
DeviationResult voronoi_deviation_bound(const ParticleSystem& ps, const VoronoiDiagram& diagram);

/// c0 = h^m / (r_N + d_N) for one member of a family.
struct RegularityReport {
  double c0 = 0.0;
  bool unbounded = false;  // r_N + d_N == 0
};

RegularityReport regularity_report(double r_n, double d_n, double h, double m);

/// A family counts as regular when every c0 is positive and max/min stays
/// within `band`.
struct RegularitySummary {
  double min_c0 = 0.0;
  double max_c0 = 0.0;
  bool regular = false;
};

RegularitySummary summarize_regularity(std::span<const double> c0, double band = 4.0);

/// Multi-index alpha together with a discrete sum and its continuum counterpart.
struct FunctionalValue {
  std::vector<int> alpha;
  double value = 0.0;      // discrete sum minus continuum
  double continuum = 0.0;  // int y^alpha / |y|^l w_h(|y|) dy
};

/// J_alpha (|alpha| <= n), J~_{alpha,2} (1 <= |alpha| <= n + 2) and K_{n+1} at x.
struct ErrorFunctionals {
  std::vector<FunctionalValue> j;
  std::vector<FunctionalValue> j_tilde;
  double k = 0.0;
};

ErrorFunctionals error_functionals(const ParticleSystem& ps, const RadialWeight& w, std::span<const double> x,
                                   int max_order);

/// J_0(x) = sum_{Lambda(x,h)} V_i w_h(|x_i - x|) - 1.
double consistency_functional(const ParticleSystem& ps, const RadialWeight& w, std::span<const double> x);

/// int_{R^d} y^alpha / |y|^l w_h(|y|) dy via the radial reduction; zero when
/// any component of alpha is odd.
double continuum_moment(const RadialWeight& w, double h, std::span<const int> alpha, int l);

/// int_{S^{d-1}} theta^alpha d theta.
double sphere_monomial_integral(std::span<const int> alpha);

/// All multi-indices in d variables with total order `order`, lexicographic.
std::vector<std::vector<int>> multi_indices(int dim, int order);

}  // namespace gpm
