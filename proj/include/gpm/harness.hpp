#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpm/geometry.hpp"
#include "gpm/indicators.hpp"
#include "gpm/operators.hpp"
#include "gpm/weights.hpp"

namespace gpm {

class StudyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// h = 2.6 * 2^(5/m - 5) * dx^(1/m). Throws StudyError for nonpositive
/// inputs, and when `extension` is given and h >= extension.
double influence_radius(double dx, double m, std::optional<double> extension = std::nullopt);

/// Named analytic test fields in d = 2: "sin2pi" = sin(2 pi (x + y)),
/// "linear" = 1 + 2x - 3y, "quadratic" = x^2 + x y - 2 y^2, "zero".
AnalyticField test_function(std::string_view id);
const std::vector<std::string>& test_function_ids();

OperatorKind parse_operator(std::string_view name);  // interp | grad | lap
std::string operator_name(OperatorKind op);

/// max over particles in the open inner box of |true - approx| (Euclidean
/// norm of the error vector for the gradient), divided by the max of |true|
/// over a `samples` x `samples` grid of the closed inner box. Throws
/// StudyError when that denominator is zero or no particle lies inside.
double relative_error(const ParticleSystem& ps, const RadialWeight& w, const AnalyticField& f, OperatorKind op,
                      int samples = 512);

/// ln(e1 / e2) / ln(h1 / h2); throws StudyError on nonpositive inputs or h1 == h2.
double observed_rate(double e1, double h1, double e2, double h2);

/// interp/grad: min(m - 1, n + 1); lap: min(m - 2, n + 1); nullopt when
/// that is not positive.
std::optional<double> theoretical_rate(OperatorKind op, double m, int n);

/// Same, but also nullopt when the weight lacks the smoothness order the
/// operator needs (k >= 0 for the gradient, k >= 1 for the Laplacian).
std::optional<double> theoretical_rate(OperatorKind op, double m, const RadialWeight& w);

/// "2^-5..2^-9" (integer exponents, step 1 either way) or "0.03125,0.015625".
std::vector<double> parse_dx_levels(std::string_view text);

struct StudyConfig {
  std::vector<double> dx_levels;
  double m = 5.0;
  std::string weight_name = "I1";
  OperatorKind op = OperatorKind::interpolant;
  std::uint64_t seed = 7;
  std::string test_function = "sin2pi";
  double noise = 0.25;  // perturbation bound as a fraction of dx
  RectDomain domain = RectDomain::unit_square();
  bool indicators = true;  // covering radius and greedy d_N per level

  /// Throws StudyError unless levels are positive and strictly decreasing
  /// and h < H at every level.
  void validate() const;
};

struct StudyLevel {
  double dx = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  std::optional<double> r_n;
  std::optional<DeviationResult> d_n;
  std::optional<double> rel_error;
  std::optional<double> rate_observed;  // against the previous level
  std::string failure;                  // empty unless the level failed
};

struct StudyResult {
  StudyConfig config;
  std::vector<StudyLevel> levels;
  std::optional<double> rate_theoretical;

  /// Observed rate of the last two levels, if both have errors.
  std::optional<double> finest_rate() const;
};

/// Runs every level in order: perturbed lattice, uniform volumes, h, the
/// operator error and optionally the indicators. A failing level records
/// its message and the study continues. Deterministic per (seed, config).
StudyResult run_study(const StudyConfig& cfg);

/// Columns dx,h,N,r_N,dN_kind,dN,rel_error,rate_observed,rate_theoretical.
void write_study_csv(const StudyResult& result, const std::string& path);

/// Two columns "h rel_error" for log-log plotting.
void write_study_plot(const StudyResult& result, const std::string& path);

}  // namespace gpm
