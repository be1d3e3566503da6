#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gpm {

class WeightError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One polynomial piece on [lo, hi): sum_k coeffs[k] * r^(min_power + k).
/// min_power is negative only for singular profiles such as the classic
/// MPS weight 1/r - 1.
struct PolyPiece {
  double lo = 0.0;
  double hi = 1.0;
  int min_power = 0;
  std::vector<double> coeffs;

  double eval(double r) const;
  double eval_derivative(double r) const;
  /// Smallest exponent carrying a nonzero coefficient (INT_MAX if none).
  int lowest_degree() const;
};

/// Piecewise-polynomial radial profile w(r) = scale * p(r) on [0, 1),
/// zero on [1, inf), tagged with the dimension it is normalized for and the
/// moment order n / smoothness order k it claims.
class RadialWeight {
 public:
  RadialWeight(std::string name, int dim, double scale, std::vector<PolyPiece> pieces, int moment_order = 1,
               std::optional<int> smooth_order = std::nullopt);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double scale() const { return scale_; }
  const std::vector<PolyPiece>& pieces() const { return pieces_; }
  int moment_order() const { return moment_order_; }
  std::optional<int> smooth_order() const { return smooth_order_; }

  double operator()(double r) const { return evaluate(r); }
  double evaluate(double r) const;
  double derivative(double r) const;

  RadialWeight with_scale(double scale) const;
  RadialWeight with_name(std::string name) const;
  RadialWeight with_claims(int moment_order, std::optional<int> smooth_order) const;

 private:
  const PolyPiece* piece_at(double r) const;

  std::string name_;
  int dim_;
  double scale_;
  std::vector<PolyPiece> pieces_;
  int moment_order_;
  std::optional<int> smooth_order_;
};

inline double evaluate(const RadialWeight& w, double r) { return w.evaluate(r); }

/// w_h(r) = h^-d w(r / h).
double evaluate_scaled(const RadialWeight& w, double h, double r);

/// Surface measure of the unit sphere in R^d (2, 2*pi, 4*pi, ...).
double unit_sphere_measure(int dim);

/// int_0^1 r^power w(r) dr by Gauss-Legendre on each piece; +inf when the
/// integrand is not integrable at 0.
double radial_moment(const RadialWeight& w, int power);

/// int_{R^d} w(|x|) dx.
double mass(const RadialWeight& w);

/// int_{R^d} |x|^2 w(|x|) dx.
double second_moment(const RadialWeight& w, int dim);

struct AdmissibilityReport {
  bool bounded = false;        // no singular term at r = 0
  bool continuous = false;     // jumps at piece breaks and at r = 1 below 1e-12
  bool support = false;        // w(1-) = 0 and w not identically 0 near 1
  bool unit_integral = false;  // |mass - 1| <= 1e-10
  double integral = 0.0;
  double max_jump = 0.0;

  bool admissible() const { return bounded && continuous && support && unit_integral; }
};

AdmissibilityReport check_admissible(const RadialWeight& w);

/// Residuals s_{d-1} int_0^1 r^(d+2j-1) w dr for j = 1..floor(n/2); the
/// order holds when all are below 1e-10 in magnitude.
struct MomentCheck {
  bool satisfied = false;
  std::vector<double> residuals;
};

MomentCheck check_moment_order(const RadialWeight& w, int n);

/// Lowest exponent with a nonzero coefficient on the piece containing 0.
int lowest_degree_at_origin(const RadialWeight& w);

/// True when the profile is C^1 at interior piece breaks and its lowest
/// degree at the origin is at least k + 1.
bool check_smoothness_order(const RadialWeight& w, int k);

/// Largest jump of w' across interior breaks (0 for a single piece).
double derivative_jump(const RadialWeight& w);

/// Polynomial w(r) = gamma (1 + sum_{l=1}^p a_l r^l) on [0, 1) with
/// w(1) = 0, w'(1) = 0 and the floor(n/2) radial moment conditions.
/// Underdetermined systems take the minimum-norm coefficients; gamma is set
/// by quadrature so the d-dimensional mass is 1.
RadialWeight construct_polynomial_weight(int dim, int n, int p);

/// a_1..a_p of a profile gamma (1 + sum a_l r^l) read off its first piece.
std::vector<double> polynomial_coefficients(const RadialWeight& w);

/// The named reference weights: I1..I3, G1..G3, L1..L3, spline2d, mps-classic.
/// Normalization constants are re-checked by quadrature when the catalog is
/// first built; admissible entries whose printed constant misses unit mass by
/// more than 1e-8 are rescaled, and each rescale is recorded.
const std::vector<RadialWeight>& catalog();
const std::vector<std::string>& catalog_corrections();
const RadialWeight& catalog_weight(std::string_view name);

/// w(r) = -(1/d) r w_sph'(r), the gradient/Laplacian profile equivalent to an SPH kernel.
RadialWeight sph_transform(const RadialWeight& w_sph);

struct MpsLaplacianTransform {
  RadialWeight weight;
  double lambda;
};

/// lambda = int |x|^2 w_mps dx and w(r) = r^2 w_mps(r) / lambda.
MpsLaplacianTransform mps_laplacian_transform(const RadialWeight& w_mps, int dim);

/// Exact coefficient-by-coefficient comparison of breaks, pieces and scale.
bool same_profile(const RadialWeight& a, const RadialWeight& b);

std::string to_json(const RadialWeight& w);
RadialWeight weight_from_json(std::string_view text);

}  // namespace gpm
