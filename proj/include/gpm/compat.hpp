#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpm/geometry.hpp"
#include "gpm/operators.hpp"
#include "gpm/weights.hpp"

namespace gpm {

/// SPH masses and densities; sum m_i / rho_i must equal |Omega_H|.
struct SphParams {
  std::vector<double> masses;
  std::vector<double> densities;

  std::vector<double> volumes() const;
  /// Throws GeometryError when sizes or the volume identity do not hold.
  void validate(const ParticleSystem& ps) const;
};

/// MPS reference number density n^ and reference second moment lambda^ of
/// the unscaled kernel.
struct MpsParams {
  double n_hat = 1.0;
  double lambda_hat = 1.0;

  /// n^ = N / |Omega_H| and lambda^ = int |x|^2 w_mps(|x|) dx.
  static MpsParams canonical(const ParticleSystem& ps, const RadialWeight& w_mps);
};

/// sum_i (m_i / rho_i) f(x_i) w_h(|x - x_i|).
double sph_interpolant(const ParticleSystem& ps, const SphParams& params, const RadialWeight& w_sph,
                       const FieldSamples& f, std::span<const double> x);

/// sum_{i != x} (m_i / rho_i) (f(x_i) - f(x)) grad_x w_h(|x - x_i|).
std::vector<double> sph_gradient(const ParticleSystem& ps, const SphParams& params, const RadialWeight& w_sph,
                                 const FieldSamples& f, std::span<const double> x);

/// 2 sum_{i != x} (m_i / rho_i) (f(x) - f(x_i)) / |x - x_i| * (x - x_i)/|x - x_i| . grad_x w_h.
double sph_laplacian(const ParticleSystem& ps, const SphParams& params, const RadialWeight& w_sph,
                     const FieldSamples& f, std::span<const double> x);

/// (d / n^) sum_{i != x} (f(x_i) - f(x)) / |x_i - x| * (x_i - x) / |x_i - x| * w_h(|x_i - x|).
std::vector<double> mps_gradient(const ParticleSystem& ps, const MpsParams& params, const RadialWeight& w_mps,
                                 const FieldSamples& f, std::span<const double> x);

/// 2d / (n^ lambda_h) sum_{i != x} (f(x_i) - f(x)) w_h(|x_i - x|), where
/// lambda_h = h^2 lambda^ is the second moment of the scaled kernel w_h.
double mps_laplacian(const ParticleSystem& ps, const MpsParams& params, const RadialWeight& w_mps,
                     const FieldSamples& f, std::span<const double> x);

/// lambda^ = int |x|^2 w_mps(|x|) dx by radial quadrature.
double mps_lambda(const RadialWeight& w_mps, int dim);

/// Conditions an SPH kernel needs for the gradient/Laplacian estimates:
/// C^2 across breaks, w' < 0 on (0, 1), and w'(s)/s bounded as s -> 0.
struct SphKernelConditions {
  bool c2 = false;
  bool decreasing = false;
  bool finite_origin_limit = false;

  bool satisfied() const { return c2 && decreasing && finite_origin_limit; }
};

SphKernelConditions check_sph_conditions(const RadialWeight& w_sph);

/// The MPS gradient estimate needs an admissible kernel with smoothness order k = 0.
bool mps_gradient_covered(const RadialWeight& w_mps);

/// Max-abs difference between a native SPH/MPS operator and its
/// generalized counterpart over randomized configurations.
struct EquivalenceResult {
  std::string name;
  double max_abs_diff = 0.0;
  std::size_t evaluations = 0;
  bool passed = false;
};

struct EquivalenceOptions {
  std::uint64_t seed = 11;
  int configs = 100;
  std::size_t particles = 50;
  double tolerance = 1e-13;
};

/// Runs sph_interpolant, sph_gradient, sph_laplacian, mps_gradient and
/// mps_laplacian against interpolate/gradient/laplacian on random particles,
/// volumes, h and quadratic fields, at every particle and at extra random
/// points. SPH uses the cubic B-spline, the MPS gradient spline2d and the
/// MPS Laplacian the classic 1/r - 1 profile.
std::vector<EquivalenceResult> check_equivalences(const EquivalenceOptions& options = {});

}  // namespace gpm
