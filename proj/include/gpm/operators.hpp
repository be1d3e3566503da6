#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gpm/geometry.hpp"
#include "gpm/weights.hpp"

namespace gpm {

class OperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-form field with its gradient and Laplacian, for error evaluation
/// and for f(x) at points that are not particles.
struct AnalyticField {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<double(std::span<const double>)> laplacian;
};

/// values[i] = f(x_i), optionally backed by the analytic field.
struct FieldSamples {
  std::vector<double> values;
  std::optional<AnalyticField> analytic;

  static FieldSamples sample(const ParticleSystem& ps, AnalyticField field);
};

/// f(x): a particle located exactly at x wins, then the analytic field;
/// OperatorError when neither is available.
double field_value_at(const ParticleSystem& ps, const FieldSamples& f, std::span<const double> x);

enum class OperatorKind { interpolant, gradient, laplacian };

/// Pi_h f(x) = sum_{i in Lambda(x,h)} V_i f(x_i) w_h(|x_i - x|).
double interpolate(const ParticleSystem& ps, const RadialWeight& w, const FieldSamples& f, std::span<const double> x);

/// grad_h f(x) = d sum_{i in Lambda*(x,h)} V_i (f(x_i) - f(x)) / |x_i - x| * (x_i - x) / |x_i - x| * w_h.
///
/// f(x) is taken from a particle located exactly at x, else from the
/// analytic field; OperatorError when neither exists.
std::vector<double> gradient(const ParticleSystem& ps, const RadialWeight& w, const FieldSamples& f,
                             std::span<const double> x);

/// lap_h f(x) = 2d sum_{i in Lambda*(x,h)} V_i (f(x_i) - f(x)) / |x_i - x|^2 * w_h.
double laplacian(const ParticleSystem& ps, const RadialWeight& w, const FieldSamples& f, std::span<const double> x);

/// Applies one operator to every point; entry k has size 1 (interpolant,
/// Laplacian) or d (gradient). Parallel over points, bitwise identical to
/// the serial loop.
std::vector<std::vector<double>> evaluate_field(const ParticleSystem& ps, const RadialWeight& w,
                                                const FieldSamples& f, const PointSet& points, OperatorKind which);

}  // namespace gpm
