#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpm/neighbor_grid.hpp"

namespace gpm {

/// Raised when a geometric input violates its contract (bad box, duplicate points, ...).
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box [lower, upper] in R^d.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const;
  double extent(int axis) const { return upper[axis] - lower[axis]; }
  bool contains_open(std::span<const double> p) const;
  bool contains_closed(std::span<const double> p) const;
};

/// The computational domain: an open box plus the width H of the layer
/// around it that particles may also occupy.
class RectDomain {
 public:
  RectDomain(std::vector<double> lower, std::vector<double> upper, double extension);

  /// Unit square (0,1)^2 with H = 0.1, the standard experiment setup.
  static RectDomain unit_square(double extension = 0.1);

  int dim() const { return static_cast<int>(lower_.size()); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double extension() const { return extension_; }

  Box inner() const { return Box{lower_, upper_}; }
  Box extended() const;
  double extended_volume() const { return extended().volume(); }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  double extension_;
};

/// Returns the H-inflated box Omega_H.
Box extend_domain(const RectDomain& domain);

/// Flat storage for N points in R^d.
class PointSet {
 public:
  PointSet() = default;
  PointSet(int dim, std::vector<double> coords);

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const { return coords_; }

  void push_back(std::span<const double> p);

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

/// Throws GeometryError if any two points compare exactly equal.
void require_distinct(const PointSet& points);

/// Particles, their volumes, and the influence radius h over a RectDomain.
///
/// Construction validates the invariants: points distinct and inside the
/// closed extended box, volumes positive with sum |Omega_H| (relative 1e-12),
/// and 0 < h < H. A bucket grid with cell size h is built once for neighbor
/// queries and is read-only afterwards.
class ParticleSystem {
 public:
  ParticleSystem(RectDomain domain, PointSet points, std::vector<double> volumes, double h);

  const RectDomain& domain() const { return domain_; }
  const PointSet& points() const { return points_; }
  std::span<const double> point(std::size_t i) const { return points_[i]; }
  const std::vector<double>& volumes() const { return volumes_; }
  double volume(std::size_t i) const { return volumes_[i]; }
  double h() const { return h_; }
  int dim() const { return points_.dim(); }
  std::size_t size() const { return points_.size(); }
  const NeighborGrid& grid() const { return *grid_; }

 private:
  RectDomain domain_;
  PointSet points_;
  std::vector<double> volumes_;
  double h_;
  std::shared_ptr<const NeighborGrid> grid_;
};

/// Lambda(x, r) = { i : |x - x_i| < r }, or Lambda*(x, r) with the center
/// excluded (0 < |x - x_i| < r). Indices are returned in ascending order.
std::vector<std::size_t> neighbors(const ParticleSystem& ps, std::span<const double> x, double r,
                                   bool exclude_center);

/// Lattice points ((i + eta_1) dx, (j + eta_2) dx) strictly inside Omega_H.
///
/// Lattice nodes are selected on their unperturbed position; each noise
/// component eta is uniform in (-noise_bound, noise_bound), drawn from a
/// counter-based generator keyed by (seed, lattice index, axis). A component
/// that would push the point out of Omega_H is mirrored (-eta), so the node
/// count does not depend on the draw.
PointSet perturbed_lattice(double dx, double noise_bound, std::uint64_t seed, const RectDomain& domain);

/// N equal volumes |Omega_H| / N.
std::vector<double> uniform_volumes(std::size_t n, const RectDomain& domain);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

/// Uniform draw in (0, 1) from a counter-based hash of (seed, key...).
double counter_uniform(std::uint64_t seed, std::int64_t a, std::int64_t b, std::int64_t c);

}  // namespace gpm
