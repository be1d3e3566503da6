#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gpm {

/// Uniform bucket grid over a fixed point cloud (d <= 3) for fixed-radius
/// queries. Points are copied into cell order at construction; the grid is
/// immutable afterwards and safe to query from several threads.
class NeighborGrid {
 public:
  NeighborGrid(int dim, std::span<const double> coords, double cell_size);

  int dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  double cell_size() const { return cell_size_; }

  /// Appends to `out` every index i with |x - p_i| < r (and |x - p_i| > 0 when
  /// exclude_center is set), sorted ascending. `out` is cleared first.
  void query(std::span<const double> x, double r, bool exclude_center, std::vector<std::size_t>& out) const;

  /// Like query(), but returns (squared distance, index) pairs unsorted, in
  /// cell order. Used by searches that rank candidates by distance.
  void query_with_distance(std::span<const double> x, double r, bool exclude_center,
                           std::vector<std::pair<double, std::size_t>>& out) const;

 private:
  template <typename Visit>
  void visit(std::span<const double> x, double r, Visit&& fn) const;

  int dim_;
  double cell_size_;
  double origin_[3] = {0.0, 0.0, 0.0};
  std::ptrdiff_t counts_[3] = {1, 1, 1};
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> index_;
  std::vector<double> sorted_coords_;
};

}  // namespace gpm
