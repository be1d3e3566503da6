#include "gpm/neighbor_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpm {

NeighborGrid::NeighborGrid(int dim, std::span<const double> coords, double cell_size)
    : dim_(dim), cell_size_(cell_size) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("NeighborGrid: dimension must be 1, 2 or 3");
  if (!(cell_size > 0.0)) throw std::invalid_argument("NeighborGrid: cell size must be positive");
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t n = coords.size() / d;

  double hi[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) {
    origin_[k] = std::numeric_limits<double>::infinity();
    hi[k] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) {
      origin_[k] = std::min(origin_[k], coords[i * d + k]);
      hi[k] = std::max(hi[k], coords[i * d + k]);
    }
  }
  if (n == 0) {
    for (int k = 0; k < dim; ++k) origin_[k] = hi[k] = 0.0;
  }

  // Keep the dense cell array proportional to N.
  const double max_cells = std::max<double>(64.0, 4.0 * static_cast<double>(n));
  for (;;) {
    double total = 1.0;
    for (int k = 0; k < dim; ++k) total *= std::floor((hi[k] - origin_[k]) / cell_size_) + 1.0;
    if (total <= max_cells) break;
    cell_size_ *= 2.0;
  }
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) {
    counts_[k] = static_cast<std::ptrdiff_t>(std::floor((hi[k] - origin_[k]) / cell_size_)) + 1;
    total *= static_cast<std::size_t>(counts_[k]);
  }

  auto cell_of = [&](std::size_t i) {
    std::size_t c = 0;
    for (int k = dim - 1; k >= 0; --k) {
      auto ck = static_cast<std::ptrdiff_t>(std::floor((coords[i * d + k] - origin_[k]) / cell_size_));
      ck = std::clamp<std::ptrdiff_t>(ck, 0, counts_[k] - 1);
      c = c * static_cast<std::size_t>(counts_[k]) + static_cast<std::size_t>(ck);
    }
    return c;
  };

  std::vector<std::size_t> cell(n);
  cell_start_.assign(total + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cell[i] = cell_of(i);
    ++cell_start_[cell[i] + 1];
  }
  for (std::size_t c = 0; c < total; ++c) cell_start_[c + 1] += cell_start_[c];

  // Counting sort keeps ascending index order inside each cell.
  index_.resize(n);
  sorted_coords_.resize(n * d);
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t slot = fill[cell[i]]++;
    index_[slot] = i;
    for (std::size_t k = 0; k < d; ++k) sorted_coords_[slot * d + k] = coords[i * d + k];
  }
}

template <typename Visit>
void NeighborGrid::visit(std::span<const double> x, double r, Visit&& fn) const {
  std::ptrdiff_t lo[3] = {0, 0, 0};
  std::ptrdiff_t hi[3] = {0, 0, 0};
  for (int k = 0; k < dim_; ++k) {
    const double a = std::floor((x[k] - r - origin_[k]) / cell_size_);
    const double b = std::floor((x[k] + r - origin_[k]) / cell_size_);
    if (b < 0.0 || a > static_cast<double>(counts_[k] - 1)) return;
    lo[k] = static_cast<std::ptrdiff_t>(std::max(a, 0.0));
    hi[k] = static_cast<std::ptrdiff_t>(std::min(b, static_cast<double>(counts_[k] - 1)));
  }
  const std::size_t d = static_cast<std::size_t>(dim_);
  const double r2 = r * r;
  for (std::ptrdiff_t c2 = lo[2]; c2 <= hi[2]; ++c2) {
    for (std::ptrdiff_t c1 = lo[1]; c1 <= hi[1]; ++c1) {
      const std::size_t row = (static_cast<std::size_t>(c2) * static_cast<std::size_t>(counts_[1]) +
                               static_cast<std::size_t>(c1)) *
                              static_cast<std::size_t>(counts_[0]);
      const std::size_t first = cell_start_[row + static_cast<std::size_t>(lo[0])];
      const std::size_t last = cell_start_[row + static_cast<std::size_t>(hi[0]) + 1];
      for (std::size_t s = first; s < last; ++s) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = sorted_coords_[s * d + k] - x[k];
          d2 += diff * diff;
        }
        if (d2 < r2) fn(d2, index_[s]);
      }
    }
  }
}

void NeighborGrid::query(std::span<const double> x, double r, bool exclude_center,
                         std::vector<std::size_t>& out) const {
  out.clear();
  visit(x, r, [&](double d2, std::size_t i) {
    if (!exclude_center || d2 > 0.0) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
}

void NeighborGrid::query_with_distance(std::span<const double> x, double r, bool exclude_center,
                                       std::vector<std::pair<double, std::size_t>>& out) const {
  out.clear();
  visit(x, r, [&](double d2, std::size_t i) {
    if (!exclude_center || d2 > 0.0) out.emplace_back(d2, i);
  });
}

}  // namespace gpm
