#include "gpm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpm {

double Box::volume() const {
  double v = 1.0;
  for (int k = 0; k < dim(); ++k) v *= extent(k);
  return v;
}

bool Box::contains_open(std::span<const double> p) const {
  for (int k = 0; k < dim(); ++k) {
    if (!(p[k] > lower[k] && p[k] < upper[k])) return false;
  }
  return true;
}

bool Box::contains_closed(std::span<const double> p) const {
  for (int k = 0; k < dim(); ++k) {
    if (!(p[k] >= lower[k] && p[k] <= upper[k])) return false;
  }
  return true;
}

RectDomain::RectDomain(std::vector<double> lower, std::vector<double> upper, double extension)
    : lower_(std::move(lower)), upper_(std::move(upper)), extension_(extension) {
  if (lower_.empty() || lower_.size() != upper_.size()) {
    throw GeometryError("RectDomain: lower and upper must be non-empty and of equal length");
  }
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!(lower_[k] < upper_[k])) throw GeometryError("RectDomain: lower must be < upper on every axis");
  }
  if (!(extension_ > 0.0) || !std::isfinite(extension_)) {
    throw GeometryError("RectDomain: extension H must be positive");
  }
}

RectDomain RectDomain::unit_square(double extension) { return RectDomain({0.0, 0.0}, {1.0, 1.0}, extension); }

Box RectDomain::extended() const {
  Box b{lower_, upper_};
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    b.lower[k] -= extension_;
    b.upper[k] += extension_;
  }
  return b;
}

Box extend_domain(const RectDomain& domain) { return domain.extended(); }

PointSet::PointSet(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim < 1) throw GeometryError("PointSet: dimension must be >= 1");
  if (coords_.size() % static_cast<std::size_t>(dim) != 0) {
    throw GeometryError("PointSet: coordinate count is not a multiple of the dimension");
  }
}

void PointSet::push_back(std::span<const double> p) {
  if (static_cast<int>(p.size()) != dim_) throw GeometryError("PointSet: dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

void require_distinct(const PointSet& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(points[a].begin(), points[a].end(), points[b].begin(), points[b].end());
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (std::equal(points[order[k - 1]].begin(), points[order[k - 1]].end(), points[order[k]].begin())) {
      throw GeometryError("coincident particles " + std::to_string(order[k - 1]) + " and " +
                          std::to_string(order[k]));
    }
  }
}

ParticleSystem::ParticleSystem(RectDomain domain, PointSet points, std::vector<double> volumes, double h)
    : domain_(std::move(domain)), points_(std::move(points)), volumes_(std::move(volumes)), h_(h) {
  if (points_.dim() != domain_.dim()) throw GeometryError("ParticleSystem: point and domain dimension differ");
  if (points_.empty()) throw GeometryError("ParticleSystem: no particles");
  if (volumes_.size() != points_.size()) throw GeometryError("ParticleSystem: one volume per particle required");
  if (!(h_ > 0.0 && h_ < domain_.extension())) throw GeometryError("ParticleSystem: need 0 < h < H");

  const Box box = domain_.extended();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!box.contains_closed(points_[i])) {
      throw GeometryError("ParticleSystem: particle " + std::to_string(i) + " lies outside the extended domain");
    }
  }
  require_distinct(points_);

  for (double v : volumes_) {
    if (!(v > 0.0)) throw GeometryError("ParticleSystem: volumes must be positive");
  }
  const double sum = compensated_sum(volumes_);
  const double target = box.volume();
  if (std::abs(sum - target) > 1e-12 * target) {
    throw GeometryError("ParticleSystem: volumes must sum to |Omega_H|");
  }
  grid_ = std::make_shared<const NeighborGrid>(points_.dim(), points_.coords(), h_);
}

std::vector<std::size_t> neighbors(const ParticleSystem& ps, std::span<const double> x, double r,
                                   bool exclude_center) {
  if (!(r > 0.0)) throw GeometryError("neighbors: radius must be positive");
  std::vector<std::size_t> out;
  ps.grid().query(x, r, exclude_center, out);
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double counter_uniform(std::uint64_t seed, std::int64_t a, std::int64_t b, std::int64_t c) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ static_cast<std::uint64_t>(a));
  key = splitmix64(key ^ static_cast<std::uint64_t>(b));
  key = splitmix64(key ^ static_cast<std::uint64_t>(c));
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(key >> 11) + 0.5) * 0x1.0p-53;
}

PointSet perturbed_lattice(double dx, double noise_bound, std::uint64_t seed, const RectDomain& domain) {
  if (!(dx > 0.0)) throw GeometryError("perturbed_lattice: dx must be positive");
  if (!(noise_bound >= 0.0 && noise_bound < 0.5)) {
    throw GeometryError("perturbed_lattice: noise bound must lie in [0, 1/2)");
  }
  const int dim = domain.dim();
  if (dim > 2) throw GeometryError("perturbed_lattice: only d = 1 or 2 is supported");
  const Box box = domain.extended();

  std::int64_t first[2] = {0, 0};
  std::int64_t last[2] = {-1, -1};
  for (int k = 0; k < dim; ++k) {
    first[k] = static_cast<std::int64_t>(std::floor(box.lower[k] / dx)) + 1;
    last[k] = static_cast<std::int64_t>(std::ceil(box.upper[k] / dx)) - 1;
    while (static_cast<double>(first[k]) * dx <= box.lower[k]) ++first[k];
    while (static_cast<double>(last[k]) * dx >= box.upper[k]) --last[k];
  }
  if (dim == 1) first[1] = last[1] = 0;

  PointSet out(dim, {});
  double p[2] = {0.0, 0.0};
  for (std::int64_t j = first[1]; j <= last[1]; ++j) {
    for (std::int64_t i = first[0]; i <= last[0]; ++i) {
      const std::int64_t idx[2] = {i, j};
      for (int k = 0; k < dim; ++k) {
        const double node = static_cast<double>(idx[k]) * dx;
        const double eta = noise_bound * (2.0 * counter_uniform(seed, i, j, k) - 1.0);
        double x = node + eta * dx;
        if (!(x > box.lower[k] && x < box.upper[k])) x = node - eta * dx;
        p[k] = x;
      }
      out.push_back(std::span<const double>(p, static_cast<std::size_t>(dim)));
    }
  }
  return out;
}

std::vector<double> uniform_volumes(std::size_t n, const RectDomain& domain) {
  if (n == 0) throw GeometryError("uniform_volumes: need at least one particle");
  return std::vector<double>(n, domain.extended_volume() / static_cast<double>(n));
}

}  // namespace gpm
