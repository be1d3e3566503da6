#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpm/geometry.hpp"

namespace gpm {

struct Vec2 {
  double x;
  double y;
};

/// Bounded Voronoi decomposition of a box (d = 1 or 2).
///
/// In 2D every cell is a convex polygon with counter-clockwise vertices. In
/// 1D a cell is an interval stored as two vertices {lo, 0} and {hi, 0}.
/// adjacency[i] lists the sites whose bisector contributes an edge (2D) or
/// an endpoint (1D) of cell i.
struct VoronoiDiagram {
  int dim = 2;
  std::vector<std::vector<Vec2>> cells;
  std::vector<double> volumes;
  std::vector<std::vector<std::size_t>> adjacency;

  std::size_t size() const { return cells.size(); }
  double total_volume() const;
};

/// Clips each site's region by perpendicular bisectors against neighbors
/// found within a search radius that doubles until the cell's farthest
/// vertex is covered. Throws GeometryError on coincident points.
VoronoiDiagram voronoi_decompose(const PointSet& points, const Box& box);
VoronoiDiagram voronoi_decompose(const ParticleSystem& ps);

/// max_i max_{v vertex of cell i} |x_i - v|.
double covering_radius(const VoronoiDiagram& diagram, const PointSet& points);

/// Shoelace area of a simple polygon (positive for counter-clockwise order).
double polygon_area(std::span<const Vec2> polygon);

/// Keeps the part of a convex polygon where a*x + b*y <= c.
std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, double a, double b, double c);

/// Intersection of two convex counter-clockwise polygons.
std::vector<Vec2> intersect_convex(std::span<const Vec2> p, std::span<const Vec2> q);

}  // namespace gpm
