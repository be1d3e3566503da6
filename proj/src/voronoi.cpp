#include "gpm/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpm {

namespace {

struct LabeledPolygon {
  std::vector<Vec2> v;
  // label[k] tags the edge v[k] -> v[k+1]: -1 for the box, otherwise the site index.
  std::vector<std::ptrdiff_t> label;
};

// Clip by { p : (p - mid) . n <= 0 }, tagging the new edge with `site`.
void clip(LabeledPolygon& poly, Vec2 mid, Vec2 n, std::ptrdiff_t site, double merge_tol, LabeledPolygon& out) {
  out.v.clear();
  out.label.clear();
  const std::size_t m = poly.v.size();
  if (m == 0) return;
  auto side = [&](Vec2 p) { return (p.x - mid.x) * n.x + (p.y - mid.y) * n.y; };
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 cur = poly.v[k];
    const Vec2 next = poly.v[(k + 1) % m];
    const double sc = side(cur);
    const double sn = side(next);
    const bool cur_in = sc <= 0.0;
    const bool next_in = sn <= 0.0;
    if (cur_in) {
      out.v.push_back(cur);
      out.label.push_back(poly.label[k]);
      if (!next_in) {
        const double t = sc / (sc - sn);
        out.v.push_back({cur.x + t * (next.x - cur.x), cur.y + t * (next.y - cur.y)});
        out.label.push_back(site);
      }
    } else if (next_in) {
      const double t = sc / (sc - sn);
      out.v.push_back({cur.x + t * (next.x - cur.x), cur.y + t * (next.y - cur.y)});
      out.label.push_back(poly.label[k]);
    }
  }
  // Drop zero-length edges; the surviving vertex keeps the outgoing label.
  LabeledPolygon tidy;
  const std::size_t q = out.v.size();
  for (std::size_t k = 0; k < q; ++k) {
    const Vec2 a = out.v[k];
    const Vec2 b = out.v[(k + 1) % q];
    if (q > 1 && std::abs(a.x - b.x) <= merge_tol && std::abs(a.y - b.y) <= merge_tol) continue;
    tidy.v.push_back(a);
    tidy.label.push_back(out.label[k]);
  }
  out = std::move(tidy);
}

double max_distance(const LabeledPolygon& poly, Vec2 site) {
  double r2 = 0.0;
  for (const Vec2& p : poly.v) {
    const double dx = p.x - site.x;
    const double dy = p.y - site.y;
    r2 = std::max(r2, dx * dx + dy * dy);
  }
  return std::sqrt(r2);
}

VoronoiDiagram decompose_1d(const PointSet& points, const Box& box) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a][0] < points[b][0]; });

  VoronoiDiagram diagram;
  diagram.dim = 1;
  diagram.cells.resize(n);
  diagram.volumes.resize(n);
  diagram.adjacency.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    const double x = points[i][0];
    const double lo = k == 0 ? box.lower[0] : 0.5 * (points[order[k - 1]][0] + x);
    const double hi = k + 1 == n ? box.upper[0] : 0.5 * (x + points[order[k + 1]][0]);
    diagram.cells[i] = {{lo, 0.0}, {hi, 0.0}};
    diagram.volumes[i] = hi - lo;
    if (k > 0) diagram.adjacency[i].push_back(order[k - 1]);
    if (k + 1 < n) diagram.adjacency[i].push_back(order[k + 1]);
    std::sort(diagram.adjacency[i].begin(), diagram.adjacency[i].end());
  }
  return diagram;
}

VoronoiDiagram decompose_2d(const PointSet& points, const Box& box) {
  const std::size_t n = points.size();
  const double box_area = box.volume();
  const double spacing = std::sqrt(box_area / static_cast<double>(n));
  const double diagonal = std::hypot(box.extent(0), box.extent(1));
  const double scale = std::max({std::abs(box.lower[0]), std::abs(box.lower[1]), std::abs(box.upper[0]),
                                 std::abs(box.upper[1]), diagonal});
  const double merge_tol = 1e-14 * scale;
  const NeighborGrid grid(2, points.coords(), spacing);

  VoronoiDiagram diagram;
  diagram.dim = 2;
  diagram.cells.resize(n);
  diagram.volumes.resize(n);
  diagram.adjacency.resize(n);

#pragma omp parallel
  {
    LabeledPolygon poly;
    LabeledPolygon scratch;
    std::vector<std::pair<double, std::size_t>> candidates;

#pragma omp for schedule(dynamic, 256)
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 site{points[i][0], points[i][1]};
      poly.v = {{box.lower[0], box.lower[1]},
                {box.upper[0], box.lower[1]},
                {box.upper[0], box.upper[1]},
                {box.lower[0], box.upper[1]}};
      poly.label.assign(4, -1);

      double searched = 0.0;
      double radius = 3.0 * spacing;
      for (;;) {
        grid.query_with_distance(points[i], radius, true, candidates);
        std::sort(candidates.begin(), candidates.end());
        const double searched2 = searched * searched;
        for (const auto& [d2, j] : candidates) {
          if (d2 < searched2) continue;
          const Vec2 other{points[j][0], points[j][1]};
          const Vec2 mid{0.5 * (site.x + other.x), 0.5 * (site.y + other.y)};
          clip(poly, mid, {other.x - site.x, other.y - site.y}, static_cast<std::ptrdiff_t>(j), merge_tol,
               scratch);
          std::swap(poly, scratch);
        }
        searched = radius;
        // A site farther than twice the cell's reach cannot cut the cell.
        const double reach = max_distance(poly, site);
        if (2.0 * reach < searched || searched > 2.0 * diagonal) break;
        radius = std::max(2.0 * radius, 2.0 * reach * (1.0 + 1e-12));
      }

      diagram.cells[i] = poly.v;
      diagram.volumes[i] = polygon_area(poly.v);
      std::vector<std::size_t>& adj = diagram.adjacency[i];
      for (std::ptrdiff_t lab : poly.label) {
        if (lab >= 0) adj.push_back(static_cast<std::size_t>(lab));
      }
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
  }
  return diagram;
}

}  // namespace

double VoronoiDiagram::total_volume() const { return std::accumulate(volumes.begin(), volumes.end(), 0.0); }

VoronoiDiagram voronoi_decompose(const PointSet& points, const Box& box) {
  if (points.empty()) throw GeometryError("voronoi_decompose: need at least one point");
  if (points.dim() != box.dim()) throw GeometryError("voronoi_decompose: dimension mismatch");
  require_distinct(points);
  if (points.dim() == 1) return decompose_1d(points, box);
  if (points.dim() == 2) return decompose_2d(points, box);
  throw GeometryError("voronoi_decompose: only d = 1 or 2 is supported");
}

VoronoiDiagram voronoi_decompose(const ParticleSystem& ps) {
  return voronoi_decompose(ps.points(), ps.domain().extended());
}

double covering_radius(const VoronoiDiagram& diagram, const PointSet& points) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < diagram.size(); ++i) {
    const double px = points[i][0];
    const double py = diagram.dim == 2 ? points[i][1] : 0.0;
    for (const Vec2& v : diagram.cells[i]) {
      const double dx = v.x - px;
      const double dy = v.y - py;
      r2 = std::max(r2, dx * dx + dy * dy);
    }
  }
  return std::sqrt(r2);
}

double polygon_area(std::span<const Vec2> polygon) {
  const std::size_t m = polygon.size();
  if (m < 3) return 0.0;
  // Shift to the first vertex to limit cancellation.
  const Vec2 o = polygon[0];
  double twice = 0.0;
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double ax = polygon[k].x - o.x;
    const double ay = polygon[k].y - o.y;
    const double bx = polygon[k + 1].x - o.x;
    const double by = polygon[k + 1].y - o.y;
    twice += ax * by - ay * bx;
  }
  return 0.5 * twice;
}

std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, double a, double b, double c) {
  std::vector<Vec2> out;
  const std::size_t m = polygon.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 cur = polygon[k];
    const Vec2 next = polygon[(k + 1) % m];
    const double sc = a * cur.x + b * cur.y - c;
    const double sn = a * next.x + b * next.y - c;
    if (sc <= 0.0) out.push_back(cur);
    if ((sc <= 0.0) != (sn <= 0.0)) {
      const double t = sc / (sc - sn);
      out.push_back({cur.x + t * (next.x - cur.x), cur.y + t * (next.y - cur.y)});
    }
  }
  return out;
}

std::vector<Vec2> intersect_convex(std::span<const Vec2> p, std::span<const Vec2> q) {
  std::vector<Vec2> result(p.begin(), p.end());
  const std::size_t m = q.size();
  for (std::size_t k = 0; k < m && !result.empty(); ++k) {
    const Vec2 a = q[k];
    const Vec2 b = q[(k + 1) % m];
    // Interior of a CCW polygon lies left of each edge: cross(b - a, p - a) >= 0.
    const double nx = b.y - a.y;
    const double ny = -(b.x - a.x);
    result = clip_half_plane(result, nx, ny, nx * a.x + ny * a.y);
  }
  return result;
}

}  // namespace gpm
