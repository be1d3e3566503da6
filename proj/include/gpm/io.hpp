#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpm/geometry.hpp"
#include "gpm/indicators.hpp"
#include "gpm/voronoi.hpp"

namespace gpm {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PointTable {
  PointSet points;
  std::vector<double> volumes;
};

/// Columns id,x,y,volume; ids must run 0..N-1 in order.
void write_points_csv(const std::string& path, const PointSet& points, const std::vector<double>& volumes);
PointTable read_points_csv(const std::string& path);

/// Columns id,vertex_index,vx,vy, one row per cell vertex.
void write_diagram_csv(const std::string& path, const VoronoiDiagram& diagram);

struct IndicatorRow {
  int level = 0;
  double dx = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  double r_n = 0.0;
  DeviationKind d_n_kind = DeviationKind::upper_bound;
  double d_n = 0.0;
  std::optional<double> c0;  // NA when r_N + d_N == 0
};

/// Columns level,dx,h,N,r_N,d_N_kind,d_N_value,c0_m{m}.
void write_indicators_csv(const std::string& path, double m, const std::vector<IndicatorRow>& rows);

}  // namespace gpm
