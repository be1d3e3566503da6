#include "gpm/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace gpm {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IoError(where + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw IoError(where + ": not a number: '" + s + "'");
  return v;
}

}  // namespace

void write_points_csv(const std::string& path, const PointSet& points, const std::vector<double>& volumes) {
  if (points.dim() != 2) throw IoError("points CSV holds 2D points only");
  if (volumes.size() != points.size()) throw IoError("one volume per point required");
  auto out = open_out(path);
  out << "id,x,y,volume\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << i << ',' << points[i][0] << ',' << points[i][1] << ',' << volumes[i] << '\n';
  }
  finish(out, path);
}

PointTable read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,x,y,volume") throw IoError(path + ": expected header id,x,y,volume");

  PointTable table{PointSet(2, {}), {}};
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(row + 2);
    const auto cells = split(line);
    if (cells.size() != 4) throw IoError(where + ": expected 4 columns");
    const double id = to_double(cells[0], where);
    if (id != static_cast<double>(row)) throw IoError(where + ": ids must run 0..N-1 in order");
    const double p[2] = {to_double(cells[1], where), to_double(cells[2], where)};
    table.points.push_back(p);
    table.volumes.push_back(to_double(cells[3], where));
    ++row;
  }
  return table;
}

void write_diagram_csv(const std::string& path, const VoronoiDiagram& diagram) {
  auto out = open_out(path);
  out << "id,vertex_index,vx,vy\n";
  for (std::size_t i = 0; i < diagram.cells.size(); ++i) {
    const auto& cell = diagram.cells[i];
    for (std::size_t v = 0; v < cell.size(); ++v) {
      out << i << ',' << v << ',' << cell[v].x << ',' << cell[v].y << '\n';
    }
  }
  finish(out, path);
}

void write_indicators_csv(const std::string& path, double m, const std::vector<IndicatorRow>& rows) {
  auto out = open_out(path);
  std::ostringstream mname;
  mname << m;
  out << "level,dx,h,N,r_N,d_N_kind,d_N_value,c0_m" << mname.str() << '\n';
  for (const IndicatorRow& r : rows) {
    out << r.level << ',' << r.dx << ',' << r.h << ',' << r.n << ',' << r.r_n << ',' << to_string(r.d_n_kind) << ','
        << r.d_n << ',';
    if (r.c0) {
      out << *r.c0;
    } else {
      out << "NA";
    }
    out << '\n';
  }
  finish(out, path);
}

}  // namespace gpm
