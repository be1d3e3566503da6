#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gpm/io.hpp"

using namespace gpm;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("gpm_test_io_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST(Io, PointsRoundTripIsExact) {
  const RectDomain d = RectDomain::unit_square();
  const PointSet pts = perturbed_lattice(1.0 / 16.0, 0.25, 5, d);
  const auto vols = uniform_volumes(pts.size(), d);
  const std::string path = temp_path("pts.csv");
  write_points_csv(path, pts, vols);
  const PointTable t = read_points_csv(path);
  ASSERT_EQ(t.points.size(), pts.size());
  ASSERT_EQ(t.volumes.size(), vols.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(t.points[i][0], pts[i][0]);
    EXPECT_EQ(t.points[i][1], pts[i][1]);
    EXPECT_EQ(t.volumes[i], vols[i]);
  }
  EXPECT_EQ(lines_of(path).front(), "id,x,y,volume");
  std::filesystem::remove(path);
}

TEST(Io, PointsReaderAcceptsCrlfAndBlankLines) {
  const std::string path = temp_path("crlf.csv");
  write_text(path, "id,x,y,volume\r\n0,0.5,0.25,0.1\r\n\r\n1,-1e-3,2,0.2\r\n");
  const PointTable t = read_points_csv(path);
  ASSERT_EQ(t.points.size(), 2u);
  EXPECT_EQ(t.points[1][0], -1e-3);
  EXPECT_EQ(t.volumes[1], 0.2);
  std::filesystem::remove(path);
}

TEST(Io, PointsReaderRejectsMalformedInput) {
  const std::string path = temp_path("bad.csv");
  for (const std::string& text : {std::string(""), std::string("x,y\n0,1\n"),
                                  std::string("id,x,y,volume\n0,1,2\n"),
                                  std::string("id,x,y,volume\n0,1,2,abc\n"),
                                  std::string("id,x,y,volume\n1,1,2,3\n"),
                                  std::string("id,x,y,volume\n0,1,2,3\n0,1,2,3\n"),
                                  std::string("id,x,y,volume\n0,1,2,3,\n")}) {
    write_text(path, text);
    EXPECT_THROW(read_points_csv(path), IoError) << text;
  }
  std::filesystem::remove(path);
  EXPECT_THROW(read_points_csv(temp_path("missing.csv")), IoError);
}

TEST(Io, PointsWriterValidates) {
  const PointSet pts(2, {0.0, 0.0, 1.0, 1.0});
  EXPECT_THROW(write_points_csv(temp_path("v.csv"), pts, {1.0}), IoError);
  EXPECT_THROW(write_points_csv(temp_path("v.csv"), PointSet(3, {0.0, 0.0, 0.0}), {1.0}), IoError);
  EXPECT_THROW(write_points_csv("/nonexistent/dir/p.csv", pts, {1.0, 1.0}), IoError);
}

TEST(Io, DiagramCsvListsEveryVertex) {
  const PointSet pts(2, {0.25, 0.5, 0.75, 0.5});
  const Box box{{0.0, 0.0}, {1.0, 1.0}};
  const VoronoiDiagram vd = voronoi_decompose(pts, box);
  const std::string path = temp_path("diagram.csv");
  write_diagram_csv(path, vd);
  const auto lines = lines_of(path);
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[0], "id,vertex_index,vx,vy");
  std::size_t row = 1;
  for (std::size_t i = 0; i < vd.cells.size(); ++i) {
    ASSERT_EQ(vd.cells[i].size(), 4u);
    for (std::size_t v = 0; v < vd.cells[i].size(); ++v) {
      std::istringstream ls(lines[row++]);
      std::string cell;
      std::vector<double> vals;
      while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
      ASSERT_EQ(vals.size(), 4u);
      EXPECT_EQ(vals[0], static_cast<double>(i));
      EXPECT_EQ(vals[1], static_cast<double>(v));
      EXPECT_EQ(vals[2], vd.cells[i][v].x);
      EXPECT_EQ(vals[3], vd.cells[i][v].y);
      EXPECT_TRUE(vals[2] == 0.0 || vals[2] == 0.5 || vals[2] == 1.0);
    }
  }
  std::filesystem::remove(path);
}

TEST(Io, IndicatorsCsv) {
  std::vector<IndicatorRow> rows(2);
  rows[0] = {0, 0.03125, 0.08125, 1521, 0.0276, DeviationKind::upper_bound, 0.5, 12.5};
  rows[1] = {1, 0.015625, 0.0625, 5929, 0.0138, DeviationKind::exact, 0.0, std::nullopt};
  const std::string path = temp_path("ind.csv");
  write_indicators_csv(path, 3.0, rows);
  const auto lines = lines_of(path);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "level,dx,h,N,r_N,d_N_kind,d_N_value,c0_m3");
  const std::vector<std::vector<std::string>> expected{
      {"0", "0.03125", "0.08125", "1521", "0.0276", "upper_bound", "0.5", "12.5"},
      {"1", "0.015625", "0.0625", "5929", "0.0138", "exact", "0", "NA"}};
  for (std::size_t r = 0; r < 2; ++r) {
    std::istringstream ls(lines[r + 1]);
    std::string cell;
    std::size_t c = 0;
    for (; std::getline(ls, cell, ','); ++c) {
      ASSERT_LT(c, 8u);
      const std::string& want = expected[r][c];
      if (c == 5 || want == "NA") {
        EXPECT_EQ(cell, want);
      } else {
        EXPECT_EQ(std::stod(cell), std::stod(want)) << "row " << r << " column " << c;
      }
    }
    EXPECT_EQ(c, 8u);
  }
  write_indicators_csv(path, 2.5, {});
  EXPECT_EQ(lines_of(path).front(), "level,dx,h,N,r_N,d_N_kind,d_N_value,c0_m2.5");
  std::filesystem::remove(path);
  EXPECT_THROW(write_indicators_csv("/nonexistent/dir/i.csv", 3.0, rows), IoError);
}
