#include "bundleflow/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bundleflow {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& vals) {
  std::vector<std::string> cells;
  cells.reserve(vals.size());
  for (double v : vals) cells.push_back(format_g17(v));
  rows.push_back(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
  rows.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 < header.size() ? "," : "");
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "");
    os << "\n";
  }
  return os.str();
}

void CsvTable::write(const std::string& path) const {
  write_text_file(path, to_string());
}

void write_field_snapshot(const std::string& csv_path,
                          const std::string& sidecar_path,
                          const VectorFieldSpec& v, double time_stamp) {
  CsvTable table;
  nlohmann::json side;
  side["time"] = time_stamp;
  auto pts = collocation_points(v.res);
  if (v.res.kind == ManifoldKind::FlatTorus2) {
    table.header = {"x", "y", "vx", "vy"};
    for (const auto& p : pts) {
      auto t = v.eval(p);
      table.add_row({p.a[0], p.a[1], t.c[0], t.c[1]});
    }
    side["manifold"] = "torus2";
    side["max_mode"] = v.res.tor.K;
    side["grid"] = v.res.tor.N;
  } else {
    table.header = {"lon", "lat", "x", "y", "z", "vx", "vy", "vz"};
    for (const auto& p : pts) {
      auto t = v.eval(p);
      double lon = std::atan2(p.a[1], p.a[0]);
      double lat = std::asin(std::clamp(p.a[2], -1.0, 1.0));
      table.add_row({lon, lat, p.a[0], p.a[1], p.a[2], t.c[0], t.c[1], t.c[2]});
    }
    side["manifold"] = "sphere2";
    side["max_degree"] = v.res.sph.L;
    side["n_lat"] = v.res.sph.n_lat;
    side["n_lon"] = v.res.sph.n_lon;
  }
  table.write(csv_path);
  write_text_file(sidecar_path, side.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bundleflow
