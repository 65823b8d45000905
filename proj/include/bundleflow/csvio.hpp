#pragma once

// CSV / JSON artifact emission. All numbers are printed with 17 significant
// digits so reproducibility can be checked byte-for-byte on text artifacts.

#include <string>
#include <vector>

#include "bundleflow/fields.hpp"

namespace bundleflow {

std::string format_g17(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& vals);
  void add_row(std::vector<std::string> cells);
  std::string to_string() const;
  void write(const std::string& path) const;
};

// Field snapshot: one line per collocation node with coordinates and field
// components; JSON sidecar with manifold, resolution and time stamp.
void write_field_snapshot(const std::string& csv_path,
                          const std::string& sidecar_path,
                          const VectorFieldSpec& v, double time_stamp);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace bundleflow
