#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace graphssl {

// One experiment result row. The CSV schema is exactly this field order.
struct RunRecord {
  std::string dataset;
  std::string loss;
  std::string aug_a;
  std::string aug_b;
  double ratio = 0.0;
  int batch_size = 0;
  int projector_dim = 0;
  double lambda = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double p = 0.0;
  std::uint64_t seed = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double final_loss = 0.0;
  double runtime_s = 0.0;

  // Sort key over config fields (everything before the measured values).
  std::string config_key() const;
};

std::string run_record_header();
std::string run_record_line(const RunRecord& r);
RunRecord parse_run_record(const std::string& line);

// Appends rows, writing the header first when the file is new/empty.
void append_run_records(const std::vector<RunRecord>& rows, const std::filesystem::path& file);
std::vector<RunRecord> read_run_records(const std::filesystem::path& file);

struct Series {
  std::string name;
  std::vector<double> x;  // strictly increasing
  std::vector<double> y;
};

// Self-contained SVG line chart: one polyline per series, legend, linear axes
// with tick labels.
void emit_svg_linechart(const std::vector<Series>& series, const std::string& x_label,
                        const std::string& y_label, const std::filesystem::path& out);

}  // namespace graphssl
