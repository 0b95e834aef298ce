#pragma once
// Deterministic output: RFC-style CSV, JSON metadata, static SVG plots.

#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace hatlab {

std::string csv_quote(const std::string& cell);
std::string format_num(double v);     // shortest stable "%.12g"
std::string format_num(long long v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  ~CsvWriter();

 private:
  std::ofstream out_;
  size_t width_;
};

void write_text_file(const std::string& path, const std::string& content);

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Fixed-size line plot; byte-identical output for identical input. The
// metadata comment carries the caller's provenance string (config, seed).
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series, bool logx, bool logy,
                    const std::string& metadata);

}  // namespace hatlab
