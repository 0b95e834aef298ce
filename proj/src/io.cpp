#include "hatlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hatlab {

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_num(long long v) { return std::to_string(v); }

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), width_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path);
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::invalid_argument("csv row width mismatch");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_quote(cells[i]);
  }
  out_ << '\n';
}

CsvWriter::~CsvWriter() = default;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << content;
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series, bool logx, bool logy,
                    const std::string& metadata) {
  if (series.empty()) throw std::invalid_argument("write_svg_plot: no series");
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;

  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  size_t total = 0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if ((logx && x <= 0) || (logy && y <= 0)) continue;
      xmin = std::min(xmin, tx(x));
      xmax = std::max(xmax, tx(x));
      ymin = std::min(ymin, ty(y));
      ymax = std::max(ymax, ty(y));
      ++total;
    }
  if (total == 0) throw std::invalid_argument("write_svg_plot: no plottable points");
  if (xmax - xmin < 1e-12) { xmax += 0.5; xmin -= 0.5; }
  if (ymax - ymin < 1e-12) { ymax += 0.5; ymin -= 0.5; }

  auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (ty(v) - ymin) / (ymax - ymin) * (H - mt - mb); };

  static const char* kColors[] = {"#1f6fb2", "#c23b22", "#3a9e4e", "#8d5fb2",
                                  "#b28f1f", "#1fb2a6"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<!-- " << metadata << " -->\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
      << (logx ? " (log10)" : "") << "</text>\n";
  svg << "<text x=\"16\" y=\"" << H / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << H / 2 << ")\">" << ylabel << (logy ? " (log10)" : "") << "</text>\n";
  // Corner tick labels (transformed extremes).
  svg << "<text x=\"" << ml << "\" y=\"" << H - mb + 16
      << "\" font-size=\"10\" text-anchor=\"middle\">" << format_num(xmin)
      << "</text>\n";
  svg << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16
      << "\" font-size=\"10\" text-anchor=\"middle\">" << format_num(xmax)
      << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb
      << "\" font-size=\"10\" text-anchor=\"end\">" << format_num(ymin) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" font-size=\"10\" text-anchor=\"end\">" << format_num(ymax) << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kColors[si % 6];
    std::ostringstream pts;
    for (const auto& [x, y] : series[si].points) {
      if ((logx && x <= 0) || (logy && y <= 0)) continue;
      pts << format_num(px(x)) << ',' << format_num(py(y)) << ' ';
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
        << pts.str() << "\"/>\n";
    svg << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 16 + 14 * double(si)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"" << color << "\">"
        << series[si].label << "</text>\n";
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

}  // namespace hatlab
