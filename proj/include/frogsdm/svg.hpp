#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/csv.hpp"

namespace frogsdm {

struct BarDatum {
  std::string label;
  double value = 0.0;
};

// Minimal standalone bar chart used by the eval command to compare models.
inline std::string render_bar_chart(const std::string& title, const std::vector<BarDatum>& data) {
  if (data.empty()) throw std::invalid_argument("bar chart: no data");
  const int width = 640, height = 400;
  const int margin_left = 60, margin_right = 20, margin_top = 50, margin_bottom = 60;
  const int plot_w = width - margin_left - margin_right;
  const int plot_h = height - margin_top - margin_bottom;

  double max_v = 0.0;
  for (const auto& d : data) max_v = std::max(max_v, d.value);
  if (max_v <= 0.0) max_v = 1.0;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  s << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\""
    << " font-size=\"16\">" << title << "</text>\n";
  s << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h << "\" x2=\""
    << margin_left + plot_w << "\" y2=\"" << margin_top + plot_h
    << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\"" << margin_left
    << "\" y2=\"" << margin_top + plot_h << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const double slot = static_cast<double>(plot_w) / static_cast<double>(data.size());
  const double bar_w = slot * 0.6;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double h = plot_h * (data[i].value / max_v);
    const double x = margin_left + slot * static_cast<double>(i) + (slot - bar_w) / 2.0;
    const double y = margin_top + plot_h - h;
    s << "<rect x=\"" << fmt_double(x) << "\" y=\"" << fmt_double(y) << "\" width=\""
      << fmt_double(bar_w) << "\" height=\"" << fmt_double(h) << "\" fill=\"#4878a8\"/>\n";
    s << "<text x=\"" << fmt_double(x + bar_w / 2.0) << "\" y=\"" << fmt_double(y - 6.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << fmt_double(data[i].value) << "</text>\n";
    s << "<text x=\"" << fmt_double(x + bar_w / 2.0) << "\" y=\"" << margin_top + plot_h + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << data[i].label
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void write_bar_chart(const std::string& title, const std::vector<BarDatum>& data,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("bar chart: cannot open " + path.string());
  out << render_bar_chart(title, data);
}

}  // namespace frogsdm
