// Minimal static SVG line charts for the sweep CSVs. Plots are convenience
// renderings only; the CSV is the contract.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

inline std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline void write_svg(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double W = 760, H = 480;
  const double L = 70, R = 20, T = 40, B = 55;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ofstream f(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">" << title << "</text>\n";

  // Frame and ticks.
  f << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = xmin + i * (xmax - xmin) / 4;
    double yv = ymin + i * (ymax - ymin) / 4;
    f << "<line x1=\"" << px(xv) << "\" y1=\"" << H - B << "\" x2=\"" << px(xv) << "\" y2=\""
      << H - B + 5 << "\" stroke=\"#444\"/>\n";
    f << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << format_tick(xv) << "</text>\n";
    f << "<line x1=\"" << L - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << L << "\" y2=\""
      << py(yv) << "\" stroke=\"#444\"/>\n";
    f << "<text x=\"" << L - 8 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << format_tick(yv) << "</text>\n";
  }
  f << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
    << "</text>\n";
  f << "<text x=\"16\" y=\"" << (T + H - B) / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";

  int idx = 0;
  for (const auto& s : series) {
    const char* color = kColors[idx % 8];
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    f << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    f << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 15 * idx
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
      << "\">" << s.label << "</text>\n";
    ++idx;
  }
  f << "</svg>\n";
}

// Groups table rows into series by a key column and plots y against x.
inline void plot_table(const std::string& path, const std::string& title,
                       const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows,
                       const std::string& x_col, const std::string& y_col,
                       const std::string& series_col) {
  auto col_index = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  int xi = col_index(x_col), yi = col_index(y_col), si = col_index(series_col);
  if (xi < 0 || yi < 0) return;
  std::map<std::string, Series> by_key;
  std::vector<std::string> order;
  for (const auto& row : rows) {
    std::string key = si >= 0 ? series_col + " " + row[si] : y_col;
    if (!by_key.count(key)) {
      by_key[key].label = key;
      order.push_back(key);
    }
    by_key[key].x.push_back(std::stod(row[xi]));
    by_key[key].y.push_back(std::stod(row[yi]));
  }
  std::vector<Series> series;
  for (const auto& key : order) series.push_back(by_key[key]);
  write_svg(path, title, x_col, y_col, series);
}

}  // namespace plot
