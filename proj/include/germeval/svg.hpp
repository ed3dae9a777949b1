#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "germeval/errors.hpp"

namespace germeval::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // half-width of the shaded band; empty = no band
};

struct ChartOptions {
  std::string title = "macro-F1 vs ensemble size";
  std::string x_label = "ensemble size";
  std::string y_label = "mean macro-F1";
  int width = 760;
  int height = 480;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf"};

}  // namespace detail

/// Self-contained SVG line chart: one line per series, a +/-1 std band for
/// every series that carries band values, and the full data table embedded as
/// metadata so the plot stays diffable and replottable without the inputs.
inline std::string line_chart(const std::vector<Series>& series, const ChartOptions& opt = {}) {
  if (series.empty()) throw ConfigError("line_chart: no series");
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size() || (!s.band.empty() && s.band.size() != s.y.size())) {
      throw ConfigError("line_chart: series '" + s.label + "' has mismatched lengths");
    }
    if (s.x.empty()) throw ConfigError("line_chart: series '" + s.label + "' is empty");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double lo = s.y[i] - (s.band.empty() ? 0.0 : s.band[i]);
      const double hi = s.y[i] + (s.band.empty() ? 0.0 : s.band[i]);
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, lo);
      y_max = std::max(y_max, hi);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double ml = 64, mr = 16, mt = 36, mb = 48;
  const double pw = opt.width - ml - mr;
  const double ph = opt.height - mt - mb;
  const auto sx = [&](double x) { return ml + pw * (x - x_min) / (x_max - x_min); };
  const auto sy = [&](double y) { return mt + ph * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) +
         "\" height=\"" + std::to_string(opt.height) + "\" viewBox=\"0 0 " +
         std::to_string(opt.width) + " " + std::to_string(opt.height) + "\">\n";

  out += "<metadata>\n";
  for (const Series& s : series) {
    out += "series\t" + detail::escape(s.label) + "\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out += detail::num(s.x[i]) + "\t" + std::to_string(s.y[i]);
      if (!s.band.empty()) out += "\t" + std::to_string(s.band[i]);
      out += "\n";
    }
  }
  out += "</metadata>\n";

  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + detail::num(opt.width / 2.0) + "\" y=\"20\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"14\">" + detail::escape(opt.title) + "</text>\n";

  // Axes with 6 ticks each.
  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    out += "<line x1=\"" + detail::num(sx(xv)) + "\" y1=\"" + detail::num(mt + ph) + "\" x2=\"" +
           detail::num(sx(xv)) + "\" y2=\"" + detail::num(mt + ph + 4) + "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + detail::num(sx(xv)) + "\" y=\"" + detail::num(mt + ph + 16) +
           "\" text-anchor=\"middle\">" + detail::num(xv) + "</text>\n";
    out += "<line x1=\"" + detail::num(ml - 4) + "\" y1=\"" + detail::num(sy(yv)) + "\" x2=\"" +
           detail::num(ml) + "\" y2=\"" + detail::num(sy(yv)) + "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + detail::num(ml - 8) + "\" y=\"" + detail::num(sy(yv) + 4) +
           "\" text-anchor=\"end\">" + detail::num(yv) + "</text>\n";
  }
  out += "</g>\n";
  out += "<rect x=\"" + detail::num(ml) + "\" y=\"" + detail::num(mt) + "\" width=\"" +
         detail::num(pw) + "\" height=\"" + detail::num(ph) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  out += "<text x=\"" + detail::num(ml + pw / 2.0) + "\" y=\"" + detail::num(mt + ph + 34) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         detail::escape(opt.x_label) + "</text>\n";
  out += "<text x=\"14\" y=\"" + detail::num(mt + ph / 2.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 " +
         detail::num(mt + ph / 2.0) + ")\">" + detail::escape(opt.y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = detail::kPalette[si % (sizeof(detail::kPalette) / sizeof(char*))];
    if (!s.band.empty()) {
      std::string points;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        points += detail::num(sx(s.x[i])) + "," + detail::num(sy(s.y[i] + s.band[i])) + " ";
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        points += detail::num(sx(s.x[i])) + "," + detail::num(sy(s.y[i] - s.band[i])) + " ";
      }
      out += "<polygon points=\"" + points + "\" fill=\"" + color +
             "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      points += detail::num(sx(s.x[i])) + "," + detail::num(sy(s.y[i])) + " ";
    }
    out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    const double ly = mt + 14 + 16.0 * static_cast<double>(si);
    out += "<line x1=\"" + detail::num(ml + 10) + "\" y1=\"" + detail::num(ly - 4) + "\" x2=\"" +
           detail::num(ml + 34) + "\" y2=\"" + detail::num(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + detail::num(ml + 40) + "\" y=\"" + detail::num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::escape(s.label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace germeval::svg
