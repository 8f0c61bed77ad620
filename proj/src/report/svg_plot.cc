// report/svg_plot.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sdrtse/report.h"

namespace sdrtse {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string Escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double X(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double Y(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void Widen(double &lo, double &hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

void Axes(std::ostringstream &o, const Frame &f, const std::string &title,
          const std::string &x_label) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
    << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << Escape(title) << "</text>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
    << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4, yv = f.y0 + (f.y1 - f.y0) * i / 4;
    o << "<text x=\"" << f.X(xv) << "\" y=\"" << kHeight - kBottom + 15
      << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    o << "<text x=\"" << kLeft - 5 << "\" y=\"" << f.Y(yv) + 4 << "\" text-anchor=\"end\">" << yv
      << "</text>\n";
  }
  o << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
    << Escape(x_label) << "</text>\n";
}

}  // namespace

std::string SvgLineChart(const std::string &title, const std::string &x_label,
                         const std::vector<Series> &series) {
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto &s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series x/y lengths differ");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  }
  if (!std::isfinite(f.x0)) f = {0, 1, 0, 1};
  Widen(f.x0, f.x1);
  Widen(f.y0, f.y1);
  std::ostringstream o;
  o.precision(5);
  Axes(o, f, title, x_label);
  for (size_t k = 0; k < series.size(); ++k) {
    const char *color = kColors[k % std::size(kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (size_t i = 0; i < series[k].x.size(); ++i)
      if (std::isfinite(series[k].y[i]))
        o << f.X(series[k].x[i]) << "," << f.Y(series[k].y[i]) << " ";
    o << "\"/>\n";
    o << "<text x=\"" << kWidth - kRight - 5 << "\" y=\"" << kTop + 14 * (k + 1)
      << "\" text-anchor=\"end\" fill=\"" << color << "\">" << Escape(series[k].name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<int64_t> HistogramCounts(const std::vector<double> &values, int bins, double *lo,
                                     double *hi) {
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  double a = std::numeric_limits<double>::infinity(), b = -a;
  for (double v : values)
    if (std::isfinite(v)) a = std::min(a, v), b = std::max(b, v);
  if (!std::isfinite(a)) a = 0, b = 1;
  Widen(a, b);
  std::vector<int64_t> counts(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto i = static_cast<int>((v - a) / (b - a) * bins);
    counts[std::clamp(i, 0, bins - 1)]++;
  }
  if (lo) *lo = a;
  if (hi) *hi = b;
  return counts;
}

std::string SvgHistogram(const std::string &title, const std::vector<double> &values, int bins) {
  double lo, hi;
  const auto counts = HistogramCounts(values, bins, &lo, &hi);
  const double top = std::max<double>(1, *std::max_element(counts.begin(), counts.end()));
  Frame f{lo, hi, 0, top};
  std::ostringstream o;
  o.precision(5);
  Axes(o, f, title, "value");
  o << "<!-- bins " << bins << " -->\n";
  const double w = (hi - lo) / bins;
  for (int i = 0; i < bins; ++i) {
    if (counts[i] == 0) continue;
    const double x0 = f.X(lo + i * w), x1 = f.X(lo + (i + 1) * w), y = f.Y(counts[i]);
    o << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << std::max(0.5, x1 - x0 - 0.5)
      << "\" height=\"" << f.Y(0) - y << "\" fill=\"" << kColors[0] << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace sdrtse
