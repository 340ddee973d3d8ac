#include "heatlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace heatlab {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string label_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = true;
  double lo = 0.0;
  double hi = 1.0;

  double map(double v) const { return log ? std::log10(v) : v; }
  double unit(double v) const { return (map(v) - lo) / (hi - lo); }
};

Axis make_axis(bool log, const std::vector<double>& values) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    lo = std::min(lo, a.map(v));
    hi = std::max(hi, a.map(v));
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

bool usable(const Axis& a, double v) { return std::isfinite(v) && (!a.log || v > 0.0); }

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      xs.push_back(s.x[i]);
      ys.push_back(s.y[i]);
    }
  }
  const Axis ax = make_axis(spec.log_x, xs);
  const Axis ay = make_axis(spec.log_y, ys);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ax.unit(x) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - ay.unit(y)) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth, 0) + "\" height=\"" + num(kHeight, 0) +
         "\" viewBox=\"0 0 " + num(kWidth, 0) + " " + num(kHeight, 0) + "\">\n";
  if (!spec.description.empty()) out += "<desc>" + escape(spec.description) + "</desc>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + escape(spec.title) + "</text>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  // Ticks at five evenly spaced positions of the mapped axis.
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double vx = ax.lo + f * (ax.hi - ax.lo);
    const double vy = ay.lo + f * (ay.hi - ay.lo);
    const double tx = kLeft + f * pw;
    const double ty = kTop + (1.0 - f) * ph;
    out += "<line x1=\"" + num(tx) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(tx) + "\" y2=\"" +
           num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(tx) + "\" y=\"" + num(kTop + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           label_num(ax.log ? std::pow(10.0, vx) : vx) + "</text>\n";
    out += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(ty) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(ty) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(ty + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           label_num(ay.log ? std::pow(10.0, vy) : vy) + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(spec.x_label) +
         "</text>\n";
  out += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 " + num(kTop + ph / 2) + ")\">" + escape(spec.y_label) +
         "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % (sizeof(kColors) / sizeof(kColors[0]))];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(ax, s.x[i]) || !usable(ay, s.y[i])) continue;
      const double cx = px(s.x[i]);
      const double cy = py(s.y[i]);
      out += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
      points += (points.empty() ? "" : " ") + num(cx) + "," + num(cy);
    }
    if (s.line && !points.empty()) {
      out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color + "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = kTop + 16 + 16.0 * static_cast<double>(k);
      out += "<text x=\"" + num(kLeft + pw - 8) + "\" y=\"" + num(ly) + "\" text-anchor=\"end\" "
             "font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" + escape(s.label) + "</text>\n";
    }
  }

  if (spec.fit && spec.log_x && spec.log_y) {
    const auto& f = *spec.fit;
    const double y_lo = std::exp(f.intercept) * std::pow(f.x_lo, f.slope);
    const double y_hi = std::exp(f.intercept) * std::pow(f.x_hi, f.slope);
    if (usable(ax, f.x_lo) && usable(ax, f.x_hi) && usable(ay, y_lo) && usable(ay, y_hi)) {
      out += "<line x1=\"" + num(px(f.x_lo)) + "\" y1=\"" + num(py(y_lo)) + "\" x2=\"" + num(px(f.x_hi)) +
             "\" y2=\"" + num(py(y_hi)) + "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
      out += "<text x=\"" + num(kLeft + 8) + "\" y=\"" + num(kTop + ph - 10) +
             "\" font-family=\"sans-serif\" font-size=\"12\">slope = " + num(f.slope, 3) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace heatlab
