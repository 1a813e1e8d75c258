#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fieldperc/harness.hpp"

// Static SVG scatter/line plots with no external assets: axes with nice
// ticks, one polyline per series with +-1 SE whiskers, dashed overlays for
// fitted curves, and a legend. Output depends only on the plot data.

namespace fieldperc::harness {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 58.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b",
                                "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  bool seen = false;

  void feed(double v) {
    if (!std::isfinite(v)) return;
    if (!seen) {
      lo = hi = v;
      seen = true;
      return;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void finish() {
    if (!seen) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      const double pad = std::max(0.5, std::fabs(hi) * 0.1);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = (hi - lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2.0 * mag;
  if (r < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

std::vector<double> ticks(const Range& r) {
  std::vector<double> out;
  const double step = nice_step(r.hi - r.lo);
  double t = std::ceil(r.lo / step) * step;
  for (; t <= r.hi + step * 1e-9; t += step) {
    out.push_back(std::fabs(t) < step * 1e-9 ? 0.0 : t);
    if (out.size() > 20) break;
  }
  return out;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  // In log mode y values are mapped through log10; non-positive points are
  // dropped from the drawing rather than distorting the scale.
  const auto map_y_value = [&](double y) -> double {
    if (!spec.log_y) return y;
    return y > 0.0 ? std::log10(y) : std::nan("");
  };

  Range rx, ry;
  const auto feed_series = [&](const PlotSeries& s) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      rx.feed(s.x[i]);
      const double y = map_y_value(s.y[i]);
      ry.feed(y);
      if (!spec.log_y && i < s.se.size()) {
        ry.feed(s.y[i] - s.se[i]);
        ry.feed(s.y[i] + s.se[i]);
      }
    }
  };
  for (const auto& s : spec.series) feed_series(s);
  for (const auto& s : spec.overlays) feed_series(s);
  rx.finish();
  ry.finish();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double x) {
    return kLeft + (x - rx.lo) / (rx.hi - rx.lo) * plot_w;
  };
  const auto py = [&](double y) {
    return kTop + (ry.hi - y) / (ry.hi - ry.lo) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         num(kWidth) + " " + num(kHeight) + "\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" font-family=\"sans-serif\""
         " font-size=\"16\" text-anchor=\"middle\">" +
         xml_escape(spec.title) + "</text>\n";

  // axes and grid
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
         num(plot_w) + "\" height=\"" + num(plot_h) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (const double t : ticks(rx)) {
    const double x = px(t);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
           num(x) + "\" y2=\"" + num(kTop + plot_h) +
           "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + plot_h + 18) +
           "\" font-family=\"sans-serif\" font-size=\"11\""
           " text-anchor=\"middle\">" +
           tick_label(t) + "</text>\n";
  }
  for (const double t : ticks(ry)) {
    const double y = py(t);
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kLeft + plot_w) + "\" y2=\"" + num(y) +
           "\" stroke=\"#ddd\"/>\n";
    const std::string lab =
        spec.log_y ? ("1e" + tick_label(t)) : tick_label(t);
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\""
           " text-anchor=\"end\">" +
           lab + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" +
         num(kHeight - 14) + "\" font-family=\"sans-serif\" font-size=\"13\""
         " text-anchor=\"middle\">" +
         xml_escape(spec.xlabel) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + num(kTop + plot_h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
         " transform=\"rotate(-90 20 " +
         num(kTop + plot_h / 2) + ")\">" + xml_escape(spec.ylabel) +
         "</text>\n";

  const auto polyline = [&](const PlotSeries& s, const char* color,
                            bool dashed) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = map_y_value(s.y[i]);
      if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
      pts += num(px(s.x[i])) + "," + num(py(y)) + " ";
    }
    if (pts.empty()) return;
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
           std::string(color) + "\" stroke-width=\"1.6\"";
    if (dashed) svg += " stroke-dasharray=\"6 4\"";
    svg += "/>\n";
  };

  int color_idx = 0;
  for (const auto& s : spec.series) {
    const char* color = kPalette[color_idx++ % kPaletteSize];
    // whiskers under the curve
    for (std::size_t i = 0; i < s.x.size() && i < s.se.size(); ++i) {
      const double ylo = map_y_value(s.y[i] - s.se[i]);
      const double yhi = map_y_value(s.y[i] + s.se[i]);
      if (!std::isfinite(ylo) || !std::isfinite(yhi)) continue;
      const double x = px(s.x[i]);
      svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(py(ylo)) + "\" x2=\"" +
             num(x) + "\" y2=\"" + num(py(yhi)) + "\" stroke=\"" +
             std::string(color) + "\" stroke-width=\"1\"/>\n";
      svg += "<line x1=\"" + num(x - 3) + "\" y1=\"" + num(py(ylo)) +
             "\" x2=\"" + num(x + 3) + "\" y2=\"" + num(py(ylo)) +
             "\" stroke=\"" + std::string(color) + "\" stroke-width=\"1\"/>\n";
      svg += "<line x1=\"" + num(x - 3) + "\" y1=\"" + num(py(yhi)) +
             "\" x2=\"" + num(x + 3) + "\" y2=\"" + num(py(yhi)) +
             "\" stroke=\"" + std::string(color) + "\" stroke-width=\"1\"/>\n";
    }
    polyline(s, color, false);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = map_y_value(s.y[i]);
      if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
      svg += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(y)) +
             "\" r=\"2.6\" fill=\"" + std::string(color) + "\"/>\n";
    }
  }
  int overlay_idx = 0;
  for (const auto& s : spec.overlays)
    polyline(s, kPalette[overlay_idx++ % kPaletteSize], true);

  // legend, top-right corner of the plot area
  double ly = kTop + 16;
  const auto legend_row = [&](const std::string& label, const char* color,
                              bool dashed) {
    if (label.empty()) return;
    const double lx = kLeft + plot_w - 170;
    svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(lx + 26) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" +
           std::string(color) + "\" stroke-width=\"2\"";
    if (dashed) svg += " stroke-dasharray=\"6 4\"";
    svg += "/>\n";
    svg += "<text x=\"" + num(lx + 32) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(label) + "</text>\n";
    ly += 17;
  };
  color_idx = 0;
  for (const auto& s : spec.series)
    legend_row(s.label, kPalette[color_idx++ % kPaletteSize], false);
  overlay_idx = 0;
  for (const auto& s : spec.overlays)
    legend_row(s.label, kPalette[overlay_idx++ % kPaletteSize], true);

  svg += "</svg>\n";
  return svg;
}

}  // namespace fieldperc::harness
