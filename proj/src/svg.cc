#include "hsdp/svg.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hsdp {
namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 520;
constexpr double kMarginLeft = 80;
constexpr double kMarginRight = 24;
constexpr double kMarginTop = 28;
constexpr double kMarginBottom = 56;

std::string Num(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

void WriteLogLineChart(const std::string& path, const std::string& x_label,
                       const std::string& y_label,
                       std::span<const SvgSeries> series) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min_pos = std::numeric_limits<double>::infinity();
  double y_max_pos = 0.0;
  for (const SvgSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      if (y > 0.0) {
        y_min_pos = std::min(y_min_pos, y);
        y_max_pos = std::max(y_max_pos, y);
      }
    }
  }
  if (!(x_min < x_max) || !(y_max_pos > 0.0)) {
    throw std::invalid_argument("chart needs a positive-range series");
  }

  const double log_lo = std::floor(std::log10(y_min_pos));
  const double log_hi = std::ceil(std::log10(y_max_pos));
  const double log_span = std::max(log_hi - log_lo, 1.0);

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double x) {
    return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  auto py = [&](double y) {
    return kMarginTop + (log_hi - std::log10(y)) / log_span * plot_h;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Decade gridlines and y tick labels, thinned when the span is large.
  const int decade_step =
      std::max(1, static_cast<int>(std::ceil(log_span / 12.0)));
  for (int d = static_cast<int>(log_lo); d <= static_cast<int>(log_hi);
       d += decade_step) {
    const double y = py(std::pow(10.0, d));
    out << "<line x1=\"" << Num(kMarginLeft) << "\" y1=\"" << Num(y)
        << "\" x2=\"" << Num(kWidth - kMarginRight) << "\" y2=\"" << Num(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << Num(kMarginLeft - 8) << "\" y=\"" << Num(y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">"
        << "1e" << d << "</text>\n";
  }

  const int x_ticks = 5;
  for (int i = 0; i <= x_ticks; ++i) {
    const double x = x_min + (x_max - x_min) * i / x_ticks;
    const double xs = px(x);
    out << "<line x1=\"" << Num(xs) << "\" y1=\"" << Num(kMarginTop)
        << "\" x2=\"" << Num(xs) << "\" y2=\""
        << Num(kHeight - kMarginBottom) << "\" stroke=\"#eeeeee\""
        << " stroke-width=\"1\"/>\n";
    out << "<text x=\"" << Num(xs) << "\" y=\""
        << Num(kHeight - kMarginBottom + 18)
        << "\" text-anchor=\"middle\" font-size=\"12\""
        << " font-family=\"sans-serif\">" << Num(x) << "</text>\n";
  }

  out << "<rect x=\"" << Num(kMarginLeft) << "\" y=\"" << Num(kMarginTop)
      << "\" width=\"" << Num(plot_w) << "\" height=\"" << Num(plot_h)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  double legend_y = kMarginTop + 16;
  for (const SvgSeries& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : s.points) {
      if (!(y > 0.0)) continue;
      out << Num(px(x)) << "," << Num(py(y)) << " ";
    }
    out << "\"/>\n";
    out << "<line x1=\"" << Num(kWidth - kMarginRight - 150) << "\" y1=\""
        << Num(legend_y - 4) << "\" x2=\"" << Num(kWidth - kMarginRight - 120)
        << "\" y2=\"" << Num(legend_y - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"1.8\"/>\n";
    out << "<text x=\"" << Num(kWidth - kMarginRight - 114) << "\" y=\""
        << Num(legend_y) << "\" font-size=\"12\""
        << " font-family=\"sans-serif\">" << s.label << "</text>\n";
    legend_y += 18;
  }

  out << "<text x=\"" << Num(kMarginLeft + plot_w / 2) << "\" y=\""
      << Num(kHeight - 14) << "\" text-anchor=\"middle\" font-size=\"13\""
      << " font-family=\"sans-serif\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << Num(kMarginTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\""
      << " font-family=\"sans-serif\" transform=\"rotate(-90 18 "
      << Num(kMarginTop + plot_h / 2) << ")\">" << y_label << "</text>\n";
  out << "</svg>\n";
}

}  // namespace hsdp
