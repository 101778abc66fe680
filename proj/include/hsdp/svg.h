#ifndef HSDP_SVG_H_
#define HSDP_SVG_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hsdp {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;  // (x, y), y plotted on log10
};

// Self-contained line chart with a linear x axis and a log10 y axis.
// Nonpositive y values are skipped (they have no logarithm to plot).
void WriteLogLineChart(const std::string& path, const std::string& x_label,
                       const std::string& y_label,
                       std::span<const SvgSeries> series);

}  // namespace hsdp

#endif  // HSDP_SVG_H_
