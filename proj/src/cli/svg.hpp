#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crm::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

// Minimal SVG 1.1 line plot with axes, ticks and a legend. Non-positive
// points are dropped on log axes.
void write_svg_plot(std::ostream& os, const std::string& title, const std::string& xlabel, const std::string& ylabel,
                    const std::vector<Series>& series, bool logx, bool logy, const std::string& comment = "");

}  // namespace crm::cli
