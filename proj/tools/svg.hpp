#pragma once

#include <string>
#include <vector>

namespace fbopt::tool {

struct SvgSeries {
    std::string label;
    std::vector<double> t;
    std::vector<double> v;  // NaN entries break the polyline
};

/// Headless SVG line plot: axes box, ticks, one polyline per series, legend.
std::string line_plot_svg(const std::string& title, const std::vector<SvgSeries>& series,
                          int width = 760, int height = 300);

}  // namespace fbopt::tool
