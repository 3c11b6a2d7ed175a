#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace chfront::cli {

struct Series {
    std::string name;
    std::vector<double> x, y;
    bool markers = false;   // points instead of a polyline
};

struct PlotSpec {
    std::string title, x_label, y_label;
    std::vector<Series> series;
};

/// Line plot with linear axes, ticks and a legend. Non-finite points split
/// a polyline.
void write_svg(const std::filesystem::path& file, const PlotSpec& plot);

}  // namespace chfront::cli
