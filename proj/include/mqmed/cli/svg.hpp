// svg.hpp: static vector plots written directly as SVG text

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mqmed::cli {

// Stacked areas of the columns of series (rows follow x). Negative values are stacked
// below the axis separately from positive ones.
std::string stacked_area_svg(const std::vector<double>& x, const Eigen::MatrixXd& series,
                             const std::vector<std::string>& labels, const std::string& title,
                             const std::string& x_label, const std::string& y_label);

// values(i, k) at (x[i], y[k]) as a colour map.
std::string heatmap_svg(const std::vector<double>& x, const std::vector<double>& y, const Eigen::MatrixXd& values,
                        const std::string& title, const std::string& x_label, const std::string& y_label);

}  // namespace mqmed::cli
