#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace repdyn {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Header line (if non-empty) followed by one CSV row per matrix row.
std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header = {});

/// Parses a numeric CSV table; lines starting with '#' are ignored, and the
/// first remaining line is skipped when `has_header` is set.
Eigen::MatrixXd matrix_from_csv(std::string_view text, bool has_header);

}  // namespace repdyn
