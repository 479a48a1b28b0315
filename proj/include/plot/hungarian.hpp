#pragma once

#include <Eigen/Core>

#include <vector>

namespace plot {

// Minimum-cost one-to-one assignment on a rectangular cost matrix.
// Returns, for every row, the assigned column or -1. When rows <= cols every
// row is assigned; otherwise every column is.
std::vector<int> solve_assignment_min(const Eigen::MatrixXd& cost);

// Same, maximizing the total score.
std::vector<int> solve_assignment_max(const Eigen::MatrixXd& score);

}  // namespace plot
