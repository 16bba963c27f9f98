#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mtmc {

/// Minimum-cost rectangular linear assignment (Hungarian method with
/// potentials, O(n^2 m)). Every row is assigned when rows <= cols, every
/// column otherwise. Costs must be finite.
///
/// Returns, for each row, the assigned column or -1.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col);

}  // namespace mtmc
