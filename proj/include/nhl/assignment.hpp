#pragma once
/// Minimum-cost rectangular assignment (Hungarian method).

#include <vector>

#include <Eigen/Dense>

namespace nhl {

/// cost is rows x cols with rows <= cols; returns the column chosen for every row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// Greedy nearest choice per row; falls back to hungarian when two rows pick the same column.
std::vector<int> greedy_then_hungarian(const Eigen::MatrixXd& cost);

}  // namespace nhl
