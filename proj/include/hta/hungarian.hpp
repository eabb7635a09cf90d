#pragma once

#include <vector>

#include <Eigen/Core>

namespace hta {

inline constexpr Eigen::Index kUnassigned = -1;

// Minimum-cost rectangular assignment (shortest augmenting path with dual
// potentials, O(n^2 m)). Matches min(rows, cols) pairs; returns the column of
// every row, or kUnassigned. Scan order is fixed, so ties resolve deterministically.
std::vector<Eigen::Index> min_cost_assignment(const Eigen::Ref<const Eigen::MatrixXd>& cost);

}  // namespace hta
