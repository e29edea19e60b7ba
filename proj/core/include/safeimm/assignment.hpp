#pragma once

#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace safeimm {

/// Marks a forbidden pairing in a cost matrix.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

struct Assignment {
  /// (row, column) pairs.
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> unassigned_rows;
  std::vector<int> unassigned_cols;
  double total_cost = 0.0;
};

/// Optimal one-to-one assignment over the permitted (finite) entries of a
/// rectangular cost matrix.
///
/// Among all matchings that use the largest possible number of permitted
/// entries, returns one with minimum total cost. Shortest augmenting path
/// with row/column potentials, O(n^2 m).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace safeimm
