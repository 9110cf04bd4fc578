#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace szloca {

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

/// Optimal one-to-one assignment on a rectangular cost matrix where entries
/// above `gate` are inadmissible. Maximizes the number of admissible pairs,
/// then minimizes their total cost. The problem is split into connected
/// components of the admissibility graph before solving, so sparse scenes
/// stay close to linear in size.
Assignment solve_gated_assignment(const Eigen::MatrixXd& cost, double gate);

/// Minimum-cost assignment of every row of a dense rows <= cols matrix
/// (Kuhn-Munkres with potentials). Returns the column chosen for each row.
std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost);

}  // namespace szloca
