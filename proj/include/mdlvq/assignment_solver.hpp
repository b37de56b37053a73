#pragma once

// Rectangular min-cost linear assignment (rows <= columns) by shortest augmenting
// paths with dual potentials. O(rows^2 * cols) on a dense row-major matrix.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "mdlvq/errors.hpp"

namespace mdlvq {

struct AssignmentResult {
  std::vector<std::size_t> row_to_col;
  double total_cost = 0.0;
};

inline AssignmentResult solve_assignment(const std::vector<double>& cost, std::size_t rows, std::size_t cols) {
  if (rows > cols) throw Error("solve_assignment: more rows than columns");
  if (cost.size() != rows * cols) throw Error("solve_assignment: cost matrix has the wrong size");
  AssignmentResult result;
  if (rows == 0) return result;

  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  // 1-based rows and columns; column 0 is the virtual source of each augmentation.
  std::vector<double> u(rows + 1, 0.0);
  std::vector<double> v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, 0);  // column -> row, 0 = free
  std::vector<std::size_t> way(cols + 1, 0);
  std::vector<double> min_slack(cols + 1);
  std::vector<char> used(cols + 1);

  for (std::size_t i = 1; i <= rows; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      const double* row = cost.data() + (i0 - 1) * cols;
      double delta = inf;
      std::size_t j1 = none;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double reduced = row[j - 1] - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      if (j1 == none) throw Error("solve_assignment: no augmenting path (non-finite costs?)");
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.row_to_col.assign(rows, none);
  for (std::size_t j = 1; j <= cols; ++j)
    if (match[j] != 0) result.row_to_col[match[j] - 1] = j - 1;
  for (std::size_t r = 0; r < rows; ++r) result.total_cost += cost[r * cols + result.row_to_col[r]];
  return result;
}

}  // namespace mdlvq
