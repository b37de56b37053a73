#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "mdlvq/assignment_solver.hpp"
#include "oracles.hpp"

using namespace mdlvq;

namespace {

std::vector<std::vector<double>> as_rows(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r][c] = flat[r * cols + c];
  return out;
}

}  // namespace

TEST(SolveAssignment, SmallSquare) {
  const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
  const AssignmentResult res = solve_assignment(cost, 3, 3);
  EXPECT_DOUBLE_EQ(res.total_cost, 5.0);
  EXPECT_EQ(res.row_to_col, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(SolveAssignment, Validation) {
  EXPECT_THROW(solve_assignment(std::vector<double>(6, 0.0), 3, 2), Error);
  EXPECT_THROW(solve_assignment(std::vector<double>(5, 0.0), 2, 3), Error);
  EXPECT_TRUE(solve_assignment({}, 0, 4).row_to_col.empty());
}

TEST(SolveAssignment, MatchesExhaustiveDynamicProgram) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5.0, 10.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t rows = 1 + trial % 9;
    const std::size_t cols = rows + trial % 5;
    std::vector<double> cost(rows * cols);
    for (double& c : cost) c = u(rng);
    const AssignmentResult res = solve_assignment(cost, rows, cols);
    EXPECT_NEAR(res.total_cost, oracle::bitmask_assignment(as_rows(cost, rows, cols)), 1e-9);
    std::set<std::size_t> used(res.row_to_col.begin(), res.row_to_col.end());
    EXPECT_EQ(used.size(), rows);
  }
}

TEST(SolveAssignment, MatchesMinCostFlowOnRectangularInstances) {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<int> u(0, 40);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 10 + trial;
    const std::size_t cols = 3 * rows;
    std::vector<double> cost(rows * cols);
    for (double& c : cost) c = u(rng);  // many ties
    const AssignmentResult res = solve_assignment(cost, rows, cols);
    EXPECT_NEAR(res.total_cost, oracle::min_cost_flow_assignment(as_rows(cost, rows, cols)), 1e-9);
  }
}
