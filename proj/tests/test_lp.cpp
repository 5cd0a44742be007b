// Copyright 2026 The dhdsddp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dhdsddp/lp.hpp"
#include "support/lp_oracle.hpp"

namespace dhdsddp {
namespace {

// min -2x - y  s.t.  x + y <= 4,  x + 3y <= 7,  0 <= x <= 3,  y >= 0.
// Optimum x = 3 (at its upper bound), y = 1, value -7. Raising the first rhs
// by d moves y to 1 + d, so its dual is -1; the second row is slack.
LinearProgram two_var_lp() {
  LinearProgram lp;
  lp.add_variable(-2.0, 0.0, 3.0, "x");
  lp.add_variable(-1.0, 0.0, kInf, "y");
  lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 4.0, "capacity");
  lp.add_row({{0, 1.0}, {1, 3.0}}, Sense::LessEqual, 7.0, "blend");
  return lp;
}

TEST(Simplex, TwoVariableOptimumAndDuals) {
  const auto sol = solve(two_var_lp());
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, -7.0, 1e-12);
  EXPECT_NEAR(sol.x[0], 3.0, 1e-12);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-12);
  EXPECT_NEAR(sol.duals[0], -1.0, 1e-12);
  EXPECT_NEAR(sol.duals[1], 0.0, 1e-12);
  EXPECT_NEAR(sol.reduced_costs[0], -1.0, 1e-12);
  EXPECT_NEAR(sol.reduced_costs[1], 0.0, 1e-12);
  EXPECT_TRUE(check_certificate(two_var_lp(), sol).empty());
}

// min x + 2y  s.t.  x + y = 3,  x - y >= -1,  0 <= x <= 2,  0 <= y <= 5.
// Optimum (2, 1), value 4; the equality dual is 2 since extra rhs goes to y.
TEST(Simplex, EqualityRowDualIsRhsSensitivity) {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 2.0);
  lp.add_variable(2.0, 0.0, 5.0);
  lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::Equal, 3.0);
  lp.add_row({{0, 1.0}, {1, -1.0}}, Sense::GreaterEqual, -1.0);
  const auto sol = solve(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 4.0, 1e-12);
  EXPECT_NEAR(sol.duals[0], 2.0, 1e-12);
  EXPECT_NEAR(sol.duals[1], 0.0, 1e-12);
  EXPECT_TRUE(check_certificate(lp, sol).empty());
}

TEST(Simplex, GreaterEqualRowOnFreeVariable) {
  LinearProgram lp;
  lp.add_variable(1.0, -kInf, kInf);
  lp.add_row({{0, 1.0}}, Sense::GreaterEqual, -3.0);
  const auto sol = solve(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, -3.0, 1e-12);
  EXPECT_NEAR(sol.duals[0], 1.0, 1e-12);
}

TEST(Simplex, DetectsInfeasibility) {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 2.0);
  lp.add_variable(1.0, 0.0, 2.0);
  lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::GreaterEqual, 5.0);
  EXPECT_EQ(solve(lp).status, LpStatus::Infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
  LinearProgram lp;
  lp.add_variable(-1.0, 0.0, kInf);
  lp.add_variable(0.0, 0.0, 1.0);
  lp.add_row({{0, 1.0}, {1, -1.0}}, Sense::GreaterEqual, 0.0);
  EXPECT_EQ(solve(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, EmptyProgram) {
  const auto sol = solve(LinearProgram{});
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_EQ(sol.objective, 0.0);
}

TEST(Simplex, RejectsMismatchedDimensions) {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 1.0);
  lp.upper.push_back(2.0);
  EXPECT_THROW(solve(lp), LpError);
}

TEST(Simplex, MatchesBasisEnumerationOnRandomPrograms) {
  std::mt19937_64 g(20261017);
  std::size_t infeasible = 0;
  for (int k = 0; k < 300; ++k) {
    const auto lp = testing::random_bounded_lp(g);
    const auto brute = testing::enumerate_bases(lp);
    const auto sol = solve(lp);
    if (!brute.feasible) {
      EXPECT_EQ(sol.status, LpStatus::Infeasible) << "instance " << k;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(sol.status, LpStatus::Optimal) << "instance " << k;
    EXPECT_NEAR(sol.objective, brute.objective, 1e-8) << "instance " << k;
  }
  EXPECT_GT(infeasible, 0u);
}

TEST(SimplexProperty, RandomCertificatesAreClean) {
  std::mt19937_64 g(7);
  for (int k = 0; k < 1000; ++k) {
    const auto lp = testing::random_bounded_lp(g);
    const auto sol = solve(lp);
    if (sol.status != LpStatus::Optimal) continue;
    const auto issues = check_certificate(lp, sol);
    EXPECT_TRUE(issues.empty()) << "instance " << k << ": " << issues.front();
  }
}

TEST(SimplexProperty, Deterministic) {
  std::mt19937_64 g(99);
  for (int k = 0; k < 50; ++k) {
    const auto lp = testing::random_bounded_lp(g);
    const auto a = solve(lp), b = solve(lp);
    ASSERT_EQ(a.status, b.status);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.duals, b.duals);
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

TEST(SimplexProperty, ObjectiveScalesWithCost) {
  std::mt19937_64 g(3);
  for (int k = 0; k < 100; ++k) {
    auto lp = testing::random_bounded_lp(g);
    const auto base = solve(lp);
    if (base.status != LpStatus::Optimal) continue;
    for (auto& c : lp.cost) c *= 2.0;
    const auto scaled = solve(lp);
    ASSERT_EQ(scaled.status, LpStatus::Optimal);
    EXPECT_NEAR(scaled.objective, 2.0 * base.objective, 1e-9 * (1.0 + std::abs(base.objective)));
  }
}

TEST(Certificate, CorruptedDualIsReported) {
  const auto lp = two_var_lp();
  auto sol = solve(lp);
  sol.duals[0] = 0.5;
  const auto issues = check_certificate(lp, sol);
  ASSERT_FALSE(issues.empty());
  bool names_row = false;
  for (const auto& s : issues) names_row = names_row || s.find("row 0 (capacity)") != std::string::npos;
  EXPECT_TRUE(names_row);
}

TEST(Certificate, PrimalViolationIsReported) {
  const auto lp = two_var_lp();
  auto sol = solve(lp);
  sol.x[1] = 2.0;
  EXPECT_FALSE(check_certificate(lp, sol).empty());
}

TEST(Mps, DumpHasAllSections) {
  std::ostringstream os;
  write_mps(os, two_var_lp(), "TINY");
  const std::string s = os.str();
  for (const char* section : {"NAME          TINY", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"})
    EXPECT_NE(s.find(section), std::string::npos) << section;
  EXPECT_NE(s.find(" L  R0"), std::string::npos);
  EXPECT_NE(s.find(" UP BND"), std::string::npos);
}

}  // namespace
}  // namespace dhdsddp
