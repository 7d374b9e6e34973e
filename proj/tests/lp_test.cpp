// Copyright 2026 The mgpoison Authors
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

#include "mgpoison/lp.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "mgpoison/rng.hpp"

namespace mgpoison {
namespace {

TEST(LpSolve, LowerBoundRowIsTight) {
  LpModel m;
  int x = m.add_variable("x", -kInf, kInf, 1.0);
  m.add_constraint("lo", {{x, 1.0}}, Sense::kGreaterEqual, 3.0);
  m.add_constraint("hi", {{x, 1.0}}, Sense::kLessEqual, 10.0);
  LpSolution s = solve(m);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.values[x], 3.0, 1e-9);
  EXPECT_NEAR(s.objective_value, 3.0, 1e-9);
}

TEST(LpSolve, ContradictoryRowsAreInfeasible) {
  LpModel m;
  int x = m.add_variable("x", -kInf, kInf, 0.0);
  m.add_constraint("a", {{x, 1.0}}, Sense::kLessEqual, -1.0);
  m.add_constraint("b", {{x, 1.0}}, Sense::kGreaterEqual, 1.0);
  EXPECT_EQ(solve(m).status, LpStatus::kInfeasible);
}

TEST(LpSolve, DegenerateOptimalFace) {
  LpModel m;
  int x = m.add_variable("x", 0, 1, -1.0);
  int y = m.add_variable("y", 0, 1, -1.0);
  m.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, Sense::kLessEqual, 1.0);
  LpSolution s = solve(m);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective_value, -1.0, 1e-9);
  EXPECT_NEAR(s.values[x] + s.values[y], 1.0, 1e-9);
  EXPECT_LE(s.dual_bound, s.objective_value + 1e-6);
  EXPECT_NEAR(s.dual_bound, -1.0, 1e-9);
}

TEST(LpSolve, UnboundedDirection) {
  LpModel m;
  int x = m.add_variable("x", 0, kInf, -1.0);
  int y = m.add_variable("y", 0, kInf, 0.0);
  m.add_constraint("r", {{x, 1.0}, {y, -1.0}}, Sense::kLessEqual, 2.0);
  EXPECT_EQ(solve(m).status, LpStatus::kUnbounded);
}

TEST(LpSolve, EqualityWithFreeVariables) {
  // min |u| + |v| written with free u, v and epigraph t.
  LpModel m;
  int u = m.add_variable("u", -kInf, kInf);
  int v = m.add_variable("v", -kInf, kInf);
  int tu = m.add_variable("tu", 0, kInf, 1.0);
  int tv = m.add_variable("tv", 0, kInf, 1.0);
  m.add_constraint("sum", {{u, 1.0}, {v, 2.0}}, Sense::kEqual, 4.0);
  m.add_constraint("a", {{tu, 1.0}, {u, -1.0}}, Sense::kGreaterEqual, 0.0);
  m.add_constraint("b", {{tu, 1.0}, {u, 1.0}}, Sense::kGreaterEqual, 0.0);
  m.add_constraint("c", {{tv, 1.0}, {v, -1.0}}, Sense::kGreaterEqual, 0.0);
  m.add_constraint("d", {{tv, 1.0}, {v, 1.0}}, Sense::kGreaterEqual, 0.0);
  LpSolution s = solve(m);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective_value, 2.0, 1e-9);
  EXPECT_NEAR(s.values[v], 2.0, 1e-9);
}

TEST(LpSolve, EmptyRowSet) {
  LpModel m;
  m.add_variable("x", -2, 5, 1.0);
  m.add_variable("y", -2, 5, -1.0);
  LpSolution s = solve(m);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective_value, -7.0, 1e-12);
}

TEST(LpSolve, RejectsCrossedBounds) {
  LpModel m;
  m.add_variable("x", 1, 0, 1.0);
  EXPECT_THROW(solve(m), InvalidArgument);
}

TEST(LpSolve, PivotLimitRaisesNumericalFailure) {
  LpModel m;
  std::vector<LpTerm> terms;
  for (int j = 0; j < 20; ++j) terms.push_back({m.add_variable("x" + std::to_string(j), 0, 1, -1.0 - j), 1.0});
  for (int r = 0; r < 10; ++r) m.add_constraint("r", terms, Sense::kLessEqual, 3.0 + r);
  SolverOptions opt;
  opt.pivot_limit = 1;
  EXPECT_THROW(solve(m, opt), NumericalFailure);
}

// Brute-force oracle for tiny fully bounded LPs: enumerate every basis of
// active constraints, keep the best feasible vertex.
std::optional<double> vertex_oracle(const LpModel& m) {
  const int n = m.num_variables();
  struct Hyper {
    std::vector<double> a;
    double b;
  };
  std::vector<Hyper> hs;
  for (const auto& r : m.constraints()) {
    Hyper h{std::vector<double>(n, 0.0), r.rhs};
    for (const auto& t : r.terms) h.a[t.var] += t.coef;
    hs.push_back(h);
  }
  for (int j = 0; j < n; ++j) {
    Hyper lo{std::vector<double>(n, 0.0), m.variable(j).lower};
    lo.a[j] = 1.0;
    Hyper up = lo;
    up.b = m.variable(j).upper;
    hs.push_back(lo);
    hs.push_back(up);
  }
  std::optional<double> best;
  std::vector<int> pick(n);
  const int k = static_cast<int>(hs.size());
  std::vector<bool> mask(k, false);
  std::fill(mask.begin(), mask.begin() + n, true);
  do {
    int c = 0;
    for (int i = 0; i < k; ++i)
      if (mask[i]) pick[c++] = i;
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1));
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < n; ++j) a[r][j] = hs[pick[r]].a[j];
      a[r][n] = hs[pick[r]].b;
    }
    bool singular = false;
    for (int col = 0; col < n && !singular; ++col) {
      int p = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(a[r][col]) > std::abs(a[p][col])) p = r;
      if (std::abs(a[p][col]) < 1e-10) {
        singular = true;
        break;
      }
      std::swap(a[p], a[col]);
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        for (int j = col; j <= n; ++j) a[r][j] -= f * a[col][j];
      }
    }
    if (singular) continue;
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = a[j][n] / a[j][j];
    if (m.max_violation(x) > 1e-9) continue;
    const double z = m.objective(x);
    if (!best || z < *best) best = z;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

LpModel random_small_lp(Rng& rng) {
  LpModel m;
  const int n = 2 + rng.below(2);
  const int rows = 1 + rng.below(4);
  for (int j = 0; j < n; ++j) {
    const double lo = rng.uniform(-3, 0);
    m.add_variable("x" + std::to_string(j), lo, lo + rng.uniform(0.5, 4), rng.uniform(-2, 2));
  }
  for (int r = 0; r < rows; ++r) {
    std::vector<LpTerm> t;
    for (int j = 0; j < n; ++j) {
      if (rng.below(4) == 0) continue;
      t.push_back({j, std::round(rng.uniform(-3, 3) * 4) / 4});
    }
    const int sense = rng.below(3);
    m.add_constraint("r" + std::to_string(r), t,
                     sense == 0 ? Sense::kLessEqual : sense == 1 ? Sense::kGreaterEqual : Sense::kEqual,
                     rng.uniform(-2, 2));
  }
  return m;
}

TEST(LpSolveProperty, MatchesVertexEnumerationOnRandomSmallModels) {
  Rng rng(11);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    LpModel m = random_small_lp(rng);
    LpSolution s = solve(m);
    std::optional<double> oracle = vertex_oracle(m);
    if (!oracle) {
      EXPECT_EQ(s.status, LpStatus::kInfeasible) << "trial " << trial;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(s.status, LpStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(s.objective_value, *oracle, 1e-7) << "trial " << trial;
    EXPECT_LE(m.max_violation(s.values), 1e-7);
    EXPECT_LE(s.dual_bound, s.objective_value + 1e-6);
    ++optimal;
  }
  EXPECT_GT(optimal, 100);
  EXPECT_GT(infeasible, 10);
}

LpModel permuted(const LpModel& m, const std::vector<int>& order) {
  LpModel out;
  for (const auto& v : m.variables()) out.add_variable(v.name, v.lower, v.upper, v.cost);
  for (int r : order) {
    const auto& c = m.constraint(r);
    out.add_constraint(c.name, c.terms, c.sense, c.rhs);
  }
  return out;
}

TEST(LpSolveProperty, RowOrderDoesNotChangeOptimum) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    // Transportation-style problem: always feasible and bounded.
    LpModel m;
    const int supply = 3 + rng.below(3), demand = 3 + rng.below(3);
    std::vector<std::vector<int>> x(supply, std::vector<int>(demand));
    for (int i = 0; i < supply; ++i)
      for (int j = 0; j < demand; ++j)
        x[i][j] = m.add_variable("x", 0, kInf, rng.uniform(1, 10));
    double total = 0;
    for (int j = 0; j < demand; ++j) {
      const double d = std::round(rng.uniform(1, 5));
      total += d;
      std::vector<LpTerm> t;
      for (int i = 0; i < supply; ++i) t.push_back({x[i][j], 1.0});
      m.add_constraint("demand", t, Sense::kGreaterEqual, d);
    }
    for (int i = 0; i < supply; ++i) {
      std::vector<LpTerm> t;
      for (int j = 0; j < demand; ++j) t.push_back({x[i][j], 1.0});
      m.add_constraint("supply", t, Sense::kLessEqual, std::ceil(total / supply) + 1);
    }
    std::vector<int> order(m.num_constraints());
    std::iota(order.begin(), order.end(), 0);
    for (int k = static_cast<int>(order.size()) - 1; k > 0; --k) std::swap(order[k], order[rng.below(k + 1)]);
    LpSolution a = solve(m), b = solve(permuted(m, order));
    ASSERT_EQ(a.status, LpStatus::kOptimal);
    ASSERT_EQ(b.status, LpStatus::kOptimal);
    EXPECT_NEAR(a.objective_value, b.objective_value, 1e-7);
    EXPECT_LE(a.dual_bound, a.objective_value + 1e-6);
    EXPECT_NEAR(a.dual_bound, a.objective_value, 1e-6);
  }
}

TEST(LpMps, WritesAllSections) {
  LpModel m;
  int x = m.add_variable("x", -kInf, kInf, 1.0);
  int y = m.add_variable("y", 0, 4, 0.0);
  int z = m.add_variable("z", 2, 2, 0.0);
  m.add_constraint("row", {{x, 1.0}, {y, -2.5}, {z, 1.0}}, Sense::kEqual, 3.0);
  std::ostringstream os;
  write_mps(m, os, "TINY");
  const std::string s = os.str();
  for (const char* tok : {"NAME          TINY", "ROWS", " N  OBJ", " E  R0", "COLUMNS", "RHS", "BOUNDS",
                          " FR BND       C0", " UP BND       C1", " FX BND       C2", "ENDATA",
                          "* C0 x", "* R0 row"}) {
    EXPECT_NE(s.find(tok), std::string::npos) << tok;
  }
}

}  // namespace
}  // namespace mgpoison
