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

#ifndef MGPOISON_LP_HPP_
#define MGPOISON_LP_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "mgpoison/errors.hpp"
#include "mgpoison/game.hpp"

namespace mgpoison {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct LpTerm {
  int var;
  double coef;
};

struct LpVariable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
};

struct LpConstraint {
  std::string name;
  std::vector<LpTerm> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

// Minimization LP with bounded variables.
class LpModel {
 public:
  int add_variable(std::string name, double lower, double upper, double cost = 0.0);
  int add_constraint(std::string name, std::vector<LpTerm> terms, Sense sense, double rhs);
  void set_cost(int var, double cost) { vars_.at(var).cost = cost; }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const std::vector<LpVariable>& variables() const { return vars_; }
  const std::vector<LpConstraint>& constraints() const { return rows_; }
  const LpVariable& variable(int j) const { return vars_[j]; }
  const LpConstraint& constraint(int r) const { return rows_[r]; }

  // Throws InvalidArgument on dangling references or crossed bounds.
  void validate() const;

  double objective(const std::vector<double>& x) const;
  // Largest bound or row violation of x.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<LpVariable> vars_;
  std::vector<LpConstraint> rows_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  // Row multipliers of the final basis (phase 2).
  std::vector<double> duals;
  // Lagrangian lower bound from the final duals; <= objective at optimum.
  double dual_bound = -kInf;
  int iterations = 0;
};

struct SolverOptions {
  int pivot_limit = 50000;
  int degenerate_before_bland = 1000;
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  int refactor_every = 64;
};

// Bounded revised primal simplex. Throws NumericalFailure when the pivot
// limit is hit or the final point is not primal feasible.
LpSolution solve(const LpModel& model, const SolverOptions& options = {});

// Fixed-column MPS (free names allowed). See README for the layout.
void write_mps(const LpModel& model, std::ostream& out, const std::string& name = "MGPOISON");

}  // namespace mgpoison

#endif  // MGPOISON_LP_HPP_
