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

#include "mgpoison/bandit_attack.hpp"

#include <algorithm>
#include <cmath>

#include "attack_common.hpp"

namespace mgpoison {

using detail::RewardVars;

void BanditAttackInstance::validate() const {
  const GameShape& g = dataset.shape;
  if (g.horizon() != 1 || g.n_states() != 1) throw InvalidArgument("bandit instance needs H = 1 and one state");
  if (target < 0 || target >= g.num_joint()) throw InvalidArgument("target joint action out of range");
  if (!(iota >= 0.0)) throw InvalidMargin("iota must be nonnegative");
  if (!(bound > 0.0)) throw InvalidArgument("bound must be positive");
  if (widths.rho_r.horizon() != 1 || widths.rho_r.n_states() != 1 || widths.rho_r.n_joint() != g.num_joint()) {
    throw InvalidArgument("width table shape mismatch");
  }
  CoverageReport cov = check_full_coverage(visit_counts(dataset));
  if (!cov.satisfied) throw UncoveredCell("dataset misses joint actions", cov.uncovered);
}

BanditAttackInstance make_bandit_instance(OfflineDataset dataset, int target, const WidthParams& widths,
                                          double iota) {
  BanditAttackInstance inst;
  VisitCounts counts = visit_counts(dataset);
  inst.widths = compute_widths(widths, counts, dataset.shape, dataset.bound);
  inst.bound = dataset.bound;
  inst.dataset = std::move(dataset);
  inst.target = target;
  inst.iota = iota;
  inst.validate();
  return inst;
}

namespace {

struct Built {
  LpModel model;
  RewardVars vars;
  RewardTable mle;
};

Built build_bandit(const BanditAttackInstance& inst, const BanditLpOptions& opt, bool confidence) {
  inst.validate();
  OfflineDataset ds = inst.dataset;
  ds.bound = inst.bound;
  const GameShape& g = ds.shape;
  Built out;
  out.mle = mle_game(ds).rewards;
  out.vars = detail::add_reward_variables(out.model, ds, visit_counts(ds), out.mle, opt.granularity);
  const double b = inst.bound;
  const bool slack_system = confidence && opt.encoding == CiEncoding::kSlackSystem && std::isfinite(b);
  for (int i = 0; i < g.n_players(); ++i) {
    const int ti = g.action_of(inst.target, i);
    for (int o = 0; o < g.num_others(i); ++o) {
      const int t = g.compose(i, ti, o);
      const auto& rt = out.vars.expr[out.vars.cell_index(g, i, 0, 0, t)];
      for (int ai = 0; ai < g.actions(i); ++ai) {
        if (ai == ti) continue;
        const int a = g.compose(i, ai, o);
        const auto& ra = out.vars.expr[out.vars.cell_index(g, i, 0, 0, a)];
        const double rho1 = confidence ? inst.widths.rho_r(0, 0, t) : 0.0;
        const double rho2 = confidence ? inst.widths.rho_r(0, 0, a) : 0.0;
        const std::string tag = detail::cell_name("sep", i, 0, o, ai);
        // R1 - R2 terms and constant.
        std::vector<LpTerm> diff = detail::concat(rt.terms, ra.terms, -1.0);
        const double dconst = rt.constant - ra.constant;
        if (!slack_system) {
          out.model.add_constraint(tag, diff, Sense::kGreaterEqual, rho1 + rho2 + inst.iota - dconst);
          continue;
        }
        const int mum = out.model.add_variable(tag + ".mum", 0.0, kInf);
        const int mup = out.model.add_variable(tag + ".mup", 0.0, kInf);
        const int mlm = out.model.add_variable(tag + ".mlm", 0.0, kInf);
        const int mlp = out.model.add_variable(tag + ".mlp", 0.0, kInf);
        const std::vector<LpTerm> m = {{mum, 1.0}, {mup, 1.0}, {mlm, 1.0}, {mlp, 1.0}};
        out.model.add_constraint(tag + ".1", m, Sense::kGreaterEqual, 2 * b + inst.iota);
        out.model.add_constraint(tag + ".2", detail::concat(diff, m), Sense::kGreaterEqual,
                                 rho1 + rho2 + inst.iota - dconst);
        out.model.add_constraint(tag + ".3", detail::concat(detail::concat({}, ra.terms, -1.0), m),
                                 Sense::kGreaterEqual, b + rho2 + inst.iota + ra.constant);
        out.model.add_constraint(tag + ".4", detail::concat(rt.terms, m), Sense::kGreaterEqual,
                                 b + rho1 + inst.iota - rt.constant);
        out.model.add_constraint(tag + ".5", detail::concat({{mum, 1.0}}, rt.terms), Sense::kGreaterEqual,
                                 -rho1 - b - rt.constant);
        out.model.add_constraint(tag + ".6", detail::concat({{mup, 1.0}}, rt.terms, -1.0), Sense::kGreaterEqual,
                                 -rho1 + b + rt.constant);
        out.model.add_constraint(tag + ".7", detail::concat({{mlm, 1.0}}, ra.terms), Sense::kGreaterEqual,
                                 -rho2 + b - ra.constant);
        out.model.add_constraint(tag + ".8", detail::concat({{mlp, 1.0}}, ra.terms, -1.0), Sense::kGreaterEqual,
                                 rho2 - b + ra.constant);
      }
    }
  }
  return out;
}

}  // namespace

LpModel build_mle_attack_lp(const BanditAttackInstance& inst, const BanditLpOptions& opt) {
  return build_bandit(inst, opt, false).model;
}

LpModel build_ci_attack_lp(const BanditAttackInstance& inst, const BanditLpOptions& opt) {
  return build_bandit(inst, opt, true).model;
}

bool bandit_feasibility(const BanditAttackInstance& inst) {
  for (double rho : inst.widths.rho_r.data()) {
    if (inst.iota > 2 * inst.bound - 2 * rho) return false;
  }
  return true;
}

AttackResult solve_bandit_attack(const BanditAttackInstance& inst, BanditLearner learner,
                                 const BanditLpOptions& opt) {
  const bool confidence = learner == BanditLearner::kConfidenceBound;
  Built built = build_bandit(inst, opt, confidence);
  LpSolution sol = solve(built.model);
  if (sol.status == LpStatus::kInfeasible) throw Infeasible("bandit attack LP is infeasible");
  if (sol.status == LpStatus::kUnbounded) throw NumericalFailure("bandit attack LP reported unbounded");

  OfflineDataset ds = inst.dataset;
  ds.bound = inst.bound;
  AttackResult res;
  res.mode = confidence ? "bandit-ci" : "bandit-mle";
  res.encoding = confidence && opt.encoding == CiEncoding::kSlackSystem ? "slack-system" : "separation";
  res.status = sol.status;
  res.lp_objective = sol.objective_value;
  res.lp_variables = built.model.num_variables();
  res.lp_constraints = built.model.num_constraints();
  res.poisoned = detail::recover_poisoned(ds, built.vars, sol, built.mle);
  res.poisoned_mle = mle_game(res.poisoned).rewards;
  res.cost = l1_distance(ds, res.poisoned);
  if (std::abs(res.cost - sol.objective_value) > 1e-6 * std::max(1.0, res.cost)) {
    throw NumericalFailure("recovered cost disagrees with the LP objective");
  }

  const GameShape& g = ds.shape;
  const double b = inst.bound;
  for (int i = 0; i < g.n_players(); ++i) {
    const int ti = g.action_of(inst.target, i);
    for (int a = 0; a < g.num_joint(); ++a) {
      if (g.action_of(a, i) == ti) continue;
      const int t = g.with_action(a, i, ti);
      double lo = res.poisoned_mle(i, 0, 0, t), hi = res.poisoned_mle(i, 0, 0, a);
      if (confidence) {
        lo = std::max(-b, lo - inst.widths.rho_r(0, 0, t));
        hi = std::min(b, hi + inst.widths.rho_r(0, 0, a));
      }
      res.margins.push_back({i, 0, 0, a, lo - hi});
      res.min_margin = std::min(res.min_margin, lo - hi);
    }
  }
  if (res.encoding == "separation" && res.min_margin < inst.iota - 1e-6) {
    throw NumericalFailure("separation certificate failed on the recovered rewards");
  }
  return res;
}

BanditAttackInstance marginal_instance(const BanditAttackInstance& inst, int player) {
  const GameShape& g = inst.dataset.shape;
  const int A = g.actions(player);
  BanditAttackInstance out;
  out.dataset.shape = GameShape(1, 1, {A}, 1);
  out.dataset.bound = inst.bound;
  for (const auto& ep : inst.dataset.episodes) {
    Episode e;
    e.steps.push_back({0, g.action_of(ep.steps[0].joint, player), {ep.steps[0].r[player]}});
    out.dataset.episodes.push_back(std::move(e));
  }
  out.target = g.action_of(inst.target, player);
  out.iota = inst.iota;
  out.bound = inst.bound;
  const VisitCounts counts = visit_counts(out.dataset);
  const WidthParams& p = inst.widths.params;
  if (p.mode == WidthMode::kExplicit) {
    out.widths.params = p;
    out.widths.rho_r = CellArray<double>(1, 1, A, 0.0);
    out.widths.rho_p = CellArray<double>(0, 1, A, 0.0);
    for (int a = 0; a < g.num_joint(); ++a) {
      double& w = out.widths.rho_r(0, 0, g.action_of(a, player));
      w = std::max(w, inst.widths.rho_r(0, 0, a));
    }
  } else {
    out.widths = compute_widths(p, counts, out.dataset.shape, inst.bound);
  }
  return out;
}

double single_agent_reduction_cost(const BanditAttackInstance& inst) {
  inst.validate();
  double total = 0.0;
  for (int i = 0; i < inst.dataset.shape.n_players(); ++i) {
    total += solve_bandit_attack(marginal_instance(inst, i), BanditLearner::kConfidenceBound).cost;
  }
  return total;
}

}  // namespace mgpoison
