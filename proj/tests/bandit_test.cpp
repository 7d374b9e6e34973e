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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mgpoison/cost_analysis.hpp"
#include "test_util.hpp"

namespace mgpoison {
namespace {

WidthParams constant(double rho) {
  WidthParams p;
  p.mode = WidthMode::kConstant;
  p.rho_r = rho;
  return p;
}

BanditAttackInstance random_instance(Rng& rng, double* rho_out = nullptr) {
  const int n = 1 + rng.below(3);
  std::vector<int> acts(n);
  for (int& a : acts) a = 1 + rng.below(3);
  const GameShape g(n, 1, acts, 1);
  const int extra = rng.below(std::max(1, 61 - g.num_joint()));
  OfflineDataset ds = testing::random_dataset(g, extra, 1.0, rng);
  const double rho = rng.uniform(0, 0.2);
  if (rho_out) *rho_out = rho;
  return make_bandit_instance(ds, rng.below(g.num_joint()), constant(rho), rng.uniform(0, 0.5));
}

// Independent check on the poisoned MLE: the lower clipped bound of the target
// beats the upper clipped bound of every unilateral deviation by iota.
double ci_separation(const BanditAttackInstance& inst, const RewardTable& r) {
  const GameShape& g = inst.dataset.shape;
  const double b = inst.bound;
  double worst = kInf;
  for (int i = 0; i < g.n_players(); ++i) {
    const int own = g.action_of(inst.target, i);
    for (int ai = 0; ai < g.actions(i); ++ai) {
      if (ai == own) continue;
      for (int o = 0; o < g.num_others(i); ++o) {
        const int t = g.compose(i, own, o), d = g.compose(i, ai, o);
        const double lo = std::max(r(i, 0, 0, t) - inst.widths.rho_r(0, 0, t), -b);
        const double hi = std::min(r(i, 0, 0, d) + inst.widths.rho_r(0, 0, d), b);
        worst = std::min(worst, lo - hi - inst.iota);
      }
    }
  }
  return worst;
}

TEST(Bandit, DominantExampleNeedsNoModification) {
  const BanditAttackInstance inst = make_bandit_instance(testing::dominant_example_dataset(), 0, constant(0.1), 0.5);
  for (auto learner : {BanditLearner::kMle, BanditLearner::kConfidenceBound}) {
    const AttackResult r = solve_bandit_attack(inst, learner);
    EXPECT_EQ(r.cost, 0.0);
    EXPECT_EQ(l1_distance(inst.dataset, r.poisoned), 0.0);
  }
}

TEST(Bandit, DominantExampleSkewedMarginalsCostSomething) {
  const BanditAttackInstance skew =
      make_bandit_instance(testing::dominant_example_dataset({1, 10, 10, 1}), 0, constant(0.1), 0.5);
  EXPECT_EQ(solve_bandit_attack(skew, BanditLearner::kConfidenceBound).cost, 0.0);
  EXPECT_GT(single_agent_reduction_cost(skew), 0.5);
  // Player 0's marginal means: action 0 at 13/11, action 1 at 20/11.
  const BanditAttackInstance m0 = marginal_instance(skew, 0);
  EXPECT_EQ(m0.dataset.n_episodes(), 22);
  EXPECT_NEAR(mle_game(m0.dataset).rewards(0, 0, 0, 1), 20.0 / 11, 1e-12);
}

TEST(Bandit, WorstCaseCostIs27) {
  const MarkovAttackInstance w = worst_case_instance(2, 2, 1, 1, 3, 1.0, 0.1, 0.05);
  BanditAttackInstance inst{w.dataset, w.target(0, 0), w.widths, w.iota, w.bound};
  for (auto gran : {Granularity::kEpisode, Granularity::kCell}) {
    const AttackResult r = solve_bandit_attack(inst, BanditLearner::kConfidenceBound, {gran});
    EXPECT_NEAR(r.cost, 3 * 2 * 2 * 2.25, 1e-6);
    EXPECT_NEAR(l1_distance(inst.dataset, r.poisoned), r.cost, 1e-9);
    EXPECT_GE(r.min_margin, w.iota - 1e-7);
  }
}

TEST(Bandit, IotaAboveThresholdIsInfeasible) {
  const BanditAttackInstance ok = make_bandit_instance(testing::dominant_example_dataset(), 0, constant(0.25), 5.5 + 1e-6);
  EXPECT_FALSE(bandit_feasibility(ok));
  EXPECT_THROW(solve_bandit_attack(ok, BanditLearner::kConfidenceBound), Infeasible);
  const BanditAttackInstance edge = make_bandit_instance(testing::dominant_example_dataset(), 3, constant(0.25), 5.5);
  EXPECT_TRUE(bandit_feasibility(edge));
  EXPECT_NO_THROW(solve_bandit_attack(edge, BanditLearner::kConfidenceBound));
  EXPECT_THROW(make_bandit_instance(testing::dominant_example_dataset(), 0, constant(0.1), -0.1), InvalidMargin);
}

TEST(Bandit, ZeroWidthLearnersAgree) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    BanditAttackInstance inst = random_instance(rng);
    inst.widths = constant_widths(inst.dataset.shape, 0.0, 0.0);
    const double a = solve_bandit_attack(inst, BanditLearner::kMle).cost;
    const double b = solve_bandit_attack(inst, BanditLearner::kConfidenceBound).cost;
    EXPECT_NEAR(a, b, 1e-7);
  }
}

TEST(Bandit, CostGrowsWithIota) {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    BanditAttackInstance inst = random_instance(rng);
    double prev = -1.0;
    for (double iota : {0.0, 0.1, 0.3, 0.8, 1.2}) {
      inst.iota = iota;
      const double c = solve_bandit_attack(inst, BanditLearner::kConfidenceBound).cost;
      EXPECT_GE(c, prev - 1e-7);
      prev = c;
    }
  }
}

TEST(Bandit, PoisonedMleSeparatesTheTarget) {
  Rng rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const BanditAttackInstance inst = random_instance(rng);
    const AttackResult r = solve_bandit_attack(inst, BanditLearner::kConfidenceBound);
    const RewardTable mle = mle_game(r.poisoned).rewards;
    EXPECT_GE(ci_separation(inst, mle), -1e-7);
    EXPECT_NEAR(l1_distance(inst.dataset, r.poisoned), r.cost, 1e-7);
    for (const auto& ep : r.poisoned.episodes)
      for (double x : ep.steps[0].r) EXPECT_LE(std::abs(x), inst.bound + 1e-12);
    const AttackResult m = solve_bandit_attack(inst, BanditLearner::kMle);
    EXPECT_TRUE(is_iota_mpdse(mle_as_game(m.poisoned), JointPolicy(1, 1, inst.target), inst.iota, 1e-7).holds);
    EXPECT_LE(m.cost, r.cost + 1e-7);
  }
}

TEST(Bandit, GranularitiesAgree) {
  Rng rng(34);
  for (int trial = 0; trial < 40; ++trial) {
    const BanditAttackInstance inst = random_instance(rng);
    const double e = solve_bandit_attack(inst, BanditLearner::kConfidenceBound, {Granularity::kEpisode}).cost;
    const double c = solve_bandit_attack(inst, BanditLearner::kConfidenceBound, {Granularity::kCell}).cost;
    EXPECT_NEAR(e, c, 1e-6 * std::max(1.0, e));
  }
}

TEST(Bandit, CostIsSandwichedByVisitCounts) {
  Rng rng(35);
  for (int trial = 0; trial < 100; ++trial) {
    const BanditAttackInstance inst = random_instance(rng);
    const VisitCounts vc = visit_counts(inst.dataset);
    const double d = delta_h(period_instance(inst)).delta;
    const double c = solve_bandit_attack(inst, BanditLearner::kConfidenceBound).cost;
    EXPECT_GE(c, vc.min * d - 1e-6);
    EXPECT_LE(c, vc.max * d + 1e-6);
  }
}

TEST(Bandit, LpSizesFollowGranularity) {
  Rng rng(36);
  const BanditAttackInstance inst = random_instance(rng);
  const LpModel ep = build_ci_attack_lp(inst, {Granularity::kEpisode});
  const LpModel cell = build_ci_attack_lp(inst, {Granularity::kCell});
  EXPECT_GE(ep.num_variables(), cell.num_variables());
}

}  // namespace
}  // namespace mgpoison
