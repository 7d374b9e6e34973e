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

#include "mgpoison/cost_analysis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgpoison/bandit_attack.hpp"
#include "mgpoison/markov_attack.hpp"
#include "test_util.hpp"

namespace mgpoison {
namespace {

WidthParams constant(double rho_r, double rho_p = 0.0) {
  WidthParams p;
  p.mode = WidthMode::kConstant;
  p.rho_r = rho_r;
  p.rho_p = rho_p;
  return p;
}

// N = 1 per cell when extra == 0.
BanditAttackInstance random_bandit(Rng& rng, int extra) {
  const int n = 1 + rng.below(3);
  std::vector<int> acts(n);
  for (int& a : acts) a = 1 + rng.below(3);
  const GameShape g(n, 1, acts, 1);
  return make_bandit_instance(testing::random_dataset(g, extra, 1.0, rng), rng.below(g.num_joint()),
                              constant(rng.uniform(0, 0.2)), rng.uniform(0, 0.6));
}

// Smallest raise d of the target cell giving lower(target) >= upper(dev) + iota
// for every deviation, found by bisection rather than the closed form.
double gap_by_bisection(const PeriodInstance& p, int i, int o) {
  const GameShape& g = p.shape;
  const int ti = g.action_of(p.target[0], i);
  const int t = g.compose(i, ti, o);
  auto ok = [&](double d) {
    for (int ai = 0; ai < g.actions(i); ++ai) {
      if (ai == ti) continue;
      const int a = g.compose(i, ai, o);
      if (p.mle(i, 0, 0, t) + d - p.rho_r(0, 0, t) < p.mle(i, 0, 0, a) + p.rho_r(0, 0, a) + p.iota) return false;
    }
    return true;
  };
  if (ok(0.0)) return 0.0;
  double lo = 0.0, hi = 10.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

TEST(Gaps, MatchBisectionOracle) {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const PeriodInstance p = period_instance(random_bandit(rng, rng.below(10)));
    const SliceTable gaps = dominance_gaps(p);
    for (int i = 0; i < p.shape.n_players(); ++i)
      for (int o = 0; o < p.shape.num_others(i); ++o) EXPECT_NEAR(gaps(i, 0, o), gap_by_bisection(p, i, o), 1e-12);
  }
}

TEST(Gaps, OverflowExamples) {
  // One player, two actions, b = 1: the deviation at 0.9 must drop to
  // 1 - eps with eps = 2 rho + iota = 0.5, so its overflow is 0.4.
  OfflineDataset ds;
  ds.shape = GameShape(1, 1, {2}, 1);
  ds.bound = 1.0;
  ds.episodes = {{{Step{0, 0, {0.2}}}}, {{Step{0, 1, {0.9}}}}};
  const PeriodInstance p = period_instance(make_bandit_instance(ds, 0, constant(0.1), 0.3));
  EXPECT_NEAR(overflow_terms(p)(0, 0, 0), 0.4, 1e-12);
  EXPECT_NEAR(dominance_gaps(p)(0, 0, 0), 1.2, 1e-12);
  const DeltaSummary d = delta_h(p);
  // Target capped at 1 after raising 0.2 by 1.2: overlap 0.4.
  EXPECT_NEAR(d.overlap_total, 0.4, 1e-12);
  EXPECT_NEAR(d.raw_delta(), 1.6, 1e-12);
  EXPECT_NEAR(d.delta, 1.2, 1e-12);
  // Both cells hit their caps: target 0.2 -> 1, deviation 0.9 -> 0.5.
  EXPECT_NEAR(atk_mechanism(p).cost, 1.2, 1e-12);

  // Overflow shrinks linearly and vanishes at b - eps.
  ds.episodes[1].steps[0].r[0] = 0.75;
  EXPECT_NEAR(overflow_terms(period_instance(make_bandit_instance(ds, 0, constant(0.1), 0.3)))(0, 0, 0), 0.25,
              1e-12);
  ds.episodes[1].steps[0].r[0] = 0.5;
  EXPECT_EQ(overflow_terms(period_instance(make_bandit_instance(ds, 0, constant(0.1), 0.3)))(0, 0, 0), 0.0);
}

TEST(Atk, MatchesLpOnSingleVisitInstances) {
  Rng rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const BanditAttackInstance inst = random_bandit(rng, 0);
    const PeriodInstance p = period_instance(inst);
    const AtkOutput atk = atk_mechanism(p);
    const double lp = solve_bandit_attack(inst, BanditLearner::kConfidenceBound).cost;
    EXPECT_NEAR(atk.cost, lp, 1e-6);
    EXPECT_NEAR(atk.cost, delta_h(p).delta, 1e-9);
    for (double r : atk.rewards.data()) EXPECT_LE(std::abs(r), 1.0 + 1e-12);
  }
}

TEST(Atk, WorstCaseTablePattern) {
  const MarkovAttackInstance w = worst_case_instance(2, 2, 1, 1, 3, 1.0, 0.1, 0.05);
  const PeriodInstance p = period_instance(w, 0);
  const AtkOutput atk = atk_mechanism(p);
  // Each player's own target action pays b; the other action pays b - 2 rho - iota.
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 4; ++a) {
      const double want = p.shape.action_of(a, i) == 0 ? 1.0 : 0.75;
      EXPECT_DOUBLE_EQ(atk.rewards(i, 0, 0, a), want) << i << " " << a;
    }
  EXPECT_NEAR(atk.cost, 9.0, 1e-12);
  const DeltaSummary d = delta_h(p);
  EXPECT_NEAR(d.delta, 9.0, 1e-12);
  EXPECT_NEAR(d.raw_delta(), 10.0, 1e-12);
  const OfflineDataset lifted = lift_mle_to_rewards(w.dataset, 0, atk.rewards);
  EXPECT_NEAR(l1_distance(w.dataset, lifted), 27.0, 1e-9);
}

TEST(Atk, RejectsOversizedSlack) {
  const PeriodInstance p =
      period_instance(make_bandit_instance(testing::dominant_example_dataset(), 0, constant(0.5), 5.0 + 1e-3));
  EXPECT_THROW(atk_mechanism(p), Infeasible);
}

TEST(Lift, HitsTargetMeanWithinBounds) {
  Rng rng(63);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + rng.below(8));
    for (double& x : v) x = rng.uniform(-1, 1);
    const std::vector<double> before = v;
    const double target = rng.uniform(-1, 1);
    lift_cell(v, target, 1.0);
    EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0) / v.size(), target, 1e-12);
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_LE(std::abs(v[k]), 1.0);
      // Every entry moves in the same direction.
      EXPECT_GE((v[k] - before[k]) * (target - std::accumulate(before.begin(), before.end(), 0.0) / v.size()),
                -1e-15);
    }
  }
  std::vector<double> open = {5, -3};
  lift_cell(open, 0.5, kInf);
  EXPECT_DOUBLE_EQ(open[0], 4.5);
  EXPECT_DOUBLE_EQ(open[1], -3.5);
  std::vector<double> capped = {0.2, -0.4};
  lift_cell(capped, 1.0, 1.0);
  EXPECT_EQ(capped, (std::vector<double>{1.0, 1.0}));
}

TEST(Lift, MleMatchesTargetExactly) {
  Rng rng(64);
  const GameShape g(2, 2, {2, 2}, 3);
  const OfflineDataset ds = testing::random_dataset(g, 30, 1.0, rng);
  RewardTable target(g);
  for (double& x : target.data()) x = rng.uniform(-1, 1);
  const OfflineDataset lifted = lift_all_periods(ds, target);
  const MleEstimate est = mle_game(lifted);
  for (std::size_t k = 0; k < target.data().size(); ++k) EXPECT_NEAR(est.rewards.data()[k], target.data()[k], 1e-12);
  // Shifting never beats the mean change times the count.
  const MleEstimate before = mle_game(ds);
  const VisitCounts vc = visit_counts(ds);
  double floor = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 4; ++a)
          floor += vc.counts(h, s, a) * std::abs(target(i, h, s, a) - before.rewards(i, h, s, a));
  EXPECT_GE(l1_distance(ds, lifted), floor - 1e-9);
}

TEST(WorstCase, TransitionsUniformWhenStatesDivideVisits) {
  for (int S : {1, 2, 3})
    for (int N : {1, 2, 3, 4, 6}) {
      const MarkovAttackInstance w = worst_case_instance(2, 2, S, 2, N, 1.0, 0.1, 0.05);
      const VisitCounts vc = visit_counts(w.dataset);
      EXPECT_EQ(vc.min, N);
      EXPECT_EQ(vc.max, N);
      const MleEstimate est = mle_game(w.dataset);
      bool uniform = true;
      for (double p : est.transitions.data()) uniform = uniform && std::abs(p - 1.0 / S) < 1e-12;
      EXPECT_EQ(uniform, N % S == 0) << "S=" << S << " N=" << N;
      EXPECT_TRUE(is_worst_case_pattern(w));
    }
  EXPECT_THROW(worst_case_instance(2, 2, 1, 1, 1, 1.0, 0.1, 1.0), InvalidMargin);
}

TEST(Bounds, WorstCaseFields) {
  const MarkovAttackInstance w = worst_case_instance(2, 2, 2, 2, 2, 1.0, 0.1, 0.05);
  const CostBoundsReport r = cost_bounds(w);
  ASSERT_TRUE(r.worst_case_lower.has_value());
  EXPECT_NEAR(*r.worst_case_lower, 2 * 2 * 2 * 2 * 2 * 2.25, 1e-9);
  ASSERT_TRUE(r.uniform_lower.has_value());
  EXPECT_NEAR(*r.uniform_lower, 72.0, 1e-6);
  ASSERT_TRUE(r.decomposition_upper.has_value());
  // 72 + 2 b n H |S| N + H^2 rho |S| n A^n N.
  EXPECT_NEAR(*r.decomposition_upper, 72 + 2 * 2 * 2 * 2 * 2 + 4 * 0.1 * 2 * 2 * 4 * 2, 1e-6);
  EXPECT_NEAR(r.universal_upper, 2 * 2 * 2 * 2 * 4 * 2, 1e-12);
  const Json j = cost_bounds_json(r);
  EXPECT_TRUE(j.contains("worst_case_lower"));
}

TEST(Bounds, DecompositionBracketsOptimum) {
  for (int S : {1, 2})
    for (int H : {1, 2, 3}) {
      const MarkovAttackInstance w = worst_case_instance(2, 2, S, H, 2 * S, 1.0, 0.1, 0.05);
      const double opt = solve_markov_attack(w).cost;
      const CostBoundsReport r = cost_bounds(w, std::nullopt, opt);
      ASSERT_TRUE(r.uniform_lower && r.decomposition_upper);
      double sum = 0.0;
      for (int h = 0; h < H; ++h) sum += period_optimum(w, h);
      EXPECT_NEAR(*r.uniform_lower, sum, 1e-6);
      EXPECT_LE(sum, opt * (1 + 1e-5));
      EXPECT_LE(opt, *r.decomposition_upper * (1 + 1e-5));
      EXPECT_LE(r.decomposition_lower, opt * (1 + 1e-5));
    }
}

TEST(Bounds, InfiniteBoundSkipsUpperDecomposition) {
  Rng rng(65);
  OfflineDataset ds = testing::random_dataset(GameShape(2, 1, {2, 2}, 2), 5, 1.0, rng);
  ds.bound = kInf;
  const MarkovAttackInstance m = make_markov_instance(ds, JointPolicy(2, 1, 0), constant(0.05, 0.0), 0.1);
  const CostBoundsReport r = cost_bounds(m);
  EXPECT_FALSE(r.decomposition_upper.has_value());
  EXPECT_FALSE(r.decomposition_note.empty());
}

TEST(GapEstimate, MatchesAnalyticMean) {
  // Four slices, each E[(U - V)_+] = 1/3 for U, V uniform on [-1, 1].
  const GapEstimate e = random_game_gap_estimate(2, 2, 1.0, 10000, 7);
  EXPECT_EQ(e.samples, 10000);
  EXPECT_NEAR(e.mean, 4.0 / 3.0, 4 * e.stderr_);
  EXPECT_GE(e.mean, 4.0 / 6.0 - 3 * e.stderr_);
  EXPECT_EQ(random_game_gap_estimate(2, 2, 0.0, 10, 7).mean, 0.0);
}

}  // namespace
}  // namespace mgpoison
