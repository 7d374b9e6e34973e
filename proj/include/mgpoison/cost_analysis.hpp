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

#ifndef MGPOISON_COST_ANALYSIS_HPP_
#define MGPOISON_COST_ANALYSIS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgpoison/bandit_attack.hpp"
#include "mgpoison/markov_attack.hpp"

namespace mgpoison {

// One period of an attack instance; tables use period index 0.
struct PeriodInstance {
  GameShape shape;  // horizon 1
  int period = 0;
  RewardTable mle;             // (i, 0, s, a)
  CellArray<int> counts;       // (0, s, a)
  CellArray<double> rho_r;     // (0, s, a)
  std::vector<int> target;     // joint target per state
  double iota = 0.0;
  double bound = kInf;
};

PeriodInstance period_instance(const MarkovAttackInstance& inst, int h);
PeriodInstance period_instance(const BanditAttackInstance& inst);

// Values per (player, state, opponents' profile).
class SliceTable {
 public:
  SliceTable() = default;
  explicit SliceTable(const GameShape& shape);
  double& operator()(int i, int s, int others) { return data_[offset_[i] + s * stride_[i] + others]; }
  double operator()(int i, int s, int others) const { return data_[offset_[i] + s * stride_[i] + others]; }
  double sum() const;
  const std::vector<double>& data() const { return data_; }

 private:
  std::vector<int> offset_, stride_;
  std::vector<double> data_;
};

// eps(a_i, a_-i) = rho(a_i, a_-i) + rho(target_i, a_-i) + iota.
double separation_slack(const PeriodInstance& p, int s, int player, int joint);

// [max_{a_i != target}(R(a_i,a_-i) - R(target,a_-i) + eps)]_+ . Same value as
// max_{a_i} [..]_+ since the clamp commutes with the max.
SliceTable dominance_gaps(const PeriodInstance& p);
// sum over non-target a_i with R > b - eps of (R - b + eps).
SliceTable overflow_terms(const PeriodInstance& p);

struct DeltaSummary {
  double gap_total = 0.0;
  double overflow_total = 0.0;
  // Double count when the target is capped at b: (R_target + d - b)_+ .
  double overlap_total = 0.0;
  // Exact minimal MLE-space cost: gaps + overflow - overlap.
  double delta = 0.0;
  double raw_delta() const { return gap_total + overflow_total; }
};

DeltaSummary delta_h(const PeriodInstance& p);

struct AtkOutput {
  RewardTable rewards;  // (i, 0, s, a)
  double cost = 0.0;    // L1 distance in MLE space
};

// Closed-form minimal MLE change. Throws Infeasible when iota > 2b - 2 rho.
AtkOutput atk_mechanism(const PeriodInstance& p);

// Common shift with clipping to [-b, b] so the mean becomes `target`.
void lift_cell(std::vector<double>& values, double target, double bound);

// Replaces period-h rewards so each cell's mean equals target(i, 0, s, a).
OfflineDataset lift_mle_to_rewards(const OfflineDataset& dataset, int h, const RewardTable& target);
// All periods at once; target is a full (i, h, s, a) table.
OfflineDataset lift_all_periods(const OfflineDataset& dataset, const RewardTable& target);

struct PeriodBounds {
  int period = 0;
  int n_min = 0, n_max = 0;
  DeltaSummary delta;
  double lower = 0.0;  // n_min * delta
  double upper = 0.0;  // n_max * delta
  double optimum = 0.0;  // C*(I_h)
};

struct CostBoundsReport {
  double universal_lower = 0.0;
  double universal_upper = 0.0;
  double decomposition_lower = 0.0;  // C*(I_H)
  std::optional<double> decomposition_upper;
  std::string decomposition_note;
  std::optional<double> uniform_lower;  // sum_h C*(I_h)
  std::optional<double> worst_case_lower;
  std::vector<PeriodBounds> periods;
  std::optional<double> optimum;  // C*(I) when supplied or solved
};

// Minimal cost of the period-h restriction (LP, cell granularity).
double period_optimum(const MarkovAttackInstance& inst, int h);

// period_optima: C*(I_h) per period; solved when absent.
CostBoundsReport cost_bounds(const MarkovAttackInstance& inst,
                             const std::optional<std::vector<double>>& period_optima = std::nullopt,
                             std::optional<double> full_optimum = std::nullopt);

Json cost_bounds_json(const CostBoundsReport& r);

// Target gets -b, everything else +b; each (h, s, a) visited exactly N times.
// Next states cycle, so transitions are exactly uniform when n_states divides N.
MarkovAttackInstance worst_case_instance(int n, int actions, int n_states, int horizon, int visits,
                                         double bound, double rho, double iota);

// Matches the worst-case reward / width pattern (used to emit its bound).
bool is_worst_case_pattern(const MarkovAttackInstance& inst, double* rho = nullptr);

// N n A^{n-1} (2b + (A-1)(2 rho + iota)) per state and period.
double worst_case_cost(int n, int actions, int n_states, int horizon, int visits, double bound,
                       double rho, double iota);

struct GapEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
};

// Monte-Carlo mean of sum_{i, a_-i} d^0 on uniform[-b, b] payoffs, target 0.
GapEstimate random_game_gap_estimate(int n, int actions, double bound, int samples, std::uint64_t seed);

}  // namespace mgpoison

#endif  // MGPOISON_COST_ANALYSIS_HPP_
