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

#ifndef MGPOISON_BANDIT_ATTACK_HPP_
#define MGPOISON_BANDIT_ATTACK_HPP_

#include "mgpoison/attack.hpp"

namespace mgpoison {

// One-state, one-period instance.
struct BanditAttackInstance {
  OfflineDataset dataset;
  int target = 0;  // joint action index
  ConfidenceWidths widths;
  double iota = 0.0;
  double bound = kInf;

  // Throws InvalidArgument / UncoveredCell / InvalidMargin.
  void validate() const;
};

BanditAttackInstance make_bandit_instance(OfflineDataset dataset, int target,
                                          const WidthParams& widths, double iota);

enum class BanditLearner { kMle, kConfidenceBound };

enum class CiEncoding {
  // R(target) - R(dev) >= rho(target) + rho(dev) + iota, exact for iota > 0.
  kSeparation,
  // Literal four-slack system for the clipped max/min. Its slacks are
  // unbounded and free of cost, so it admits every R; kept for inspection.
  kSlackSystem,
};

struct BanditLpOptions {
  Granularity granularity = Granularity::kEpisode;
  CiEncoding encoding = CiEncoding::kSeparation;
};

LpModel build_mle_attack_lp(const BanditAttackInstance& inst, const BanditLpOptions& opt = {});
LpModel build_ci_attack_lp(const BanditAttackInstance& inst, const BanditLpOptions& opt = {});

// iota <= 2b - 2 rho(a) for every a.
bool bandit_feasibility(const BanditAttackInstance& inst);

// Throws Infeasible or NumericalFailure.
AttackResult solve_bandit_attack(const BanditAttackInstance& inst, BanditLearner learner,
                                 const BanditLpOptions& opt = {});

// Summed cost of attacking each learner on its own marginal (a_i, r_i) data.
double single_agent_reduction_cost(const BanditAttackInstance& inst);

// Marginal one-player dataset seen by `player`.
BanditAttackInstance marginal_instance(const BanditAttackInstance& inst, int player);

}  // namespace mgpoison

#endif  // MGPOISON_BANDIT_ATTACK_HPP_
