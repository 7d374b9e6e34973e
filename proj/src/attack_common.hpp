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

#ifndef MGPOISON_SRC_ATTACK_COMMON_HPP_
#define MGPOISON_SRC_ATTACK_COMMON_HPP_

#include <string>
#include <vector>

#include "mgpoison/attack.hpp"

namespace mgpoison::detail {

// R-dagger(i,h,s,a) = constant + sum(terms).
struct RewardExpr {
  std::vector<LpTerm> terms;
  double constant = 0.0;
};

struct RewardVars {
  Granularity granularity = Granularity::kEpisode;
  std::vector<RewardExpr> expr;  // PlayerTable layout
  // Deviation pairs: episode layout (k, h, i) or cell layout (i, h, s, a).
  std::vector<int> plus, minus;
  int cell_index(const GameShape& g, int i, int h, int s, int a) const {
    return ((i * g.horizon() + h) * g.n_states() + s) * g.num_joint() + a;
  }
};

// Adds r-dagger = r0 + p - q per episode (with free MLE variables and mean
// rows) or R-dagger = R_hat + p - q per cell, costed by visit counts.
RewardVars add_reward_variables(LpModel& model, const OfflineDataset& dataset,
                                const VisitCounts& counts, const RewardTable& mle,
                                Granularity granularity);

// Poisoned dataset from a solved model; cell mode lifts via a common shift.
OfflineDataset recover_poisoned(const OfflineDataset& dataset, const RewardVars& vars,
                                const LpSolution& sol, const RewardTable& mle);

std::vector<LpTerm> concat(std::vector<LpTerm> a, const std::vector<LpTerm>& b, double scale = 1.0);

std::string cell_name(const char* prefix, int i, int h, int s, int a);

}  // namespace mgpoison::detail

#endif  // MGPOISON_SRC_ATTACK_COMMON_HPP_
