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

#ifndef MGPOISON_ATTACK_HPP_
#define MGPOISON_ATTACK_HPP_

#include <string>
#include <vector>

#include "mgpoison/confidence.hpp"
#include "mgpoison/game.hpp"
#include "mgpoison/lp.hpp"

namespace mgpoison {

// How the poisoned rewards enter the LP.
enum class Granularity {
  kEpisode,  // one deviation pair per episode, step and player
  kCell,     // one deviation pair per (player, h, s, a), scaled by N_h(s,a)
};

struct QBounds {
  PlayerTable q_lower;
  PlayerTable q_upper;
};

struct SeparationMargin {
  int player = 0, h = 0, s = 0;
  int deviation = 0;  // joint action with the deviating own action
  // lower(target own action) - upper(deviation); must be >= iota.
  double margin = 0.0;
};

struct ClipBinding {
  int player = 0, h = 0, s = 0, joint = 0;
  bool upper = false;  // R + rho > b (else R - rho < -b)
};

struct AttackResult {
  std::string mode;
  LpStatus status = LpStatus::kOptimal;
  OfflineDataset poisoned;
  RewardTable poisoned_mle;
  double cost = 0.0;
  double lp_objective = 0.0;
  int lp_variables = 0;
  int lp_constraints = 0;
  std::vector<SeparationMargin> margins;
  double min_margin = kInf;

  // Markov-only certificate data.
  std::string encoding;
  bool has_lp_bounds = false;
  QBounds lp_bounds;     // Q-lower / Q-upper variables of the LP
  QBounds exact_bounds;  // clipped rewards, exact L1-ball recursion
  // Inner bounds implied by the dual triples, h < H-1; used for soundness checks.
  PlayerTable lp_inner_lower;
  PlayerTable lp_inner_upper;
  std::vector<ClipBinding> clip_bindings;
};

// sum |r0 - r'| over every reward entry. Datasets must align.
double l1_distance(const OfflineDataset& a, const OfflineDataset& b);

}  // namespace mgpoison

#endif  // MGPOISON_ATTACK_HPP_
