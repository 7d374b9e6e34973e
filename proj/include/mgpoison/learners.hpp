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

#ifndef MGPOISON_LEARNERS_HPP_
#define MGPOISON_LEARNERS_HPP_

#include <string>
#include <vector>

#include "mgpoison/confidence.hpp"
#include "mgpoison/game.hpp"
#include "mgpoison/io.hpp"

namespace mgpoison {

// Positive bonus = pessimism, negative = optimism.
enum class BonusKind { kPessimistic, kOptimistic, kZero, kCustom };

const char* to_string(BonusKind k);
BonusKind bonus_kind_from_string(const std::string& s);

struct BonusSpec {
  BonusKind kind = BonusKind::kPessimistic;
  double delta = 0.1;
  double beta_c = 1.0;
  RewardTable custom;  // used by kCustom, layout (i, h, s, a)
};

// Gamma(i,h,s,a) = +-H sqrt(beta / (N + 1)), beta = c log(|S||A| H N_total / delta).
// Throws InvalidDelta unless 0 < delta < 1.
RewardTable bonus_gamma(const VisitCounts& counts, const GameShape& shape, BonusKind kind,
                        double delta, double beta_c = 1.0);

enum class NeStatus { kStrictDse, kPureNe, kNoneFound };
const char* to_string(NeStatus s);

struct NeResult {
  int joint = -1;
  NeStatus status = NeStatus::kNoneFound;
  std::vector<int> pure_equilibria;  // all pure NE, ascending
};

// q[i][joint]: payoff matrices of one (h, s). A strict DSE wins; otherwise
// the lexicographically first pure NE; otherwise none.
NeResult ne_oracle(const GameShape& shape, const std::vector<std::vector<double>>& q);

struct LearnerOutput {
  JointPolicy policy;
  PlayerTable q_lower;
  PlayerTable v_lower;  // (i, h, s, 0)
  CellArray<int> ne_status;  // NeStatus per (h, s, 0)
  RewardTable gamma;
};

// Throws NoEquilibrium when a state has no pure NE.
LearnerOutput povi(const OfflineDataset& dataset, const BonusSpec& bonus);

struct BonusCheck {
  bool holds = true;
  double worst_slack = kInf;
  // rho_r + inner max - |Gamma| per (i, h, s, a).
  PlayerTable slack;
};

// Inner max over zero-sum U with |U|_1 <= rho_p of <U, V> is
// rho_p / 2 * (max V - min V); zero at the last period.
BonusCheck check_bonus_within_widths(const RewardTable& gamma, const ConfidenceWidths& widths,
                                    const PlayerTable& v_lower);

struct WitnessReport {
  bool constructed = true;
  // Max |Q_lower - (R + <P, V_lower>)| over cells.
  double bellman_residual = 0.0;
  bool in_confidence_set = true;
  MarkovGame game;
};

// Game with R = R_hat - u and P = P_hat - U reproducing the learner's lower Q
// exactly. U is taken toward the L1-ball optimizer so P stays a distribution.
WitnessReport compatibility_witness(const OfflineDataset& dataset, const LearnerOutput& out,
                                    const ConfidenceWidths& widths);

Json learner_json(const LearnerOutput& out, const GameShape& shape);

}  // namespace mgpoison

#endif  // MGPOISON_LEARNERS_HPP_
