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

#ifndef MGPOISON_MARKOV_ATTACK_HPP_
#define MGPOISON_MARKOV_ATTACK_HPP_

#include <cstdint>
#include <functional>
#include <string>

#include "mgpoison/attack.hpp"
#include "mgpoison/io.hpp"

namespace mgpoison {

struct MarkovAttackInstance {
  OfflineDataset dataset;
  JointPolicy target;
  ConfidenceWidths widths;
  double iota = 0.0;
  double bound = kInf;

  void validate() const;
};

MarkovAttackInstance make_markov_instance(OfflineDataset dataset, JointPolicy target,
                                          const WidthParams& widths, double iota);

enum class UpperRewardTerm {
  // Upper reward R + rho in every cell (transition duals as written, no clipping).
  kUnclipped,
  // Joint-target cells use the constant b, a valid upper bound on a clipped reward.
  kClipTarget,
};

const char* to_string(UpperRewardTerm t);

struct MarkovLpOptions {
  Granularity granularity = Granularity::kCell;
  UpperRewardTerm upper = UpperRewardTerm::kUnclipped;
};

LpModel build_markov_attack_lp(const MarkovAttackInstance& inst, const MarkovLpOptions& opt = {});

struct LpTally {
  int variables = 0;
  int constraints = 0;
};
// Closed-form size of build_markov_attack_lp.
LpTally markov_lp_tally(const GameShape& shape, int n_episodes, Granularity g);

struct FeasibilityCheck {
  bool holds = true;
  // First violating cell, when !holds.
  CellIndex cell;
  double threshold = 0.0;  // 2b - (H+1) rho at that cell
};

// iota <= 2b - (H+1) rho_h(s,a) everywhere.
FeasibilityCheck markov_feasibility_condition(const MarkovAttackInstance& inst);

struct RequiredCount {
  long long count = 0;
  double exact = 0.0;  // real-valued threshold
  bool overflow = false;
};

// Smallest N with reward_const*b*sqrt(log(H|S||A|/delta)/N) <= (2b - iota)/(H+1).
// Throws InvalidMargin if iota >= 2b, InvalidDelta for delta outside (0,1).
RequiredCount required_counts(const GameShape& shape, double bound, double iota, double delta,
                              double reward_const = 2.0);
// Same for any decreasing width function f(N), given its inverse.
RequiredCount required_counts_generic(const std::function<double(double)>& f_inverse,
                                      double bound, double iota, int horizon);

enum class EncodingChoice { kUnclipped, kClipTarget, kBest };

struct MarkovSolveOptions {
  Granularity granularity = Granularity::kCell;
  EncodingChoice encoding = EncodingChoice::kBest;
};

// Throws Infeasible or NumericalFailure.
AttackResult solve_markov_attack(const MarkovAttackInstance& inst, const MarkovSolveOptions& opt = {});

// Clipped-reward, exact-L1 recursion of the lower / upper Q under the target.
QBounds exact_confidence_bounds(const GameShape& shape, const RewardTable& center,
                                const TransitionTable& p_hat, const ConfidenceWidths& widths,
                                double bound, const JointPolicy& target, bool clip = true);

struct VerificationReport {
  int samples = 0;
  int passes = 0;
  double worst_margin = kInf;
  bool uniqueness_checked = false;
  bool unique = true;
  int other_equilibria = 0;
  bool sandwich_ok = true;
  double worst_sandwich = 0.0;  // largest escape beyond the LP/exact bounds
  bool dual_sound = true;
  double worst_dual = 0.0;      // largest weak-duality violation
  std::uint64_t seed = 0;
  bool ok() const { return passes == samples && unique && sandwich_ok && dual_sound; }
  Json failing_game;  // null when nothing failed
};

struct VerifyOptions {
  int samples = 500;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: MGPOISON_THREADS or hardware concurrency
  bool clip_rewards = true;
  double tol = 1e-6;
};

// Samples from the post-attack confidence set and checks the target is the
// iota-MPDSE in each sample. Throws VerificationFailure when any check fails.
VerificationReport verify_attack(const MarkovAttackInstance& inst, const AttackResult& result,
                                 const VerifyOptions& opt = {});
// Same checks, report only.
VerificationReport run_verification(const MarkovAttackInstance& inst, const AttackResult& result,
                                    const VerifyOptions& opt = {});

// Checks a dataset that is already poisoned (no LP certificate to audit).
VerificationReport verify_poisoned_dataset(const MarkovAttackInstance& inst,
                                           const VerifyOptions& opt = {});

// Worker threads: MGPOISON_THREADS when set (>= 1), else hardware concurrency.
int default_thread_count();

}  // namespace mgpoison

#endif  // MGPOISON_MARKOV_ATTACK_HPP_
