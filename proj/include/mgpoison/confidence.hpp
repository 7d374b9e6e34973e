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

#ifndef MGPOISON_CONFIDENCE_HPP_
#define MGPOISON_CONFIDENCE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mgpoison/game.hpp"
#include "mgpoison/rng.hpp"

namespace mgpoison {

enum class WidthMode {
  kConstant,   // rho_r, rho_p everywhere
  kHoeffding,  // reward_const * b * sqrt(log(H|S||A|/delta) / max(N,1))
  kBonusScale,     // H * sqrt(beta / (N+1)) for rewards
  kExplicit,   // caller-provided tables
};

const char* to_string(WidthMode mode);
WidthMode width_mode_from_string(const std::string& name);

struct WidthParams {
  WidthMode mode = WidthMode::kConstant;
  double rho_r = 0.0;
  double rho_p = 0.0;
  double delta = 0.0;
  double reward_const = 2.0;
  // beta = beta_c * log(|S||A| H N_total / delta)
  double beta_c = 1.0;
};

struct ConfidenceWidths {
  WidthParams params;
  CellArray<double> rho_r;  // H periods
  CellArray<double> rho_p;  // H-1 periods

  double max_rho_r() const;
  double min_rho_r() const;
};

double bonus_beta(const GameShape& shape, long long n_total, double delta, double beta_c);

ConfidenceWidths constant_widths(const GameShape& shape, double rho_r, double rho_p);
// Throws InvalidDelta unless 0 < delta < 1; InvalidArgument for infinite b.
ConfidenceWidths hoeffding_widths(const VisitCounts& counts, const GameShape& shape,
                                  double bound, double delta, double reward_const = 2.0,
                                  double beta_c = 1.0);
ConfidenceWidths bonus_scale_widths(const VisitCounts& counts, const GameShape& shape,
                               double delta, double beta_c = 1.0);
// Dispatches on params.mode; kExplicit is rejected here.
ConfidenceWidths compute_widths(const WidthParams& params, const VisitCounts& counts,
                                const GameShape& shape, double bound);

// Exact min / max of <p, v> over the L1 ball of radius rho around center,
// intersected with the simplex. Writes the optimizer when out != nullptr.
double l1_ball_min(const double* center, const double* v, int n, double rho,
                   double* out = nullptr);
double l1_ball_max(const double* center, const double* v, int n, double rho,
                   double* out = nullptr);

bool uniform_transition_in_ci(const double* p_hat, double rho_p, int n_states);

enum class SampleStrategy { kExtremeRewards, kRandomInterior, kL1VertexTransitions };

const char* to_string(SampleStrategy s);

struct PlausibleGameSampler {
  GameShape shape;
  RewardTable center_rewards;
  TransitionTable center_transitions;
  ConfidenceWidths widths;
  double bound = kInf;
  bool clip_rewards = true;
  std::uint64_t seed = 0;
};

struct MembershipResult {
  bool member = true;
  std::string reason;
};

MembershipResult confidence_set_membership(const PlausibleGameSampler& sampler,
                                           const MarkovGame& game, double tol = 1e-9);

// fixed_sign: 0 random endpoints, +1 upper endpoints, -1 lower endpoints.
// Throws EmptySet when a clipped reward interval is empty.
MarkovGame sample_plausible_game(const PlausibleGameSampler& sampler, SampleStrategy strategy,
                                 Rng& rng, int fixed_sign = 0);

}  // namespace mgpoison

#endif  // MGPOISON_CONFIDENCE_HPP_
