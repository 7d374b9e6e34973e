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

#include "mgpoison/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mgpoison {

GameShape::GameShape(int n_players, int n_states, std::vector<int> actions, int horizon)
    : n_players_(n_players), n_states_(n_states), horizon_(horizon), actions_(std::move(actions)) {
  if (n_players_ < 1 || n_states_ < 1 || horizon_ < 1) {
    throw InvalidArgument("game shape counts must be positive");
  }
  if (static_cast<int>(actions_.size()) != n_players_) {
    throw InvalidArgument("need one action count per player");
  }
  strides_.assign(n_players_, 1);
  long long total = 1;
  for (int i = n_players_ - 1; i >= 0; --i) {
    if (actions_[i] < 1) throw InvalidArgument("action counts must be positive");
    strides_[i] = static_cast<int>(total);
    total *= actions_[i];
    if (total > (1LL << 24)) throw InvalidArgument("joint action space too large");
  }
  num_joint_ = static_cast<int>(total);
}

int GameShape::joint_index(const std::vector<int>& actions) const {
  if (static_cast<int>(actions.size()) != n_players_) {
    throw InvalidArgument("joint action has wrong arity");
  }
  int idx = 0;
  for (int i = 0; i < n_players_; ++i) {
    if (actions[i] < 0 || actions[i] >= actions_[i]) {
      throw InvalidArgument("action index out of range");
    }
    idx += actions[i] * strides_[i];
  }
  return idx;
}

std::vector<int> GameShape::decode(int joint) const {
  std::vector<int> out(n_players_);
  for (int i = 0; i < n_players_; ++i) out[i] = action_of(joint, i);
  return out;
}

int GameShape::others_index(int joint, int player) const {
  int idx = 0;
  for (int j = 0; j < n_players_; ++j) {
    if (j == player) continue;
    idx = idx * actions_[j] + action_of(joint, j);
  }
  return idx;
}

int GameShape::compose(int player, int action, int others) const {
  int joint = 0;
  for (int j = n_players_ - 1; j >= 0; --j) {
    if (j == player) {
      joint += action * strides_[j];
    } else {
      joint += (others % actions_[j]) * strides_[j];
      others /= actions_[j];
    }
  }
  return joint;
}

void MarkovGame::validate(double tol) const {
  const int H = shape.horizon(), S = shape.n_states(), A = shape.num_joint();
  if (rewards.n_players() != shape.n_players() || rewards.horizon() != H ||
      rewards.n_states() != S || rewards.n_joint() != A) {
    throw InvalidArgument("reward table shape mismatch");
  }
  if (transitions.n_periods() != H - 1 || (H > 1 && (transitions.n_states() != S ||
                                                     transitions.n_joint() != A))) {
    throw InvalidArgument("transition table shape mismatch");
  }
  for (double r : rewards.data()) {
    if (!std::isfinite(r) || r < -bound - tol || r > bound + tol) {
      throw InvalidArgument("reward outside [-b, b]");
    }
  }
  for (int h = 0; h + 1 < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double* p = transitions.row(h, s, a);
        double sum = 0.0;
        for (int t = 0; t < S; ++t) {
          if (p[t] < -tol) throw InvalidArgument("negative transition probability");
          sum += p[t];
        }
        if (std::abs(sum - 1.0) > tol) throw InvalidArgument("transition row does not sum to 1");
      }
  if (!initial.empty()) {
    if (static_cast<int>(initial.size()) != S) throw InvalidArgument("initial distribution size");
    double sum = 0.0;
    for (double p : initial) {
      if (p < -tol) throw InvalidArgument("negative initial probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) throw InvalidArgument("initial distribution does not sum to 1");
  }
}

void JointPolicy::validate(const GameShape& g) const {
  if (h_ != g.horizon() || s_ != g.n_states()) throw InvalidArgument("policy shape mismatch");
  for (int a : data_) {
    if (a < 0 || a >= g.num_joint()) throw InvalidArgument("policy joint action out of range");
  }
}

void OfflineDataset::validate() const {
  const int n = shape.n_players();
  if (!(bound > 0)) throw InvalidArgument("bound b must be positive");
  for (const auto& ep : episodes) {
    if (static_cast<int>(ep.steps.size()) != shape.horizon()) {
      throw InvalidArgument("episode length differs from H");
    }
    for (const auto& st : ep.steps) {
      if (st.s < 0 || st.s >= shape.n_states()) throw InvalidArgument("state out of range");
      if (st.joint < 0 || st.joint >= shape.num_joint()) {
        throw InvalidArgument("joint action out of range");
      }
      if (static_cast<int>(st.r.size()) != n) throw InvalidArgument("reward vector length differs from n");
      for (double r : st.r) {
        if (!std::isfinite(r) || r < -bound || r > bound) {
          throw InvalidArgument("reward outside [-b, b]");
        }
      }
    }
  }
}

VisitCounts visit_counts(const OfflineDataset& dataset) {
  const GameShape& g = dataset.shape;
  VisitCounts out;
  out.counts = CellArray<int>(g, 0);
  for (const auto& ep : dataset.episodes) {
    for (int h = 0; h < static_cast<int>(ep.steps.size()); ++h) {
      ++out.counts(h, ep.steps[h].s, ep.steps[h].joint);
      ++out.total;
    }
  }
  out.min_h.assign(g.horizon(), 0);
  out.max_h.assign(g.horizon(), 0);
  for (int h = 0; h < g.horizon(); ++h) {
    int lo = out.counts(h, 0, 0), hi = lo;
    for (int s = 0; s < g.n_states(); ++s)
      for (int a = 0; a < g.num_joint(); ++a) {
        lo = std::min(lo, out.counts(h, s, a));
        hi = std::max(hi, out.counts(h, s, a));
      }
    out.min_h[h] = lo;
    out.max_h[h] = hi;
  }
  out.min = *std::min_element(out.min_h.begin(), out.min_h.end());
  out.max = *std::max_element(out.max_h.begin(), out.max_h.end());
  return out;
}

CoverageReport check_full_coverage(const VisitCounts& counts) {
  CoverageReport rep;
  const auto& c = counts.counts;
  for (int h = 0; h < c.horizon(); ++h)
    for (int s = 0; s < c.n_states(); ++s)
      for (int a = 0; a < c.n_joint(); ++a)
        if (c(h, s, a) == 0) rep.uncovered.push_back({h, s, a});
  rep.satisfied = rep.uncovered.empty();
  return rep;
}

MleEstimate mle_game(const OfflineDataset& dataset) {
  const GameShape& g = dataset.shape;
  VisitCounts vc = visit_counts(dataset);
  CoverageReport cov = check_full_coverage(vc);
  if (!cov.satisfied) {
    const auto& c = cov.uncovered.front();
    throw UncoveredCell("uncovered cell (h=" + std::to_string(c.h) + ", s=" + std::to_string(c.s) +
                            ", a=" + std::to_string(c.joint) + ") and " +
                            std::to_string(cov.uncovered.size() - 1) + " more",
                        cov.uncovered);
  }
  MleEstimate out{RewardTable(g), TransitionTable(g)};
  const int H = g.horizon();
  for (const auto& ep : dataset.episodes) {
    for (int h = 0; h < H; ++h) {
      const Step& st = ep.steps[h];
      for (int i = 0; i < g.n_players(); ++i) out.rewards(i, h, st.s, st.joint) += st.r[i];
      if (h + 1 < H) out.transitions(h, st.s, st.joint, ep.steps[h + 1].s) += 1.0;
    }
  }
  for (int i = 0; i < g.n_players(); ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < g.n_states(); ++s)
        for (int a = 0; a < g.num_joint(); ++a) out.rewards(i, h, s, a) /= vc.counts(h, s, a);
  for (int h = 0; h + 1 < H; ++h)
    for (int s = 0; s < g.n_states(); ++s)
      for (int a = 0; a < g.num_joint(); ++a) {
        double* p = out.transitions.row(h, s, a);
        for (int t = 0; t < g.n_states(); ++t) p[t] /= vc.counts(h, s, a);
      }
  return out;
}

MarkovGame mle_as_game(const OfflineDataset& dataset) {
  MleEstimate est = mle_game(dataset);
  MarkovGame game;
  game.shape = dataset.shape;
  game.rewards = std::move(est.rewards);
  game.transitions = std::move(est.transitions);
  game.bound = dataset.bound;
  game.initial.assign(dataset.shape.n_states(), 0.0);
  for (const auto& ep : dataset.episodes) game.initial[ep.steps.front().s] += 1.0;
  for (double& p : game.initial) p /= dataset.n_episodes();
  return game;
}

QTables q_values(const GameShape& g, const RewardTable& R, const TransitionTable& P,
                 const JointPolicy& policy) {
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  QTables out{PlayerTable(g), PlayerTable(n, H, S, 1)};
  for (int h = H - 1; h >= 0; --h) {
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          double q = R(i, h, s, a);
          if (h + 1 < H) {
            const double* p = P.row(h, s, a);
            for (int t = 0; t < S; ++t) q += p[t] * out.v(i, h + 1, t, 0);
          }
          out.q(i, h, s, a) = q;
        }
        out.v(i, h, s, 0) = out.q(i, h, s, policy(h, s));
      }
    }
  }
  return out;
}

QTables q_values(const MarkovGame& game, const JointPolicy& policy) {
  return q_values(game.shape, game.rewards, game.transitions, policy);
}

MpdseCheck is_iota_mpdse(const GameShape& g, const RewardTable& R, const TransitionTable& P,
                         const JointPolicy& policy, double iota, double tol) {
  QTables qt = q_values(g, R, P, policy);
  MpdseCheck out;
  for (int i = 0; i < g.n_players(); ++i)
    for (int h = 0; h < g.horizon(); ++h)
      for (int s = 0; s < g.n_states(); ++s) {
        const int target = g.action_of(policy(h, s), i);
        for (int a = 0; a < g.num_joint(); ++a) {
          if (g.action_of(a, i) == target) continue;
          const int ref = g.with_action(a, i, target);
          const double m = qt.q(i, h, s, ref) - qt.q(i, h, s, a) - iota;
          if (m < out.worst_margin) {
            out.worst_margin = m;
            out.player = i;
            out.h = h;
            out.s = s;
            out.deviation = a;
          }
        }
      }
  out.holds = out.worst_margin >= -tol;
  return out;
}

MpdseCheck is_iota_mpdse(const MarkovGame& game, const JointPolicy& policy, double iota, double tol) {
  return is_iota_mpdse(game.shape, game.rewards, game.transitions, policy, iota, tol);
}

long long policy_count(const GameShape& g, long long cap) {
  long long total = 1;
  const int cells = g.horizon() * g.n_states();
  for (int c = 0; c < cells; ++c) {
    total *= g.num_joint();
    if (total > cap) return cap + 1;
  }
  return total;
}

JointPolicy policy_from_ordinal(const GameShape& g, long long ordinal) {
  JointPolicy p(g.horizon(), g.n_states());
  for (int h = g.horizon() - 1; h >= 0; --h)
    for (int s = g.n_states() - 1; s >= 0; --s) {
      p(h, s) = static_cast<int>(ordinal % g.num_joint());
      ordinal /= g.num_joint();
    }
  return p;
}

}  // namespace mgpoison
