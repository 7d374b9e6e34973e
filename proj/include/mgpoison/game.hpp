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

#ifndef MGPOISON_GAME_HPP_
#define MGPOISON_GAME_HPP_

#include <cstddef>
#include <limits>
#include <vector>

#include "mgpoison/errors.hpp"

namespace mgpoison {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense 0-based shape of a finite-horizon n-player game. Joint actions are
// mixed-radix indices with player 0 as the most significant digit, so index
// order is lexicographic order of action tuples.
class GameShape {
 public:
  GameShape() = default;
  GameShape(int n_players, int n_states, std::vector<int> actions, int horizon);

  int n_players() const { return n_players_; }
  int n_states() const { return n_states_; }
  int horizon() const { return horizon_; }
  int actions(int player) const { return actions_[player]; }
  const std::vector<int>& action_counts() const { return actions_; }
  int num_joint() const { return num_joint_; }

  int joint_index(const std::vector<int>& actions) const;
  std::vector<int> decode(int joint) const;
  int action_of(int joint, int player) const {
    return (joint / strides_[player]) % actions_[player];
  }
  int with_action(int joint, int player, int action) const {
    return joint + (action - action_of(joint, player)) * strides_[player];
  }
  // Number of joint profiles of everybody except `player`.
  int num_others(int player) const { return num_joint_ / actions_[player]; }
  // Index of the opponents' profile within [0, num_others(player)).
  int others_index(int joint, int player) const;
  // Joint action from an own action and an opponents' profile index.
  int compose(int player, int action, int others) const;

  bool operator==(const GameShape& o) const {
    return n_players_ == o.n_players_ && n_states_ == o.n_states_ &&
           actions_ == o.actions_ && horizon_ == o.horizon_;
  }
  bool operator!=(const GameShape& o) const { return !(*this == o); }

 private:
  int n_players_ = 0;
  int n_states_ = 0;
  int horizon_ = 0;
  int num_joint_ = 0;
  std::vector<int> actions_;
  std::vector<int> strides_;
};

// Table over (h, s, joint).
template <typename T>
class CellArray {
 public:
  CellArray() = default;
  CellArray(int horizon, int n_states, int n_joint, T fill = T{})
      : h_(horizon), s_(n_states), a_(n_joint),
        data_(static_cast<std::size_t>(horizon) * n_states * n_joint, fill) {}
  explicit CellArray(const GameShape& g, T fill = T{})
      : CellArray(g.horizon(), g.n_states(), g.num_joint(), fill) {}

  T& operator()(int h, int s, int a) { return data_[index(h, s, a)]; }
  const T& operator()(int h, int s, int a) const { return data_[index(h, s, a)]; }
  int horizon() const { return h_; }
  int n_states() const { return s_; }
  int n_joint() const { return a_; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }
  bool empty() const { return data_.empty(); }

 private:
  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * s_ + s) * a_ + a;
  }
  int h_ = 0, s_ = 0, a_ = 0;
  std::vector<T> data_;
};

// Table over (player, h, s, joint).
class PlayerTable {
 public:
  PlayerTable() = default;
  PlayerTable(int n_players, int horizon, int n_states, int n_joint, double fill = 0.0)
      : n_(n_players), h_(horizon), s_(n_states), a_(n_joint),
        data_(static_cast<std::size_t>(n_players) * horizon * n_states * n_joint, fill) {}
  explicit PlayerTable(const GameShape& g, double fill = 0.0)
      : PlayerTable(g.n_players(), g.horizon(), g.n_states(), g.num_joint(), fill) {}

  double& operator()(int i, int h, int s, int a) { return data_[index(i, h, s, a)]; }
  double operator()(int i, int h, int s, int a) const { return data_[index(i, h, s, a)]; }
  int n_players() const { return n_; }
  int horizon() const { return h_; }
  int n_states() const { return s_; }
  int n_joint() const { return a_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t index(int i, int h, int s, int a) const {
    return ((static_cast<std::size_t>(i) * h_ + h) * s_ + s) * a_ + a;
  }
  int n_ = 0, h_ = 0, s_ = 0, a_ = 0;
  std::vector<double> data_;
};

using RewardTable = PlayerTable;

// P_h(s' | s, a) for h < H-1. The last period has no successor.
class TransitionTable {
 public:
  TransitionTable() = default;
  TransitionTable(int horizon, int n_states, int n_joint)
      : h_(horizon > 0 ? horizon - 1 : 0), s_(n_states), a_(n_joint),
        data_(static_cast<std::size_t>(h_) * n_states * n_joint * n_states, 0.0) {}
  explicit TransitionTable(const GameShape& g)
      : TransitionTable(g.horizon(), g.n_states(), g.num_joint()) {}

  double& operator()(int h, int s, int a, int next) { return data_[index(h, s, a) + next]; }
  double operator()(int h, int s, int a, int next) const { return data_[index(h, s, a) + next]; }
  double* row(int h, int s, int a) { return data_.data() + index(h, s, a); }
  const double* row(int h, int s, int a) const { return data_.data() + index(h, s, a); }
  int n_periods() const { return h_; }
  int n_states() const { return s_; }
  int n_joint() const { return a_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t index(int h, int s, int a) const {
    return ((static_cast<std::size_t>(h) * s_ + s) * a_ + a) * s_;
  }
  int h_ = 0, s_ = 0, a_ = 0;
  std::vector<double> data_;
};

struct MarkovGame {
  GameShape shape;
  TransitionTable transitions;
  RewardTable rewards;
  std::vector<double> initial;
  double bound = kInf;

  // Throws InvalidArgument on broken distributions or out-of-bound rewards.
  void validate(double tol = 1e-9) const;
};

// Deterministic Markov policy: joint action per (h, s).
class JointPolicy {
 public:
  JointPolicy() = default;
  JointPolicy(int horizon, int n_states, int fill = 0)
      : h_(horizon), s_(n_states), data_(static_cast<std::size_t>(horizon) * n_states, fill) {}
  static JointPolicy all_zeros(const GameShape& g) { return JointPolicy(g.horizon(), g.n_states(), 0); }

  int& operator()(int h, int s) { return data_[static_cast<std::size_t>(h) * s_ + s]; }
  int operator()(int h, int s) const { return data_[static_cast<std::size_t>(h) * s_ + s]; }
  int horizon() const { return h_; }
  int n_states() const { return s_; }
  const std::vector<int>& data() const { return data_; }
  bool operator==(const JointPolicy& o) const { return h_ == o.h_ && s_ == o.s_ && data_ == o.data_; }
  bool operator!=(const JointPolicy& o) const { return !(*this == o); }

  void validate(const GameShape& g) const;

 private:
  int h_ = 0, s_ = 0;
  std::vector<int> data_;
};

struct Step {
  int s = 0;
  int joint = 0;
  std::vector<double> r;
};

struct Episode {
  std::vector<Step> steps;
};

struct OfflineDataset {
  GameShape shape;
  double bound = kInf;
  std::vector<Episode> episodes;

  int n_episodes() const { return static_cast<int>(episodes.size()); }
  void validate() const;
};

struct VisitCounts {
  CellArray<int> counts;
  int min = 0;
  int max = 0;
  std::vector<int> min_h;
  std::vector<int> max_h;
  long long total = 0;
};

struct CoverageReport {
  bool satisfied = true;
  std::vector<CellIndex> uncovered;
};

struct MleEstimate {
  RewardTable rewards;
  TransitionTable transitions;
};

struct QTables {
  PlayerTable q;
  // v(i, h, s, 0)
  PlayerTable v;
};

struct MpdseCheck {
  bool holds = true;
  // min over constraints of Q(target) - Q(deviation) - iota; +inf if none.
  double worst_margin = kInf;
  int player = -1, h = -1, s = -1, deviation = -1;
};

VisitCounts visit_counts(const OfflineDataset& dataset);
CoverageReport check_full_coverage(const VisitCounts& counts);

// Throws UncoveredCell when any cell has zero visits.
MleEstimate mle_game(const OfflineDataset& dataset);
// The MLE as a game with the empirical initial-state distribution.
MarkovGame mle_as_game(const OfflineDataset& dataset);

QTables q_values(const GameShape& shape, const RewardTable& rewards,
                 const TransitionTable& transitions, const JointPolicy& policy);
QTables q_values(const MarkovGame& game, const JointPolicy& policy);

MpdseCheck is_iota_mpdse(const GameShape& shape, const RewardTable& rewards,
                         const TransitionTable& transitions,
                         const JointPolicy& policy, double iota,
                         double tol = 1e-9);
MpdseCheck is_iota_mpdse(const MarkovGame& game, const JointPolicy& policy,
                         double iota, double tol = 1e-9);

// Number of deterministic Markov policies, saturating at `cap` + 1.
long long policy_count(const GameShape& shape, long long cap = 1LL << 40);
JointPolicy policy_from_ordinal(const GameShape& shape, long long ordinal);

}  // namespace mgpoison

#endif  // MGPOISON_GAME_HPP_
