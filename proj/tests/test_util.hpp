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

#ifndef MGPOISON_TESTS_TEST_UTIL_HPP_
#define MGPOISON_TESTS_TEST_UTIL_HPP_

#include <vector>

#include "mgpoison/game.hpp"
#include "mgpoison/rng.hpp"

namespace mgpoison::testing {

// Uniform rewards in [-b, b]; the first |S||A| episodes sweep every cell so
// coverage holds, later ones draw cells at random.
inline OfflineDataset random_dataset(const GameShape& g, int extra, double b, Rng& rng) {
  OfflineDataset ds;
  ds.shape = g;
  ds.bound = b;
  const int A = g.num_joint(), M = g.n_states() * A;
  for (int k = 0; k < M + extra; ++k) {
    Episode ep;
    for (int h = 0; h < g.horizon(); ++h) {
      const int cell = k < M ? k : static_cast<int>(rng.below(M));
      Step st{cell / A, cell % A, {}};
      for (int i = 0; i < g.n_players(); ++i) st.r.push_back(rng.uniform(-b, b));
      ep.steps.push_back(st);
    }
    ds.episodes.push_back(ep);
  }
  return ds;
}

inline MarkovGame random_game(const GameShape& g, double b, Rng& rng) {
  MarkovGame m;
  m.shape = g;
  m.bound = b;
  m.rewards = RewardTable(g);
  for (double& r : m.rewards.data()) r = rng.uniform(-b, b);
  m.transitions = TransitionTable(g);
  for (int h = 0; h + 1 < g.horizon(); ++h)
    for (int s = 0; s < g.n_states(); ++s)
      for (int a = 0; a < g.num_joint(); ++a) {
        double total = 0.0;
        for (int t = 0; t < g.n_states(); ++t) total += m.transitions(h, s, a, t) = rng.uniform01() + 1e-3;
        for (int t = 0; t < g.n_states(); ++t) m.transitions(h, s, a, t) /= total;
      }
  m.initial.assign(g.n_states(), 1.0 / g.n_states());
  return m;
}

inline JointPolicy random_policy(const GameShape& g, Rng& rng) {
  JointPolicy p(g.horizon(), g.n_states());
  for (int h = 0; h < g.horizon(); ++h)
    for (int s = 0; s < g.n_states(); ++s) p(h, s) = static_cast<int>(rng.below(g.num_joint()));
  return p;
}

// The 2x2 game where (0,0) is already an MPDSE with gaps exactly 1.
inline OfflineDataset dominant_example_dataset(const std::vector<int>& counts = {1, 1, 1, 1}, double b = 3.0) {
  static const double kPayoff[4][2] = {{3, 3}, {1, 2}, {2, 1}, {0, 0}};
  OfflineDataset ds;
  ds.shape = GameShape(2, 1, {2, 2}, 1);
  ds.bound = b;
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < counts[a]; ++k) ds.episodes.push_back({{Step{0, a, {kPayoff[a][0], kPayoff[a][1]}}}});
  return ds;
}

}  // namespace mgpoison::testing

#endif  // MGPOISON_TESTS_TEST_UTIL_HPP_
