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

#include "attack_common.hpp"

#include <algorithm>
#include <cmath>

#include "mgpoison/cost_analysis.hpp"

namespace mgpoison {

double l1_distance(const OfflineDataset& a, const OfflineDataset& b) {
  if (a.episodes.size() != b.episodes.size()) throw InvalidArgument("datasets differ in size");
  double total = 0.0;
  for (std::size_t k = 0; k < a.episodes.size(); ++k)
    for (std::size_t h = 0; h < a.episodes[k].steps.size(); ++h) {
      const auto& ra = a.episodes[k].steps[h].r;
      const auto& rb = b.episodes[k].steps[h].r;
      for (std::size_t i = 0; i < ra.size(); ++i) total += std::abs(ra[i] - rb[i]);
    }
  return total;
}

namespace detail {

std::string cell_name(const char* prefix, int i, int h, int s, int a) {
  return std::string(prefix) + "[" + std::to_string(i) + "," + std::to_string(h) + "," +
         std::to_string(s) + "," + std::to_string(a) + "]";
}

std::vector<LpTerm> concat(std::vector<LpTerm> a, const std::vector<LpTerm>& b, double scale) {
  for (const auto& t : b) a.push_back({t.var, t.coef * scale});
  return a;
}

RewardVars add_reward_variables(LpModel& model, const OfflineDataset& ds, const VisitCounts& counts,
                                const RewardTable& mle, Granularity granularity) {
  const GameShape& g = ds.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  const double b = ds.bound;
  RewardVars rv;
  rv.granularity = granularity;
  rv.expr.resize(static_cast<std::size_t>(n) * H * S * A);
  if (granularity == Granularity::kCell) {
    rv.plus.resize(rv.expr.size());
    rv.minus.resize(rv.expr.size());
    for (int i = 0; i < n; ++i)
      for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
          for (int a = 0; a < A; ++a) {
            const int c = rv.cell_index(g, i, h, s, a);
            const double r = mle(i, h, s, a);
            const double w = counts.counts(h, s, a);
            rv.plus[c] = model.add_variable(cell_name("up", i, h, s, a), 0.0, std::max(0.0, b - r), w);
            rv.minus[c] = model.add_variable(cell_name("down", i, h, s, a), 0.0, std::max(0.0, b + r), w);
            rv.expr[c].terms = {{rv.plus[c], 1.0}, {rv.minus[c], -1.0}};
            rv.expr[c].constant = r;
          }
    return rv;
  }
  const int K = ds.n_episodes();
  rv.plus.resize(static_cast<std::size_t>(K) * H * n);
  rv.minus.resize(rv.plus.size());
  for (int k = 0; k < K; ++k)
    for (int h = 0; h < H; ++h)
      for (int i = 0; i < n; ++i) {
        const double r = ds.episodes[k].steps[h].r[i];
        const std::size_t e = (static_cast<std::size_t>(k) * H + h) * n + i;
        const std::string tag = "[" + std::to_string(k) + "," + std::to_string(h) + "," + std::to_string(i) + "]";
        rv.plus[e] = model.add_variable("up" + tag, 0.0, std::max(0.0, b - r), 1.0);
        rv.minus[e] = model.add_variable("down" + tag, 0.0, std::max(0.0, b + r), 1.0);
      }
  std::vector<std::vector<LpTerm>> sums(rv.expr.size());
  for (int k = 0; k < K; ++k)
    for (int h = 0; h < H; ++h) {
      const Step& st = ds.episodes[k].steps[h];
      for (int i = 0; i < n; ++i) {
        const std::size_t e = (static_cast<std::size_t>(k) * H + h) * n + i;
        const int c = rv.cell_index(g, i, h, st.s, st.joint);
        sums[c].push_back({rv.plus[e], 1.0});
        sums[c].push_back({rv.minus[e], -1.0});
      }
    }
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const int c = rv.cell_index(g, i, h, s, a);
          const int var = model.add_variable(cell_name("R", i, h, s, a), -kInf, kInf, 0.0);
          const double inv = 1.0 / counts.counts(h, s, a);
          std::vector<LpTerm> row = {{var, 1.0}};
          for (const auto& t : sums[c]) row.push_back({t.var, -t.coef * inv});
          model.add_constraint(cell_name("mean", i, h, s, a), std::move(row), Sense::kEqual, mle(i, h, s, a));
          rv.expr[c].terms = {{var, 1.0}};
        }
  return rv;
}

OfflineDataset recover_poisoned(const OfflineDataset& ds, const RewardVars& rv, const LpSolution& sol,
                                const RewardTable& mle) {
  const GameShape& g = ds.shape;
  const int n = g.n_players(), H = g.horizon();
  const double b = ds.bound;
  auto shift = [&](int plus, int minus) {
    const double d = sol.values[plus] - sol.values[minus];
    return std::abs(d) < 1e-12 ? 0.0 : d;
  };
  if (rv.granularity == Granularity::kEpisode) {
    OfflineDataset out = ds;
    for (int k = 0; k < ds.n_episodes(); ++k)
      for (int h = 0; h < H; ++h)
        for (int i = 0; i < n; ++i) {
          const std::size_t e = (static_cast<std::size_t>(k) * H + h) * n + i;
          double& r = out.episodes[k].steps[h].r[i];
          r = std::clamp(r + shift(rv.plus[e], rv.minus[e]), -b, b);
        }
    return out;
  }
  RewardTable target = mle;
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < g.n_states(); ++s)
        for (int a = 0; a < g.num_joint(); ++a) {
          const int c = rv.cell_index(g, i, h, s, a);
          target(i, h, s, a) = std::clamp(mle(i, h, s, a) + shift(rv.plus[c], rv.minus[c]), -b, b);
        }
  return lift_all_periods(ds, target);
}

}  // namespace detail
}  // namespace mgpoison
