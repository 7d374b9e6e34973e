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

#include "mgpoison/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mgpoison {

const char* to_string(WidthMode mode) {
  switch (mode) {
    case WidthMode::kConstant: return "constant";
    case WidthMode::kHoeffding: return "hoeffding";
    case WidthMode::kBonusScale: return "bonus-scale";
    case WidthMode::kExplicit: return "explicit";
  }
  return "unknown";
}

WidthMode width_mode_from_string(const std::string& name) {
  if (name == "constant") return WidthMode::kConstant;
  if (name == "hoeffding") return WidthMode::kHoeffding;
  if (name == "bonus-scale") return WidthMode::kBonusScale;
  if (name == "explicit") return WidthMode::kExplicit;
  throw InvalidArgument("unknown width mode: " + name);
}

const char* to_string(SampleStrategy s) {
  switch (s) {
    case SampleStrategy::kExtremeRewards: return "extreme_rewards";
    case SampleStrategy::kRandomInterior: return "random_interior";
    case SampleStrategy::kL1VertexTransitions: return "l1_vertex_transitions";
  }
  return "unknown";
}

double ConfidenceWidths::max_rho_r() const {
  const auto& d = rho_r.data();
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

double ConfidenceWidths::min_rho_r() const {
  const auto& d = rho_r.data();
  return d.empty() ? 0.0 : *std::min_element(d.begin(), d.end());
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidDelta("delta must lie in (0, 1)");
}

CellArray<double> transition_widths(const VisitCounts& counts, const GameShape& g, double beta) {
  CellArray<double> out(g.horizon() - 1, g.n_states(), g.num_joint(), 0.0);
  for (int h = 0; h + 1 < g.horizon(); ++h)
    for (int s = 0; s < g.n_states(); ++s)
      for (int a = 0; a < g.num_joint(); ++a)
        out(h, s, a) = std::sqrt(g.n_states() * beta / (counts.counts(h, s, a) + 1.0));
  return out;
}

}  // namespace

double bonus_beta(const GameShape& g, long long n_total, double delta, double beta_c) {
  check_delta(delta);
  const double arg = static_cast<double>(g.n_states()) * g.num_joint() * g.horizon() *
                     static_cast<double>(std::max<long long>(n_total, 1)) / delta;
  return beta_c * std::log(arg);
}

ConfidenceWidths constant_widths(const GameShape& g, double rho_r, double rho_p) {
  if (rho_r < 0 || rho_p < 0) throw InvalidArgument("widths must be nonnegative");
  ConfidenceWidths w;
  w.params.mode = WidthMode::kConstant;
  w.params.rho_r = rho_r;
  w.params.rho_p = rho_p;
  w.rho_r = CellArray<double>(g, rho_r);
  w.rho_p = CellArray<double>(g.horizon() - 1, g.n_states(), g.num_joint(), rho_p);
  return w;
}

ConfidenceWidths hoeffding_widths(const VisitCounts& counts, const GameShape& g, double bound,
                                  double delta, double reward_const, double beta_c) {
  check_delta(delta);
  if (!std::isfinite(bound)) throw InvalidArgument("Hoeffding widths need a finite b");
  ConfidenceWidths w;
  w.params.mode = WidthMode::kHoeffding;
  w.params.delta = delta;
  w.params.reward_const = reward_const;
  w.params.beta_c = beta_c;
  const double lg = std::log(static_cast<double>(g.horizon()) * g.n_states() * g.num_joint() / delta);
  w.rho_r = CellArray<double>(g, 0.0);
  for (int h = 0; h < g.horizon(); ++h)
    for (int s = 0; s < g.n_states(); ++s)
      for (int a = 0; a < g.num_joint(); ++a) {
        const double n = std::max(counts.counts(h, s, a), 1);
        w.rho_r(h, s, a) = reward_const * bound * std::sqrt(lg / n);
      }
  w.rho_p = transition_widths(counts, g, bonus_beta(g, counts.total, delta, beta_c));
  return w;
}

ConfidenceWidths bonus_scale_widths(const VisitCounts& counts, const GameShape& g, double delta,
                               double beta_c) {
  const double beta = bonus_beta(g, counts.total, delta, beta_c);
  ConfidenceWidths w;
  w.params.mode = WidthMode::kBonusScale;
  w.params.delta = delta;
  w.params.beta_c = beta_c;
  w.rho_r = CellArray<double>(g, 0.0);
  for (int h = 0; h < g.horizon(); ++h)
    for (int s = 0; s < g.n_states(); ++s)
      for (int a = 0; a < g.num_joint(); ++a)
        w.rho_r(h, s, a) = g.horizon() * std::sqrt(beta / (counts.counts(h, s, a) + 1.0));
  w.rho_p = transition_widths(counts, g, beta);
  return w;
}

ConfidenceWidths compute_widths(const WidthParams& p, const VisitCounts& counts,
                                const GameShape& g, double bound) {
  ConfidenceWidths w;
  switch (p.mode) {
    case WidthMode::kConstant: w = constant_widths(g, p.rho_r, p.rho_p); break;
    case WidthMode::kHoeffding:
      w = hoeffding_widths(counts, g, bound, p.delta, p.reward_const, p.beta_c);
      break;
    case WidthMode::kBonusScale: w = bonus_scale_widths(counts, g, p.delta, p.beta_c); break;
    case WidthMode::kExplicit: throw InvalidArgument("explicit widths cannot be computed");
  }
  w.params = p;
  return w;
}

namespace {

// Moves up to rho/2 mass onto the best coordinate, draining the worst first.
// better(x, y) is true when x is preferred.
template <typename Better>
double l1_extreme(const double* c, const double* v, int n, double rho, double* out, Better better) {
  std::vector<double> p(c, c + n);
  int best = 0;
  for (int t = 1; t < n; ++t)
    if (better(v[t], v[best])) best = t;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return better(v[b], v[a]); });
  double budget = std::min(rho / 2.0, 1.0 - p[best]);
  for (int t : order) {
    if (budget <= 0.0) break;
    if (t == best || v[t] == v[best]) continue;
    const double m = std::min(budget, p[t]);
    p[t] -= m;
    p[best] += m;
    budget -= m;
  }
  double val = 0.0;
  for (int t = 0; t < n; ++t) val += p[t] * v[t];
  if (out) std::copy(p.begin(), p.end(), out);
  return val;
}

}  // namespace

double l1_ball_min(const double* c, const double* v, int n, double rho, double* out) {
  return l1_extreme(c, v, n, rho, out, [](double x, double y) { return x < y; });
}

double l1_ball_max(const double* c, const double* v, int n, double rho, double* out) {
  return l1_extreme(c, v, n, rho, out, [](double x, double y) { return x > y; });
}

bool uniform_transition_in_ci(const double* p, double rho, int n) {
  double d = 0.0;
  for (int t = 0; t < n; ++t) d += std::abs(p[t] - 1.0 / n);
  return d <= rho + 1e-12;
}

MembershipResult confidence_set_membership(const PlausibleGameSampler& smp, const MarkovGame& game,
                                           double tol) {
  const GameShape& g = smp.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const double r = game.rewards(i, h, s, a);
          if (std::abs(r - smp.center_rewards(i, h, s, a)) > smp.widths.rho_r(h, s, a) + tol) {
            return {false, "reward outside confidence interval"};
          }
          if (smp.clip_rewards && (r < -smp.bound - tol || r > smp.bound + tol)) {
            return {false, "reward outside [-b, b]"};
          }
        }
  for (int h = 0; h + 1 < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double* p = game.transitions.row(h, s, a);
        const double* c = smp.center_transitions.row(h, s, a);
        double sum = 0.0, dist = 0.0;
        for (int t = 0; t < S; ++t) {
          if (p[t] < -tol) return {false, "negative transition probability"};
          sum += p[t];
          dist += std::abs(p[t] - c[t]);
        }
        if (std::abs(sum - 1.0) > tol) return {false, "transition row does not sum to 1"};
        if (dist > smp.widths.rho_p(h, s, a) + tol) return {false, "transition outside L1 ball"};
      }
  return {};
}

namespace {

struct Interval {
  double lo, hi;
};

Interval reward_interval(const PlausibleGameSampler& smp, double c, double rho) {
  Interval iv{c - rho, c + rho};
  if (smp.clip_rewards) {
    iv.lo = std::max(iv.lo, -smp.bound);
    iv.hi = std::min(iv.hi, smp.bound);
    if (iv.lo > iv.hi + 1e-12) throw EmptySet("clipped reward interval is empty");
    if (iv.lo > iv.hi) iv.lo = iv.hi;
  }
  return iv;
}

bool vertex_move(const double* c, int n, double rho, Rng& rng, double* out) {
  std::copy(c, c + n, out);
  if (n < 2 || rho <= 0.0) return true;
  const int from = rng.below(n);
  int to = rng.below(n - 1);
  if (to >= from) ++to;
  const double m = std::min(rho / 2.0, 1.0);
  out[from] -= m;
  out[to] += m;
  double sum = 0.0;
  for (int t = 0; t < n; ++t) {
    out[t] = std::max(out[t], 0.0);
    sum += out[t];
  }
  double dist = 0.0;
  for (int t = 0; t < n; ++t) {
    out[t] /= sum;
    dist += std::abs(out[t] - c[t]);
  }
  return dist <= rho + 1e-12;
}

// Step toward a uniformly random simplex point, scaled into the ball.
void interior_move(const double* c, int n, double rho, Rng& rng, double* out) {
  std::copy(c, c + n, out);
  if (n < 2 || rho <= 0.0) return;
  std::vector<double> q(n);
  double sum = 0.0;
  for (int t = 0; t < n; ++t) {
    q[t] = -std::log(1.0 - rng.uniform01());
    sum += q[t];
  }
  double dist = 0.0;
  for (int t = 0; t < n; ++t) {
    q[t] /= sum;
    dist += std::abs(q[t] - c[t]);
  }
  if (dist <= 0.0) return;
  const double step = rng.uniform01() * std::min(1.0, rho / dist);
  for (int t = 0; t < n; ++t) out[t] = c[t] + step * (q[t] - c[t]);
}

}  // namespace

MarkovGame sample_plausible_game(const PlausibleGameSampler& smp, SampleStrategy strategy, Rng& rng,
                                 int fixed_sign) {
  const GameShape& g = smp.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  MarkovGame game;
  game.shape = g;
  game.bound = smp.bound;
  game.rewards = RewardTable(g);
  game.transitions = TransitionTable(g);
  game.initial.assign(S, 1.0 / S);

  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const Interval iv =
              reward_interval(smp, smp.center_rewards(i, h, s, a), smp.widths.rho_r(h, s, a));
          double r;
          if (strategy == SampleStrategy::kRandomInterior && fixed_sign == 0) {
            r = rng.uniform(iv.lo, iv.hi);
          } else {
            const int sign = fixed_sign != 0 ? fixed_sign : (rng.coin() ? 1 : -1);
            r = sign > 0 ? iv.hi : iv.lo;
          }
          game.rewards(i, h, s, a) = r;
        }

  for (int h = 0; h + 1 < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double* c = smp.center_transitions.row(h, s, a);
        double* p = game.transitions.row(h, s, a);
        const double rho = smp.widths.rho_p(h, s, a);
        switch (strategy) {
          case SampleStrategy::kExtremeRewards: std::copy(c, c + S, p); break;
          case SampleStrategy::kRandomInterior: interior_move(c, S, rho, rng, p); break;
          case SampleStrategy::kL1VertexTransitions: {
            int tries = 0;
            while (!vertex_move(c, S, rho, rng, p)) {
              if (++tries >= 100) throw NumericalFailure("vertex transition redraw limit reached");
            }
            break;
          }
        }
      }

  MembershipResult m = confidence_set_membership(smp, game);
  if (!m.member) throw NumericalFailure("sampled game left the confidence set: " + m.reason);
  return game;
}

}  // namespace mgpoison
