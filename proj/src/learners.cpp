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

#include "mgpoison/learners.hpp"

#include <algorithm>
#include <cmath>

namespace mgpoison {

const char* to_string(BonusKind k) {
  switch (k) {
    case BonusKind::kPessimistic: return "pessimistic";
    case BonusKind::kOptimistic: return "optimistic";
    case BonusKind::kZero: return "zero";
    case BonusKind::kCustom: return "custom";
  }
  return "?";
}

BonusKind bonus_kind_from_string(const std::string& s) {
  if (s == "pessimistic") return BonusKind::kPessimistic;
  if (s == "optimistic") return BonusKind::kOptimistic;
  if (s == "zero") return BonusKind::kZero;
  if (s == "custom") return BonusKind::kCustom;
  throw InvalidArgument("unknown bonus kind: " + s);
}

const char* to_string(NeStatus s) {
  switch (s) {
    case NeStatus::kStrictDse: return "strict_dse";
    case NeStatus::kPureNe: return "pure_ne";
    case NeStatus::kNoneFound: return "none_found";
  }
  return "?";
}

RewardTable bonus_gamma(const VisitCounts& counts, const GameShape& g, BonusKind kind, double delta,
                        double beta_c) {
  RewardTable out(g);
  if (kind == BonusKind::kZero) return out;
  if (kind == BonusKind::kCustom) throw InvalidArgument("custom bonus has no formula");
  const double beta = bonus_beta(g, counts.total, delta, beta_c);
  const double sign = kind == BonusKind::kPessimistic ? 1.0 : -1.0;
  for (int i = 0; i < g.n_players(); ++i)
    for (int h = 0; h < g.horizon(); ++h)
      for (int s = 0; s < g.n_states(); ++s)
        for (int a = 0; a < g.num_joint(); ++a) {
          out(i, h, s, a) = sign * g.horizon() * std::sqrt(beta / (counts.counts(h, s, a) + 1.0));
        }
  return out;
}

NeResult ne_oracle(const GameShape& g, const std::vector<std::vector<double>>& q) {
  const int n = g.n_players(), A = g.num_joint();
  if (static_cast<int>(q.size()) != n) throw InvalidArgument("one payoff matrix per player expected");
  for (const auto& row : q)
    if (static_cast<int>(row.size()) != A) throw InvalidArgument("payoff matrix size mismatch");
  NeResult res;

  std::vector<int> dominant(n, -1);
  bool dse = true;
  for (int i = 0; i < n && dse; ++i) {
    for (int ai = 0; ai < g.actions(i) && dominant[i] < 0; ++ai) {
      bool strict = true;
      for (int o = 0; o < g.num_others(i) && strict; ++o) {
        const double base = q[i][g.compose(i, ai, o)];
        for (int bi = 0; bi < g.actions(i) && strict; ++bi)
          if (bi != ai && !(base > q[i][g.compose(i, bi, o)])) strict = false;
      }
      if (strict) dominant[i] = ai;
    }
    dse = dominant[i] >= 0;
  }

  for (int a = 0; a < A; ++a) {
    bool ne = true;
    for (int i = 0; i < n && ne; ++i)
      for (int bi = 0; bi < g.actions(i) && ne; ++bi)
        if (q[i][g.with_action(a, i, bi)] > q[i][a] + 1e-12) ne = false;
    if (ne) res.pure_equilibria.push_back(a);
  }

  if (dse) {
    res.joint = g.joint_index(dominant);
    res.status = NeStatus::kStrictDse;
  } else if (!res.pure_equilibria.empty()) {
    res.joint = res.pure_equilibria.front();
    res.status = NeStatus::kPureNe;
  }
  return res;
}

LearnerOutput povi(const OfflineDataset& ds, const BonusSpec& bonus) {
  const GameShape& g = ds.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  const MleEstimate est = mle_game(ds);
  LearnerOutput out;
  if (bonus.kind == BonusKind::kCustom) {
    if (bonus.custom.n_players() != n || bonus.custom.horizon() != H || bonus.custom.n_states() != S ||
        bonus.custom.n_joint() != A) {
      throw InvalidArgument("custom bonus table shape mismatch");
    }
    for (double x : bonus.custom.data())
      if (!std::isfinite(x)) throw InvalidArgument("custom bonus must be finite");
    out.gamma = bonus.custom;
  } else {
    out.gamma = bonus_gamma(visit_counts(ds), g, bonus.kind, bonus.delta, bonus.beta_c);
  }
  out.policy = JointPolicy(H, S);
  out.q_lower = PlayerTable(g);
  out.v_lower = PlayerTable(n, H, S, 1);
  out.ne_status = CellArray<int>(H, S, 1);
  std::vector<std::vector<double>> q(n, std::vector<double>(A));
  for (int h = H - 1; h >= 0; --h)
    for (int s = 0; s < S; ++s) {
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < A; ++a) {
          double v = est.rewards(i, h, s, a);
          if (h + 1 < H) {
            const double* p = est.transitions.row(h, s, a);
            for (int t = 0; t < S; ++t) v += p[t] * out.v_lower(i, h + 1, t, 0);
          }
          v -= out.gamma(i, h, s, a);
          out.q_lower(i, h, s, a) = v;
          q[i][a] = v;
        }
      const NeResult ne = ne_oracle(g, q);
      out.ne_status(h, s, 0) = static_cast<int>(ne.status);
      if (ne.status == NeStatus::kNoneFound) {
        throw NoEquilibrium("no pure equilibrium at h=" + std::to_string(h) + ", s=" + std::to_string(s), h, s);
      }
      out.policy(h, s) = ne.joint;
      for (int i = 0; i < n; ++i) out.v_lower(i, h, s, 0) = q[i][ne.joint];
    }
  return out;
}

BonusCheck check_bonus_within_widths(const RewardTable& gamma, const ConfidenceWidths& w, const PlayerTable& v) {
  const int n = gamma.n_players(), H = gamma.horizon(), S = gamma.n_states(), A = gamma.n_joint();
  BonusCheck out;
  out.slack = PlayerTable(n, H, S, A);
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h) {
      double spread = 0.0;
      if (h + 1 < H) {
        double lo = kInf, hi = -kInf;
        for (int t = 0; t < S; ++t) {
          lo = std::min(lo, v(i, h + 1, t, 0));
          hi = std::max(hi, v(i, h + 1, t, 0));
        }
        spread = hi - lo;
      }
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const double inner = h + 1 < H ? 0.5 * w.rho_p(h, s, a) * spread : 0.0;
          const double slack = w.rho_r(h, s, a) + inner - std::abs(gamma(i, h, s, a));
          out.slack(i, h, s, a) = slack;
          out.worst_slack = std::min(out.worst_slack, slack);
          if (slack < -1e-12) out.holds = false;
        }
    }
  return out;
}

WitnessReport compatibility_witness(const OfflineDataset& ds, const LearnerOutput& out,
                                    const ConfidenceWidths& w) {
  const GameShape& g = ds.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  const MleEstimate est = mle_game(ds);
  WitnessReport rep;
  rep.game.shape = g;
  rep.game.rewards = RewardTable(g);
  rep.game.transitions = est.transitions;
  rep.game.initial.assign(S, 0.0);
  for (const auto& ep : ds.episodes) rep.game.initial[ep.steps[0].s] += 1.0 / ds.n_episodes();
  rep.game.bound = kInf;

  // A shared P per (h, s, a) must serve every player, so U is chosen for
  // player 0 and the other players absorb the remainder in u when possible.
  std::vector<double> vals(S), opt(S);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double* p = rep.game.transitions.data().data();
        double* row = h + 1 < H ? p + ((static_cast<std::size_t>(h) * S + s) * A + a) * S : nullptr;
        const double* phat = h + 1 < H ? est.transitions.row(h, s, a) : nullptr;
        const double rho = w.rho_r(h, s, a);
        double lambda = 0.0;
        std::vector<double> dir(S, 0.0);  // U direction, scaled by lambda
        if (row != nullptr) {
          const double rp = w.rho_p(h, s, a);
          const double gam = out.gamma(0, h, s, a);
          const double need = std::abs(gam) - rho;
          if (need > 0) {
            for (int t = 0; t < S; ++t) vals[t] = out.v_lower(0, h + 1, t, 0);
            const double base = std::inner_product(phat, phat + S, vals.begin(), 0.0);
            double reach;
            if (gam > 0) {
              reach = base - l1_ball_min(phat, vals.data(), S, rp, opt.data());
            } else {
              reach = l1_ball_max(phat, vals.data(), S, rp, opt.data()) - base;
            }
            for (int t = 0; t < S; ++t) dir[t] = phat[t] - opt[t];
            lambda = reach > 0 ? std::min(1.0, need / reach) : 0.0;
          }
          for (int t = 0; t < S; ++t) row[t] = phat[t] - lambda * dir[t];
        }
        for (int i = 0; i < n; ++i) {
          double shift = 0.0;
          if (row != nullptr) {
            for (int t = 0; t < S; ++t) shift += lambda * dir[t] * out.v_lower(i, h + 1, t, 0);
          }
          const double u = out.gamma(i, h, s, a) - shift;
          if (std::abs(u) > rho + 1e-9) rep.constructed = false;
          rep.game.rewards(i, h, s, a) = est.rewards(i, h, s, a) - u;
        }
      }

  const QTables qt = q_values(rep.game, out.policy);
  for (std::size_t k = 0; k < qt.q.data().size(); ++k) {
    rep.bellman_residual = std::max(rep.bellman_residual, std::abs(qt.q.data()[k] - out.q_lower.data()[k]));
  }
  PlausibleGameSampler smp;
  smp.shape = g;
  smp.center_rewards = est.rewards;
  smp.center_transitions = est.transitions;
  smp.widths = w;
  smp.bound = kInf;
  smp.clip_rewards = false;
  rep.in_confidence_set = rep.constructed && confidence_set_membership(smp, rep.game, 1e-8).member;
  return rep;
}

Json learner_json(const LearnerOutput& out, const GameShape& g) {
  Json status = Json::array();
  for (int h = 0; h < g.horizon(); ++h) {
    Json row = Json::array();
    for (int s = 0; s < g.n_states(); ++s) row.push_back(to_string(static_cast<NeStatus>(out.ne_status(h, s, 0))));
    status.push_back(row);
  }
  return {{"policy", policy_json(out.policy, g)},
          {"ne_status", status},
          {"q_lower", player_table_json(out.q_lower)},
          {"gamma", player_table_json(out.gamma)}};
}

}  // namespace mgpoison
