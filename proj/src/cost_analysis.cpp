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

#include "mgpoison/cost_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mgpoison {

PeriodInstance period_instance(const MarkovAttackInstance& inst, int h) {
  const GameShape& g = inst.dataset.shape;
  if (h < 0 || h >= g.horizon()) throw InvalidArgument("period out of range");
  const int n = g.n_players(), S = g.n_states(), A = g.num_joint();
  OfflineDataset ds = inst.dataset;
  ds.bound = inst.bound;
  const RewardTable mle = mle_game(ds).rewards;
  const VisitCounts vc = visit_counts(ds);
  PeriodInstance p;
  p.shape = GameShape(n, S, g.action_counts(), 1);
  p.period = h;
  p.mle = RewardTable(p.shape);
  p.counts = CellArray<int>(1, S, A);
  p.rho_r = CellArray<double>(1, S, A);
  p.target.resize(S);
  for (int s = 0; s < S; ++s) {
    p.target[s] = inst.target(h, s);
    for (int a = 0; a < A; ++a) {
      p.counts(0, s, a) = vc.counts(h, s, a);
      p.rho_r(0, s, a) = inst.widths.rho_r(h, s, a);
      for (int i = 0; i < n; ++i) p.mle(i, 0, s, a) = mle(i, h, s, a);
    }
  }
  p.iota = inst.iota;
  p.bound = inst.bound;
  return p;
}

PeriodInstance period_instance(const BanditAttackInstance& inst) {
  MarkovAttackInstance m;
  m.dataset = inst.dataset;
  m.target = JointPolicy(1, 1, inst.target);
  m.widths = inst.widths;
  m.widths.rho_p = CellArray<double>(0, 1, inst.dataset.shape.num_joint());
  m.iota = inst.iota;
  m.bound = inst.bound;
  return period_instance(m, 0);
}

SliceTable::SliceTable(const GameShape& g) {
  int off = 0;
  for (int i = 0; i < g.n_players(); ++i) {
    offset_.push_back(off);
    stride_.push_back(g.num_others(i));
    off += g.n_states() * g.num_others(i);
  }
  data_.assign(off, 0.0);
}

double SliceTable::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double separation_slack(const PeriodInstance& p, int s, int player, int joint) {
  const int t = p.shape.with_action(joint, player, p.shape.action_of(p.target[s], player));
  return p.rho_r(0, s, joint) + p.rho_r(0, s, t) + p.iota;
}

// The clamp [.]_+ commutes with the max over a_i, so clamping each term or
// the max gives the same gap.
SliceTable dominance_gaps(const PeriodInstance& p) {
  const GameShape& g = p.shape;
  SliceTable out(g);
  for (int i = 0; i < g.n_players(); ++i)
    for (int s = 0; s < g.n_states(); ++s) {
      const int ti = g.action_of(p.target[s], i);
      for (int o = 0; o < g.num_others(i); ++o) {
        const int t = g.compose(i, ti, o);
        double d = 0.0;
        for (int ai = 0; ai < g.actions(i); ++ai) {
          if (ai == ti) continue;
          const int a = g.compose(i, ai, o);
          d = std::max(d, p.mle(i, 0, s, a) - p.mle(i, 0, s, t) + separation_slack(p, s, i, a));
        }
        out(i, s, o) = d;
      }
    }
  return out;
}

SliceTable overflow_terms(const PeriodInstance& p) {
  const GameShape& g = p.shape;
  SliceTable out(g);
  if (!std::isfinite(p.bound)) return out;
  for (int i = 0; i < g.n_players(); ++i)
    for (int s = 0; s < g.n_states(); ++s) {
      const int ti = g.action_of(p.target[s], i);
      for (int o = 0; o < g.num_others(i); ++o) {
        double total = 0.0;
        for (int ai = 0; ai < g.actions(i); ++ai) {
          if (ai == ti) continue;
          const int a = g.compose(i, ai, o);
          const double excess = p.mle(i, 0, s, a) - p.bound + separation_slack(p, s, i, a);
          if (excess > 0) total += excess;
        }
        out(i, s, o) = total;
      }
    }
  return out;
}

DeltaSummary delta_h(const PeriodInstance& p) {
  const GameShape& g = p.shape;
  const SliceTable gaps = dominance_gaps(p);
  const SliceTable over = overflow_terms(p);
  DeltaSummary out;
  out.gap_total = gaps.sum();
  out.overflow_total = over.sum();
  if (std::isfinite(p.bound)) {
    for (int i = 0; i < g.n_players(); ++i)
      for (int s = 0; s < g.n_states(); ++s) {
        const int ti = g.action_of(p.target[s], i);
        for (int o = 0; o < g.num_others(i); ++o) {
          const double rt = p.mle(i, 0, s, g.compose(i, ti, o));
          out.overlap_total += std::max(0.0, rt + gaps(i, s, o) - p.bound);
        }
      }
  }
  out.delta = out.gap_total + out.overflow_total - out.overlap_total;
  return out;
}

AtkOutput atk_mechanism(const PeriodInstance& p) {
  const GameShape& g = p.shape;
  const double b = p.bound;
  const SliceTable gaps = dominance_gaps(p);
  AtkOutput out;
  out.rewards = p.mle;
  for (int i = 0; i < g.n_players(); ++i)
    for (int s = 0; s < g.n_states(); ++s) {
      const int ti = g.action_of(p.target[s], i);
      for (int o = 0; o < g.num_others(i); ++o) {
        const int t = g.compose(i, ti, o);
        const double x = std::min(p.mle(i, 0, s, t) + gaps(i, s, o), b);
        out.rewards(i, 0, s, t) = x;
        for (int ai = 0; ai < g.actions(i); ++ai) {
          if (ai == ti) continue;
          const int a = g.compose(i, ai, o);
          const double eps = separation_slack(p, s, i, a);
          if (eps > 2 * b) throw Infeasible("separation slack exceeds 2b");
          out.rewards(i, 0, s, a) = std::min(p.mle(i, 0, s, a), x - eps);
        }
      }
    }
  for (std::size_t k = 0; k < out.rewards.data().size(); ++k) {
    out.cost += std::abs(out.rewards.data()[k] - p.mle.data()[k]);
  }
  return out;
}

void lift_cell(std::vector<double>& values, double target, double bound) {
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (target == mean) return;
  if (!std::isfinite(bound)) {
    for (double& v : values) v += target - mean;
    return;
  }
  if (target >= bound || target <= -bound) {
    std::fill(values.begin(), values.end(), std::clamp(target, -bound, bound));
    return;
  }
  // f(c) = mean(clamp(v + c)) is piecewise linear and nondecreasing; its
  // kinks sit at -b - v and b - v.
  auto f = [&](double c) {
    double s = 0.0;
    for (double v : values) s += std::clamp(v + c, -bound, bound);
    return s / n;
  };
  std::vector<double> kinks;
  kinks.reserve(2 * values.size() + 1);
  for (double v : values) {
    kinks.push_back(-bound - v);
    kinks.push_back(bound - v);
  }
  kinks.push_back(0.0);
  std::sort(kinks.begin(), kinks.end());
  double lo = kinks.front(), flo = f(lo);
  double c = lo;
  for (std::size_t k = 1; k < kinks.size(); ++k) {
    const double hi = kinks[k], fhi = f(hi);
    if (fhi >= target) {
      c = fhi > flo ? lo + (target - flo) * (hi - lo) / (fhi - flo) : hi;
      break;
    }
    lo = hi;
    flo = fhi;
  }
  for (double& v : values) v = std::clamp(v + c, -bound, bound);
}

namespace {

void lift_period(OfflineDataset& out, const OfflineDataset& ds, int h, const RewardTable& target, int th) {
  const GameShape& g = ds.shape;
  const int n = g.n_players(), S = g.n_states(), A = g.num_joint();
  std::vector<std::vector<int>> members(static_cast<std::size_t>(S) * A);
  for (int k = 0; k < ds.n_episodes(); ++k) {
    const Step& st = ds.episodes[k].steps[h];
    members[static_cast<std::size_t>(st.s) * A + st.joint].push_back(k);
  }
  std::vector<double> vals;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const auto& ks = members[static_cast<std::size_t>(s) * A + a];
      for (int i = 0; i < n; ++i) {
        vals.clear();
        for (int k : ks) vals.push_back(ds.episodes[k].steps[h].r[i]);
        lift_cell(vals, target(i, th, s, a), ds.bound);
        for (std::size_t j = 0; j < ks.size(); ++j) out.episodes[ks[j]].steps[h].r[i] = vals[j];
      }
    }
}

}  // namespace

OfflineDataset lift_mle_to_rewards(const OfflineDataset& ds, int h, const RewardTable& target) {
  OfflineDataset out = ds;
  lift_period(out, ds, h, target, 0);
  return out;
}

OfflineDataset lift_all_periods(const OfflineDataset& ds, const RewardTable& target) {
  OfflineDataset out = ds;
  for (int h = 0; h < ds.shape.horizon(); ++h) lift_period(out, ds, h, target, h);
  return out;
}

double period_optimum(const MarkovAttackInstance& inst, int h) {
  const GameShape& g = inst.dataset.shape;
  MarkovAttackInstance p;
  p.dataset.shape = GameShape(g.n_players(), g.n_states(), g.action_counts(), 1);
  p.dataset.bound = inst.bound;
  for (const auto& ep : inst.dataset.episodes) p.dataset.episodes.push_back({{ep.steps[h]}});
  p.target = JointPolicy(1, g.n_states());
  for (int s = 0; s < g.n_states(); ++s) p.target(0, s) = inst.target(h, s);
  p.widths.params = inst.widths.params;
  p.widths.rho_r = CellArray<double>(1, g.n_states(), g.num_joint());
  p.widths.rho_p = CellArray<double>(0, g.n_states(), g.num_joint());
  for (int s = 0; s < g.n_states(); ++s)
    for (int a = 0; a < g.num_joint(); ++a) p.widths.rho_r(0, s, a) = inst.widths.rho_r(h, s, a);
  p.iota = inst.iota;
  p.bound = inst.bound;
  return solve_markov_attack(p).cost;
}

CostBoundsReport cost_bounds(const MarkovAttackInstance& inst, const std::optional<std::vector<double>>& period_optima,
                             std::optional<double> full_optimum) {
  inst.validate();
  const GameShape& g = inst.dataset.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  OfflineDataset ds = inst.dataset;
  ds.bound = inst.bound;
  const VisitCounts vc = visit_counts(ds);
  const double b = inst.bound;
  CostBoundsReport r;
  r.universal_upper = static_cast<double>(vc.max) * H * S * n * A * 2 * b;

  std::vector<double> opt(H);
  bool all_solved = true;
  for (int h = 0; h < H; ++h) {
    if (period_optima && static_cast<int>(period_optima->size()) == H) {
      opt[h] = (*period_optima)[h];
    } else {
      try {
        opt[h] = period_optimum(inst, h);
      } catch (const Infeasible&) {
        opt[h] = kInf;
        all_solved = false;
      }
    }
    PeriodBounds pb;
    pb.period = h;
    pb.n_min = vc.min_h[h];
    pb.n_max = vc.max_h[h];
    pb.delta = delta_h(period_instance(inst, h));
    pb.lower = pb.n_min * pb.delta.delta;
    pb.upper = pb.n_max * pb.delta.delta;
    pb.optimum = opt[h];
    r.periods.push_back(pb);
  }
  const double sum_opt = std::accumulate(opt.begin(), opt.end(), 0.0);
  r.decomposition_lower = opt[H - 1];

  const FeasibilityCheck feas = markov_feasibility_condition(inst);
  if (!std::isfinite(b)) {
    r.decomposition_note = "upper decomposition needs a finite b";
  } else if (!feas.holds) {
    r.decomposition_note = "feasibility condition fails, upper decomposition not emitted";
  } else if (!all_solved) {
    r.decomposition_note = "a period restriction is infeasible";
  } else {
    double rho_max = 0.0;
    for (double w : inst.widths.rho_r.data()) rho_max = std::max(rho_max, w);
    r.decomposition_upper = sum_opt + 2 * b * n * H * S * vc.max +
                            static_cast<double>(H) * H * rho_max * S * n * A * vc.max;
  }

  bool uniform = true;
  const MleEstimate est = mle_game(ds);
  for (int h = 0; h + 1 < H && uniform; ++h)
    for (int s = 0; s < S && uniform; ++s)
      for (int a = 0; a < A && uniform; ++a)
        uniform = uniform_transition_in_ci(est.transitions.row(h, s, a), inst.widths.rho_p(h, s, a), S);
  if (uniform && all_solved) r.uniform_lower = sum_opt;

  double rho = 0.0;
  if (uniform && is_worst_case_pattern(inst, &rho)) {
    const int act = g.actions(0);
    r.worst_case_lower = static_cast<double>(vc.min) * H * S * n * (A / act) * (2 * b + 2 * rho + inst.iota);
  }
  r.optimum = full_optimum;
  return r;
}

Json cost_bounds_json(const CostBoundsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json periods = Json::array();
  for (const auto& p : r.periods) {
    periods.push_back({{"period", p.period},
                       {"n_min", p.n_min},
                       {"n_max", p.n_max},
                       {"gap_total", p.delta.gap_total},
                       {"overflow_total", p.delta.overflow_total},
                       {"overlap_total", p.delta.overlap_total},
                       {"delta", p.delta.delta},
                       {"lower", p.lower},
                       {"upper", p.upper},
                       {"optimum", std::isfinite(p.optimum) ? Json(p.optimum) : Json(nullptr)}});
  }
  Json out = {
      {"universal", {{"lower", r.universal_lower}, {"upper", r.universal_upper}}},
      {"decomposition",
       {{"lower", std::isfinite(r.decomposition_lower) ? Json(r.decomposition_lower) : Json(nullptr)},
        {"upper", opt(r.decomposition_upper)},
        {"note", r.decomposition_note}}},
      {"uniform_transitions_lower", opt(r.uniform_lower)},
      {"worst_case_lower", opt(r.worst_case_lower)},
      {"period_sandwich", periods},
      {"optimum", opt(r.optimum)},
  };
  return out;
}

MarkovAttackInstance worst_case_instance(int n, int actions, int n_states, int horizon, int visits, double bound,
                                         double rho, double iota) {
  if (n < 1 || actions < 1 || n_states < 1 || horizon < 1 || visits < 1) {
    throw InvalidArgument("worst-case parameters must be positive");
  }
  if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidArgument("worst-case b must be finite and positive");
  if (!(rho >= 0.0)) throw InvalidArgument("worst-case rho must be nonnegative");
  if (!(iota >= 0.0) || iota >= bound) throw InvalidMargin("worst-case iota must lie in [0, b)");
  const GameShape g(n, n_states, std::vector<int>(n, actions), horizon);
  const int A = g.num_joint();
  const int M = n_states * A;
  OfflineDataset ds;
  ds.shape = g;
  ds.bound = bound;
  // Episode k = t*M + x visits cell (x + h*t*A) mod M at period h, so each
  // round t is a bijection onto cells and the next state advances by t.
  for (int t = 0; t < visits; ++t)
    for (int x = 0; x < M; ++x) {
      Episode ep;
      for (int h = 0; h < horizon; ++h) {
        const int cell = static_cast<int>((x + static_cast<long long>(h) * t * A) % M);
        Step st;
        st.s = cell / A;
        st.joint = cell % A;
        st.r.resize(n);
        for (int i = 0; i < n; ++i) st.r[i] = g.action_of(st.joint, i) == 0 ? -bound : bound;
        ep.steps.push_back(std::move(st));
      }
      ds.episodes.push_back(std::move(ep));
    }
  MarkovAttackInstance inst;
  inst.widths = constant_widths(g, rho, 0.0);
  inst.dataset = std::move(ds);
  inst.target = JointPolicy::all_zeros(g);
  inst.iota = iota;
  inst.bound = bound;
  inst.validate();
  return inst;
}

bool is_worst_case_pattern(const MarkovAttackInstance& inst, double* rho) {
  const GameShape& g = inst.dataset.shape;
  const double b = inst.bound;
  if (!std::isfinite(b)) return false;
  for (int i = 1; i < g.n_players(); ++i)
    if (g.actions(i) != g.actions(0)) return false;
  const auto& rr = inst.widths.rho_r.data();
  if (rr.empty()) return false;
  for (double w : rr)
    if (w != rr.front()) return false;
  for (double w : inst.widths.rho_p.data())
    if (w != 0.0) return false;
  const VisitCounts vc = visit_counts(inst.dataset);
  if (vc.min != vc.max) return false;
  for (const auto& ep : inst.dataset.episodes)
    for (int h = 0; h < static_cast<int>(ep.steps.size()); ++h) {
      const Step& st = ep.steps[h];
      const int t = inst.target(h, st.s);
      for (int i = 0; i < g.n_players(); ++i) {
        const double want = g.action_of(st.joint, i) == g.action_of(t, i) ? -b : b;
        if (st.r[i] != want) return false;
      }
    }
  if (rho != nullptr) *rho = rr.front();
  return true;
}

double worst_case_cost(int n, int actions, int n_states, int horizon, int visits, double bound, double rho,
                       double iota) {
  const double others = std::pow(static_cast<double>(actions), n - 1);
  return static_cast<double>(visits) * n_states * horizon * n * others *
         (2 * bound + (actions - 1) * (2 * rho + iota));
}

GapEstimate random_game_gap_estimate(int n, int actions, double bound, int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("samples must be positive");
  const GameShape g(n, 1, std::vector<int>(n, actions), 1);
  PeriodInstance p;
  p.shape = g;
  p.mle = RewardTable(g);
  p.counts = CellArray<int>(1, 1, g.num_joint(), 1);
  p.rho_r = CellArray<double>(1, 1, g.num_joint(), 0.0);
  p.target = {0};
  p.bound = kInf;
  const Rng root(seed);
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < samples; ++k) {
    Rng rng = root.split(static_cast<std::uint64_t>(k));
    for (double& r : p.mle.data()) r = bound > 0 ? rng.uniform(-bound, bound) : 0.0;
    const double x = dominance_gaps(p).sum();
    sum += x;
    sq += x * x;
  }
  GapEstimate out;
  out.samples = samples;
  out.mean = sum / samples;
  const double var = samples > 1 ? std::max(0.0, (sq - samples * out.mean * out.mean) / (samples - 1)) : 0.0;
  out.stderr_ = std::sqrt(var / samples);
  return out;
}

}  // namespace mgpoison
