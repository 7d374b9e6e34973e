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

#include "mgpoison/markov_attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "attack_common.hpp"

namespace mgpoison {

using detail::RewardVars;

void MarkovAttackInstance::validate() const {
  const GameShape& g = dataset.shape;
  target.validate(g);
  if (!(iota >= 0.0)) throw InvalidMargin("iota must be nonnegative");
  if (!(bound > 0.0)) throw InvalidArgument("bound must be positive");
  if (widths.rho_r.horizon() != g.horizon() || widths.rho_r.n_states() != g.n_states() ||
      widths.rho_r.n_joint() != g.num_joint()) {
    throw InvalidArgument("reward width table shape mismatch");
  }
  if (widths.rho_p.horizon() != g.horizon() - 1 ||
      (g.horizon() > 1 && (widths.rho_p.n_states() != g.n_states() || widths.rho_p.n_joint() != g.num_joint()))) {
    throw InvalidArgument("transition width table shape mismatch");
  }
  for (double w : widths.rho_r.data())
    if (!(w >= 0.0)) throw InvalidArgument("negative reward width");
  for (double w : widths.rho_p.data())
    if (!(w >= 0.0)) throw InvalidArgument("negative transition width");
  CoverageReport cov = check_full_coverage(visit_counts(dataset));
  if (!cov.satisfied) throw UncoveredCell("dataset violates full coverage", cov.uncovered);
}

MarkovAttackInstance make_markov_instance(OfflineDataset dataset, JointPolicy target, const WidthParams& widths,
                                          double iota) {
  MarkovAttackInstance inst;
  CoverageReport cov = check_full_coverage(visit_counts(dataset));
  if (!cov.satisfied) throw UncoveredCell("dataset violates full coverage", cov.uncovered);
  inst.widths = compute_widths(widths, visit_counts(dataset), dataset.shape, dataset.bound);
  inst.bound = dataset.bound;
  inst.dataset = std::move(dataset);
  inst.target = std::move(target);
  inst.iota = iota;
  inst.validate();
  return inst;
}

const char* to_string(UpperRewardTerm t) {
  return t == UpperRewardTerm::kUnclipped ? "unclipped" : "clip-target";
}

namespace {

struct MarkovBuilt {
  LpModel model;
  RewardVars vars;
  RewardTable mle;
  TransitionTable p_hat;
  std::vector<int> q_lo, q_hi;  // PlayerTable layout
  // Dual triples per (i, h<H-1, s, a): u[S], v[S], w for lower and upper.
  std::vector<int> dual_lo, dual_hi;  // start index of the (2S+1) block
};

MarkovBuilt build_markov(const MarkovAttackInstance& inst, const MarkovLpOptions& opt) {
  inst.validate();
  OfflineDataset ds = inst.dataset;
  ds.bound = inst.bound;
  const GameShape& g = ds.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  if (opt.upper == UpperRewardTerm::kClipTarget && !std::isfinite(inst.bound)) {
    throw InvalidArgument("clip-target encoding needs a finite b");
  }
  MarkovBuilt out;
  MleEstimate est = mle_game(ds);
  out.mle = est.rewards;
  out.p_hat = est.transitions;
  LpModel& m = out.model;
  out.vars = detail::add_reward_variables(m, ds, visit_counts(ds), out.mle, opt.granularity);
  const std::size_t cells = static_cast<std::size_t>(n) * H * S * A;
  out.q_lo.resize(cells);
  out.q_hi.resize(cells);
  out.dual_lo.assign(cells, -1);
  out.dual_hi.assign(cells, -1);
  auto cell = [&](int i, int h, int s, int a) { return out.vars.cell_index(g, i, h, s, a); };

  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const int c = cell(i, h, s, a);
          out.q_lo[c] = m.add_variable(detail::cell_name("Qlo", i, h, s, a), -kInf, kInf);
          out.q_hi[c] = m.add_variable(detail::cell_name("Qhi", i, h, s, a), -kInf, kInf);
        }

  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const int c = cell(i, h, s, a);
          const auto& r = out.vars.expr[c];
          const double rho = inst.widths.rho_r(h, s, a);
          const bool clip_here = opt.upper == UpperRewardTerm::kClipTarget && a == inst.target(h, s);
          std::vector<LpTerm> lo_row = detail::concat({{out.q_lo[c], 1.0}}, r.terms, -1.0);
          std::vector<LpTerm> hi_row = {{out.q_hi[c], 1.0}};
          if (!clip_here) hi_row = detail::concat(hi_row, r.terms, -1.0);
          const double hi_rhs = clip_here ? inst.bound : r.constant + rho;
          if (h + 1 < H) {
            const double rp = inst.widths.rho_p(h, s, a);
            const double* p = out.p_hat.row(h, s, a);
            out.dual_lo[c] = m.num_variables();
            for (int t = 0; t < S; ++t) m.add_variable(detail::cell_name("ulo", i, h, s, a) + std::to_string(t), 0, kInf);
            for (int t = 0; t < S; ++t) m.add_variable(detail::cell_name("vlo", i, h, s, a) + std::to_string(t), 0, kInf);
            m.add_variable(detail::cell_name("wlo", i, h, s, a), -kInf, kInf);
            out.dual_hi[c] = m.num_variables();
            for (int t = 0; t < S; ++t) m.add_variable(detail::cell_name("uhi", i, h, s, a) + std::to_string(t), 0, kInf);
            for (int t = 0; t < S; ++t) m.add_variable(detail::cell_name("vhi", i, h, s, a) + std::to_string(t), 0, kInf);
            m.add_variable(detail::cell_name("whi", i, h, s, a), -kInf, kInf);
            const int ul = out.dual_lo[c], vl = ul + S, wl = ul + 2 * S;
            const int uh = out.dual_hi[c], vh = uh + S, wh = uh + 2 * S;
            for (int t = 0; t < S; ++t) {
              lo_row.push_back({ul + t, p[t] + rp});
              lo_row.push_back({vl + t, -p[t] + rp});
              hi_row.push_back({uh + t, -(p[t] + rp)});
              hi_row.push_back({vh + t, -(-p[t] + rp)});
              const int next = inst.target(h + 1, t);
              m.add_constraint(detail::cell_name("dlo", i, h, s, a) + std::to_string(t),
                               {{ul + t, 1.0}, {vl + t, -1.0}, {wl, 1.0}, {out.q_lo[cell(i, h + 1, t, next)], 1.0}},
                               Sense::kGreaterEqual, 0.0);
              m.add_constraint(detail::cell_name("dhi", i, h, s, a) + std::to_string(t),
                               {{uh + t, 1.0}, {vh + t, -1.0}, {wh, 1.0}, {out.q_hi[cell(i, h + 1, t, next)], -1.0}},
                               Sense::kGreaterEqual, 0.0);
            }
            lo_row.push_back({wl, 1.0});
            hi_row.push_back({wh, -1.0});
          }
          m.add_constraint(detail::cell_name("lower", i, h, s, a), std::move(lo_row), Sense::kEqual,
                           r.constant - rho);
          m.add_constraint(detail::cell_name("upper", i, h, s, a), std::move(hi_row), Sense::kEqual, hi_rhs);
        }

  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s) {
        const int ti = g.action_of(inst.target(h, s), i);
        for (int a = 0; a < A; ++a) {
          if (g.action_of(a, i) == ti) continue;
          const int t = g.with_action(a, i, ti);
          m.add_constraint(detail::cell_name("sep", i, h, s, a),
                           {{out.q_hi[cell(i, h, s, a)], 1.0}, {out.q_lo[cell(i, h, s, t)], -1.0}},
                           Sense::kLessEqual, -inst.iota);
        }
      }
  return out;
}

}  // namespace

LpModel build_markov_attack_lp(const MarkovAttackInstance& inst, const MarkovLpOptions& opt) {
  return build_markov(inst, opt).model;
}

LpTally markov_lp_tally(const GameShape& g, int K, Granularity gran) {
  const long long n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  long long sep = 0;
  for (int i = 0; i < g.n_players(); ++i) sep += (g.actions(i) - 1) * (A / g.actions(i));
  sep *= H * S;
  const long long cells = n * H * S * A;
  const long long dual_cells = n * (H - 1) * S * A;
  long long vars = 2 * cells + dual_cells * 2 * (2 * S + 1);
  long long rows = 2 * cells + dual_cells * 2 * S + sep;
  if (gran == Granularity::kCell) {
    vars += 2 * cells;
  } else {
    vars += 2LL * K * H * n + cells;
    rows += cells;
  }
  return {static_cast<int>(vars), static_cast<int>(rows)};
}

FeasibilityCheck markov_feasibility_condition(const MarkovAttackInstance& inst) {
  const GameShape& g = inst.dataset.shape;
  if (!std::isfinite(inst.bound)) return {};
  const int H = g.horizon();
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < g.n_states(); ++s)
      for (int a = 0; a < g.num_joint(); ++a) {
        const double thr = 2 * inst.bound - (H + 1) * inst.widths.rho_r(h, s, a);
        if (inst.iota > thr) return {false, {h, s, a}, thr};
      }
  return {};
}

RequiredCount required_counts_generic(const std::function<double(double)>& f_inverse, double bound, double iota,
                                      int horizon) {
  if (!(iota < 2 * bound)) throw InvalidMargin("required counts need iota < 2b");
  const double width = (2 * bound - iota) / (horizon + 1);
  RequiredCount out;
  const double inv = f_inverse(width);
  out.exact = inv > 0 ? 1.0 / inv : kInf;
  if (!std::isfinite(out.exact) || out.exact > 9e15) {
    out.overflow = true;
    out.count = -1;
    return out;
  }
  out.count = static_cast<long long>(std::ceil(out.exact - 1e-9));
  out.count = std::max<long long>(out.count, 1);
  return out;
}

RequiredCount required_counts(const GameShape& g, double bound, double iota, double delta, double reward_const) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidDelta("delta must lie in (0, 1)");
  if (!std::isfinite(bound)) throw InvalidArgument("required counts need a finite b");
  const double lg = std::log(static_cast<double>(g.horizon()) * g.n_states() * g.num_joint() / delta);
  // rho(N) = c b sqrt(lg / N); f^{-1}(w) returns 1/N.
  auto f_inverse = [&](double w) { return (w * w) / (reward_const * reward_const * bound * bound * lg); };
  return required_counts_generic(f_inverse, bound, iota, g.horizon());
}

QBounds exact_confidence_bounds(const GameShape& g, const RewardTable& center, const TransitionTable& p_hat,
                                const ConfidenceWidths& w, double bound, const JointPolicy& target, bool clip) {
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  QBounds out{PlayerTable(g), PlayerTable(g)};
  std::vector<double> vlo(S), vhi(S);
  for (int i = 0; i < n; ++i)
    for (int h = H - 1; h >= 0; --h) {
      if (h + 1 < H) {
        for (int t = 0; t < S; ++t) {
          vlo[t] = out.q_lower(i, h + 1, t, target(h + 1, t));
          vhi[t] = out.q_upper(i, h + 1, t, target(h + 1, t));
        }
      }
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const double r = center(i, h, s, a), rho = w.rho_r(h, s, a);
          double lo = r - rho, hi = r + rho;
          if (clip) {
            lo = std::max(-bound, lo);
            hi = std::min(bound, hi);
          }
          if (h + 1 < H) {
            const double rp = w.rho_p(h, s, a);
            lo += l1_ball_min(p_hat.row(h, s, a), vlo.data(), S, rp);
            hi += l1_ball_max(p_hat.row(h, s, a), vhi.data(), S, rp);
          }
          out.q_lower(i, h, s, a) = lo;
          out.q_upper(i, h, s, a) = hi;
        }
    }
  return out;
}

namespace {

AttackResult solve_one(const MarkovAttackInstance& inst, const MarkovLpOptions& opt) {
  MarkovBuilt built = build_markov(inst, opt);
  LpSolution sol = solve(built.model);
  if (sol.status == LpStatus::kInfeasible) throw Infeasible("Markov attack LP is infeasible");
  if (sol.status == LpStatus::kUnbounded) throw NumericalFailure("Markov attack LP reported unbounded");
  const GameShape& g = inst.dataset.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  OfflineDataset ds = inst.dataset;
  ds.bound = inst.bound;

  AttackResult res;
  res.mode = "markov";
  res.encoding = to_string(opt.upper);
  res.status = sol.status;
  res.lp_objective = sol.objective_value;
  res.lp_variables = built.model.num_variables();
  res.lp_constraints = built.model.num_constraints();
  res.poisoned = detail::recover_poisoned(ds, built.vars, sol, built.mle);
  res.poisoned_mle = mle_game(res.poisoned).rewards;
  res.cost = l1_distance(ds, res.poisoned);
  if (std::abs(res.cost - sol.objective_value) > 1e-6 * std::max(1.0, res.cost)) {
    throw NumericalFailure("recovered cost disagrees with the LP objective");
  }

  res.has_lp_bounds = true;
  res.lp_bounds = {PlayerTable(g), PlayerTable(g)};
  res.lp_inner_lower = PlayerTable(g);
  res.lp_inner_upper = PlayerTable(g);
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const int c = built.vars.cell_index(g, i, h, s, a);
          res.lp_bounds.q_lower(i, h, s, a) = sol.values[built.q_lo[c]];
          res.lp_bounds.q_upper(i, h, s, a) = sol.values[built.q_hi[c]];
          if (h + 1 >= H) continue;
          const double rp = inst.widths.rho_p(h, s, a);
          const double* p = built.p_hat.row(h, s, a);
          double lo = 0.0, hi = 0.0;
          const int ul = built.dual_lo[c], uh = built.dual_hi[c];
          for (int t = 0; t < S; ++t) {
            const double u1 = sol.values[ul + t], v1 = sol.values[ul + S + t];
            const double u2 = sol.values[uh + t], v2 = sol.values[uh + S + t];
            lo += p[t] * (u1 - v1) + rp * (u1 + v1);
            hi += p[t] * (u2 - v2) + rp * (u2 + v2);
          }
          res.lp_inner_lower(i, h, s, a) = -(lo + sol.values[ul + 2 * S]);
          res.lp_inner_upper(i, h, s, a) = hi + sol.values[uh + 2 * S];
        }

  res.exact_bounds = exact_confidence_bounds(g, res.poisoned_mle, built.p_hat, inst.widths, inst.bound,
                                             inst.target, true);
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const double r = res.poisoned_mle(i, h, s, a), rho = inst.widths.rho_r(h, s, a);
          if (r + rho > inst.bound) res.clip_bindings.push_back({i, h, s, a, true});
          if (r - rho < -inst.bound) res.clip_bindings.push_back({i, h, s, a, false});
          const int ti = g.action_of(inst.target(h, s), i);
          if (g.action_of(a, i) == ti) continue;
          const int t = g.with_action(a, i, ti);
          const double margin = res.exact_bounds.q_lower(i, h, s, t) - res.exact_bounds.q_upper(i, h, s, a);
          res.margins.push_back({i, h, s, a, margin});
          res.min_margin = std::min(res.min_margin, margin);
        }
  if (res.min_margin < inst.iota - 1e-6) {
    throw NumericalFailure("exact separation margin below iota on the solved rewards");
  }
  return res;
}

}  // namespace

AttackResult solve_markov_attack(const MarkovAttackInstance& inst, const MarkovSolveOptions& opt) {
  MarkovLpOptions lp;
  lp.granularity = opt.granularity;
  const bool finite_b = std::isfinite(inst.bound);
  if (opt.encoding == EncodingChoice::kUnclipped || (!finite_b && opt.encoding == EncodingChoice::kBest)) {
    lp.upper = UpperRewardTerm::kUnclipped;
    return solve_one(inst, lp);
  }
  if (opt.encoding == EncodingChoice::kClipTarget) {
    lp.upper = UpperRewardTerm::kClipTarget;
    return solve_one(inst, lp);
  }
  // Best of both sound encodings.
  lp.upper = UpperRewardTerm::kClipTarget;
  AttackResult clipped = solve_one(inst, lp);
  lp.upper = UpperRewardTerm::kUnclipped;
  try {
    AttackResult plain = solve_one(inst, lp);
    if (plain.cost <= clipped.cost + 1e-9) return plain;
  } catch (const Infeasible&) {
  }
  return clipped;
}

int default_thread_count() {
  if (const char* env = std::getenv("MGPOISON_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct SampleOutcome {
  double margin = kInf;
  double sandwich = 0.0;
  double dual = 0.0;
  bool failed = false;
  Json game;
};

SampleOutcome check_sample(const MarkovAttackInstance& inst, const AttackResult* res, const QBounds& exact,
                           const MarkovGame& game, double tol) {
  const GameShape& g = game.shape;
  const int n = g.n_players(), H = g.horizon(), S = g.n_states(), A = g.num_joint();
  SampleOutcome out;
  MpdseCheck chk = is_iota_mpdse(game, inst.target, inst.iota);
  out.margin = chk.worst_margin;
  QTables qt = q_values(game, inst.target);
  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const double q = qt.q(i, h, s, a);
          out.sandwich = std::max({out.sandwich, exact.q_lower(i, h, s, a) - q, q - exact.q_upper(i, h, s, a)});
          if (res == nullptr || !res->has_lp_bounds) continue;
          out.sandwich = std::max({out.sandwich, res->lp_bounds.q_lower(i, h, s, a) - q,
                                   q - res->lp_bounds.q_upper(i, h, s, a)});
          if (h + 1 >= H) continue;
          const double* p = game.transitions.row(h, s, a);
          double lo = 0.0, hi = 0.0;
          for (int t = 0; t < S; ++t) {
            const int next = inst.target(h + 1, t);
            lo += p[t] * res->lp_bounds.q_lower(i, h + 1, t, next);
            hi += p[t] * res->lp_bounds.q_upper(i, h + 1, t, next);
          }
          out.dual = std::max({out.dual, res->lp_inner_lower(i, h, s, a) - lo, hi - res->lp_inner_upper(i, h, s, a)});
        }
  out.failed = !chk.holds || out.sandwich > tol || out.dual > tol;
  if (out.failed) out.game = game_json(game);
  return out;
}

}  // namespace

static VerificationReport verify_impl(const MarkovAttackInstance& inst, const RewardTable& center,
                                      const AttackResult* res, const VerifyOptions& opt) {
  const GameShape& g = inst.dataset.shape;
  PlausibleGameSampler smp;
  smp.shape = g;
  smp.center_rewards = center;
  smp.center_transitions = mle_game(inst.dataset).transitions;
  smp.widths = inst.widths;
  smp.bound = inst.bound;
  smp.clip_rewards = opt.clip_rewards;
  smp.seed = opt.seed;
  const QBounds exact = exact_confidence_bounds(g, center, smp.center_transitions, inst.widths, inst.bound,
                                                inst.target, opt.clip_rewards);

  bool degenerate = true;
  for (double w : inst.widths.rho_r.data()) degenerate = degenerate && w == 0.0;
  for (double w : inst.widths.rho_p.data()) degenerate = degenerate && w == 0.0;
  const int samples = degenerate ? 1 : opt.samples;

  std::vector<SampleOutcome> outcomes(samples);
  const Rng root(opt.seed);
  auto work = [&](int k) {
    Rng rng = root.split(static_cast<std::uint64_t>(k));
    static constexpr SampleStrategy kCycle[] = {SampleStrategy::kExtremeRewards,
                                                SampleStrategy::kL1VertexTransitions,
                                                SampleStrategy::kRandomInterior};
    MarkovGame game = sample_plausible_game(smp, kCycle[k % 3], rng);
    outcomes[k] = check_sample(inst, res, exact, game, opt.tol);
  };
  const int threads = std::max(1, std::min(opt.threads > 0 ? opt.threads : default_thread_count(), samples));
  if (threads == 1) {
    for (int k = 0; k < samples; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex mu;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int k = t; k < samples; k += threads) work(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  }

  VerificationReport rep;
  rep.seed = opt.seed;
  rep.samples = samples;
  for (const auto& o : outcomes) {
    rep.worst_margin = std::min(rep.worst_margin, o.margin);
    rep.worst_sandwich = std::max(rep.worst_sandwich, o.sandwich);
    rep.worst_dual = std::max(rep.worst_dual, o.dual);
    if (o.margin >= -1e-9) ++rep.passes;
    if (o.failed && rep.failing_game.is_null()) rep.failing_game = o.game;
  }
  rep.sandwich_ok = rep.worst_sandwich <= opt.tol;
  rep.dual_sound = rep.worst_dual <= opt.tol;

  if (inst.iota > 0 && policy_count(g, 64) <= 64) {
    rep.uniqueness_checked = true;
    const TransitionTable& p = smp.center_transitions;
    const long long total = policy_count(g, 64);
    for (long long k = 0; k < total; ++k) {
      JointPolicy pi = policy_from_ordinal(g, k);
      if (pi == inst.target) continue;
      if (is_iota_mpdse(g, center, p, pi, inst.iota).holds) ++rep.other_equilibria;
    }
    rep.unique = rep.other_equilibria == 0;
  }
  return rep;
}

VerificationReport run_verification(const MarkovAttackInstance& inst, const AttackResult& result,
                                    const VerifyOptions& opt) {
  MarkovAttackInstance poisoned = inst;
  poisoned.dataset = result.poisoned;
  return verify_impl(poisoned, result.poisoned_mle, &result, opt);
}

VerificationReport verify_attack(const MarkovAttackInstance& inst, const AttackResult& result,
                                 const VerifyOptions& opt) {
  VerificationReport rep = run_verification(inst, result, opt);
  if (!rep.ok()) {
    throw VerificationFailure("attack verification failed: " + std::to_string(rep.passes) + "/" +
                                  std::to_string(rep.samples) + " samples passed",
                              rep.failing_game.is_null() ? std::string("null") : rep.failing_game.dump());
  }
  return rep;
}

VerificationReport verify_poisoned_dataset(const MarkovAttackInstance& inst, const VerifyOptions& opt) {
  return verify_impl(inst, mle_game(inst.dataset).rewards, nullptr, opt);
}

}  // namespace mgpoison
