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

#include "mgpoison/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "mgpoison/cost_analysis.hpp"
#include "mgpoison/learners.hpp"

namespace mgpoison {
namespace {

struct Config {
  std::string command;
  // gen
  std::string family;
  int n = 2, actions = 2, n_states = 1, horizon = 1, visits = 1, episodes = 0;
  std::vector<int> counts;
  std::optional<double> bound;
  std::uint64_t seed = 0;
  // instance
  std::string data, out, report, target = "all-zeros";
  std::optional<double> iota;
  std::string widths;
  double rho_r = 0.0, rho_p = 0.0, reward_const = 2.0, beta_c = 1.0;
  std::optional<double> delta;
  std::string mode = "auto", learner = "ci", granularity, encoding = "best";
  int samples = 0, threads = 0;
  bool solve_full = false;
  std::string bonus = "pessimistic";
};

Json config_json(const Config& c) {
  Json j = {{"command", c.command}, {"seed", c.seed}};
  if (c.command == "gen") {
    j["family"] = c.family;
    j["n"] = c.n;
    j["A"] = c.actions;
    j["S"] = c.n_states;
    j["H"] = c.horizon;
    j["N"] = c.visits;
    j["K"] = c.episodes;
    j["counts"] = c.counts;
    j["b"] = c.bound ? bound_to_json(*c.bound) : Json(nullptr);
    j["out"] = c.out;
    return j;
  }
  j["data"] = c.data;
  j["target"] = c.target;
  j["iota"] = c.iota ? Json(*c.iota) : Json(nullptr);
  j["b"] = c.bound ? bound_to_json(*c.bound) : Json(nullptr);
  j["widths"] = {{"mode", c.widths},
                 {"rho_r", c.rho_r},
                 {"rho_p", c.rho_p},
                 {"delta", c.delta ? Json(*c.delta) : Json(nullptr)},
                 {"reward_const", c.reward_const},
                 {"beta_c", c.beta_c}};
  j["mode"] = c.mode;
  j["learner"] = c.learner;
  j["granularity"] = c.granularity;
  j["encoding"] = c.encoding;
  j["samples"] = c.samples;
  j["threads"] = c.threads > 0 ? c.threads : default_thread_count();
  j["bonus"] = c.bonus;
  return j;
}

void emit(const Config& c, const Json& report, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (c.report.empty()) {
    out << text;
  } else {
    write_file_atomic(c.report, text);
  }
}

// A 2x2 game where (0,0) is already dominant.
OfflineDataset dominant_example_dataset(const std::vector<int>& counts, double b) {
  static const double kPayoff[4][2] = {{3, 3}, {1, 2}, {2, 1}, {0, 0}};
  OfflineDataset ds;
  ds.shape = GameShape(2, 1, {2, 2}, 1);
  ds.bound = b;
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < counts[a]; ++k) {
      ds.episodes.push_back({{Step{0, a, {kPayoff[a][0], kPayoff[a][1]}}}});
    }
  return ds;
}

// Uniform rewards; the first |S||A| episodes sweep every cell at every period.
OfflineDataset random_dataset(const Config& c, double b) {
  OfflineDataset ds;
  ds.shape = GameShape(c.n, c.n_states, std::vector<int>(c.n, c.actions), c.horizon);
  ds.bound = b;
  const int A = ds.shape.num_joint(), M = c.n_states * A;
  const int K = std::max(c.episodes, M);
  Rng rng(c.seed);
  const double hi = std::isfinite(b) ? b : 1.0;
  for (int k = 0; k < K; ++k) {
    Episode ep;
    for (int h = 0; h < c.horizon; ++h) {
      Step st;
      const int cell = k < M ? k : static_cast<int>(rng.below(M));
      st.s = cell / A;
      st.joint = cell % A;
      for (int i = 0; i < c.n; ++i) st.r.push_back(rng.uniform(-hi, hi));
      ep.steps.push_back(std::move(st));
    }
    ds.episodes.push_back(std::move(ep));
  }
  return ds;
}

int run_gen(const Config& c, std::ostream& out) {
  if (c.out.empty()) throw InvalidArgument("--out is required");
  OfflineDataset ds;
  if (c.family == "worst-case") {
    if (!c.bound) throw InvalidArgument("--b is required");
    ds = worst_case_instance(c.n, c.actions, c.n_states, c.horizon, c.visits, *c.bound, 0.0, 0.0).dataset;
  } else if (c.family == "dominant-example") {
    std::vector<int> counts = c.counts.empty() ? std::vector<int>{1, 1, 1, 1} : c.counts;
    if (counts.size() != 4) throw InvalidArgument("--counts needs four values");
    for (int x : counts)
      if (x < 0) throw InvalidArgument("counts must be nonnegative");
    ds = dominant_example_dataset(counts, c.bound.value_or(3.0));
  } else if (c.family == "random") {
    if (!c.bound) throw InvalidArgument("--b is required");
    if (c.n < 1 || c.actions < 1 || c.n_states < 1 || c.horizon < 1) {
      throw InvalidArgument("shape parameters must be positive");
    }
    ds = random_dataset(c, *c.bound);
  } else {
    throw InvalidArgument("unknown family: " + c.family);
  }
  ds.validate();
  write_dataset(ds, c.out);
  const VisitCounts vc = visit_counts(ds);
  Json summary = {{"episodes", ds.n_episodes()},
                  {"n_min", vc.min},
                  {"n_max", vc.max},
                  {"header", header_path(c.out)},
                  {"episodes_file", episodes_path(c.out)},
                  {"config", config_json(c)}};
  out << summary.dump() << "\n";
  return kExitOk;
}

OfflineDataset load(const Config& c) {
  if (c.data.empty()) throw InvalidArgument("--data is required");
  if (!std::filesystem::exists(header_path(c.data)) || !std::filesystem::exists(episodes_path(c.data))) {
    throw InvalidArgument("dataset files not found for prefix " + c.data);
  }
  OfflineDataset ds = read_dataset(c.data);
  if (c.bound) ds.bound = *c.bound;
  ds.validate();
  return ds;
}

WidthParams width_params(const Config& c) {
  if (c.widths.empty()) throw InvalidArgument("--widths is required");
  WidthParams p;
  p.mode = width_mode_from_string(c.widths);
  p.rho_r = c.rho_r;
  p.rho_p = c.rho_p;
  p.reward_const = c.reward_const;
  p.beta_c = c.beta_c;
  if (p.mode == WidthMode::kHoeffding || p.mode == WidthMode::kBonusScale) {
    if (!c.delta) throw InvalidArgument("--delta is required for this width mode");
  }
  if (c.delta) {
    if (!(*c.delta > 0.0 && *c.delta < 1.0)) throw InvalidDelta("delta must lie in (0, 1)");
    p.delta = *c.delta;
  }
  return p;
}

double require_iota(const Config& c) {
  if (!c.iota) throw InvalidArgument("--iota is required");
  if (!(*c.iota >= 0.0)) throw InvalidMargin("iota must be nonnegative");
  return *c.iota;
}

JointPolicy load_target(const Config& c, const GameShape& g) {
  if (c.target == "all-zeros") return JointPolicy::all_zeros(g);
  const std::string text = !c.target.empty() && c.target.front() == '[' ? c.target : read_file(c.target);
  return policy_from_json(Json::parse(text), g);
}

bool is_bandit(const Config& c, const GameShape& g) {
  if (c.mode == "bandit") return true;
  if (c.mode == "markov") return false;
  if (c.mode != "auto") throw InvalidArgument("--mode must be auto, bandit or markov");
  return g.horizon() == 1 && g.n_states() == 1;
}

Granularity granularity(const Config& c, Granularity fallback) {
  if (c.granularity.empty()) return fallback;
  if (c.granularity == "cell") return Granularity::kCell;
  if (c.granularity == "episode") return Granularity::kEpisode;
  throw InvalidArgument("--granularity must be cell or episode");
}

EncodingChoice encoding(const Config& c) {
  if (c.encoding == "best") return EncodingChoice::kBest;
  if (c.encoding == "unclipped") return EncodingChoice::kUnclipped;
  if (c.encoding == "clip-target") return EncodingChoice::kClipTarget;
  throw InvalidArgument("--encoding must be best, unclipped or clip-target");
}

Json margins_json(const AttackResult& r) {
  Json m = Json::array();
  for (const auto& x : r.margins) {
    m.push_back({{"player", x.player}, {"h", x.h}, {"s", x.s}, {"deviation", x.deviation}, {"margin", x.margin}});
  }
  return m;
}

Json verify_json(const VerificationReport& v) {
  Json j = {{"samples", v.samples},
            {"passes", v.passes},
            {"worst_margin", std::isfinite(v.worst_margin) ? Json(v.worst_margin) : Json(nullptr)},
            {"uniqueness_checked", v.uniqueness_checked},
            {"unique", v.unique},
            {"other_equilibria", v.other_equilibria},
            {"worst_sandwich", v.worst_sandwich},
            {"worst_dual", v.worst_dual},
            {"seed", v.seed},
            {"ok", v.ok()}};
  if (!v.failing_game.is_null()) j["failing_game"] = v.failing_game;
  return j;
}

MarkovAttackInstance markov_instance(const Config& c, const OfflineDataset& ds) {
  return make_markov_instance(ds, load_target(c, ds.shape), width_params(c), require_iota(c));
}

int run_attack(const Config& c, std::ostream& out) {
  if (c.out.empty()) throw InvalidArgument("--out is required");
  const OfflineDataset ds = load(c);
  const double iota = require_iota(c);
  const WidthParams wp = width_params(c);
  Json report = {{"seed", c.seed}, {"config", config_json(c)}};
  AttackResult res;
  bool bandit = is_bandit(c, ds.shape);
  std::optional<MarkovAttackInstance> minst;
  try {
    if (bandit) {
      const JointPolicy tp = load_target(c, ds.shape);
      if (ds.shape.horizon() != 1 || ds.shape.n_states() != 1) throw InvalidArgument("bandit mode needs H = S = 1");
      BanditAttackInstance inst = make_bandit_instance(ds, tp(0, 0), wp, iota);
      BanditLpOptions opt;
      opt.granularity = granularity(c, Granularity::kEpisode);
      BanditLearner learner;
      if (c.learner == "mle") {
        learner = BanditLearner::kMle;
      } else if (c.learner == "ci") {
        learner = BanditLearner::kConfidenceBound;
      } else {
        throw InvalidArgument("--learner must be mle or ci");
      }
      try {
        res = solve_bandit_attack(inst, learner, opt);
      } catch (const Infeasible& e) {
        report["status"] = "infeasible";
        report["reason"] = e.what();
        const ConfidenceWidths& w = inst.widths;
        for (int a = 0; a < ds.shape.num_joint(); ++a) {
          const double rho = learner == BanditLearner::kMle ? 0.0 : w.rho_r(0, 0, a);
          if (iota > 2 * inst.bound - 2 * rho) {
            report["violated_cell"] = {{"h", 0}, {"s", 0}, {"a", a}, {"threshold", 2 * inst.bound - 2 * rho}};
            break;
          }
        }
        emit(c, report, out);
        return kExitInfeasible;
      }
    } else {
      minst = markov_instance(c, ds);
      MarkovSolveOptions opt;
      opt.granularity = granularity(c, Granularity::kCell);
      opt.encoding = encoding(c);
      try {
        res = solve_markov_attack(*minst, opt);
      } catch (const Infeasible& e) {
        report["status"] = "infeasible";
        report["reason"] = e.what();
        const FeasibilityCheck f = markov_feasibility_condition(*minst);
        if (!f.holds) {
          report["violated_cell"] = {{"h", f.cell.h}, {"s", f.cell.s}, {"a", f.cell.joint}, {"threshold", f.threshold}};
        }
        emit(c, report, out);
        return kExitInfeasible;
      }
    }
  } catch (const UncoveredCell& e) {
    Json cells = Json::array();
    for (const auto& x : e.cells()) cells.push_back({{"h", x.h}, {"s", x.s}, {"a", x.joint}});
    report["status"] = "uncovered";
    report["uncovered_cells"] = cells;
    emit(c, report, out);
    return kExitCoverage;
  }

  write_dataset(res.poisoned, c.out);
  report["mode"] = res.mode;
  report["status"] = to_string(res.status);
  report["cost"] = res.cost;
  report["lp_objective"] = res.lp_objective;
  report["lp_variables"] = res.lp_variables;
  report["lp_constraints"] = res.lp_constraints;
  report["encoding"] = res.encoding;
  report["mle_after"] = player_table_json(res.poisoned_mle);
  report["margins"] = margins_json(res);
  report["min_margin"] = std::isfinite(res.min_margin) ? Json(res.min_margin) : Json(nullptr);
  report["poisoned"] = c.out;
  int code = kExitOk;
  if (minst) {
    report["q_lower"] = player_table_json(res.lp_bounds.q_lower);
    report["q_upper"] = player_table_json(res.lp_bounds.q_upper);
    report["exact_q_lower"] = player_table_json(res.exact_bounds.q_lower);
    report["exact_q_upper"] = player_table_json(res.exact_bounds.q_upper);
    report["widths"] = widths_json(minst->widths);
    if (c.samples > 0) {
      VerifyOptions vo;
      vo.samples = c.samples;
      vo.seed = c.seed;
      vo.threads = c.threads;
      const VerificationReport v = run_verification(*minst, res, vo);
      report["verify"] = verify_json(v);
      if (!v.ok()) code = kExitVerification;
    }
  }
  emit(c, report, out);
  return code;
}

int run_verify(const Config& c, std::ostream& out) {
  const OfflineDataset ds = load(c);
  const MarkovAttackInstance inst = markov_instance(c, ds);
  VerifyOptions vo;
  vo.samples = c.samples > 0 ? c.samples : 500;
  vo.seed = c.seed;
  vo.threads = c.threads;
  const VerificationReport v = verify_poisoned_dataset(inst, vo);
  Json report = {{"seed", c.seed}, {"config", config_json(c)}, {"verify", verify_json(v)}};
  emit(c, report, out);
  return v.ok() ? kExitOk : kExitVerification;
}

int run_bounds(const Config& c, std::ostream& out) {
  const OfflineDataset ds = load(c);
  const MarkovAttackInstance inst = markov_instance(c, ds);
  std::optional<double> full;
  if (c.solve_full) {
    try {
      full = solve_markov_attack(inst).cost;
    } catch (const Infeasible&) {
      full = kInf;
    }
  }
  CostBoundsReport r = cost_bounds(inst, std::nullopt, full);
  Json report = {{"seed", c.seed}, {"config", config_json(c)}, {"bounds", cost_bounds_json(r)}};
  if (full && !std::isfinite(*full)) report["bounds"]["optimum"] = "infeasible";
  emit(c, report, out);
  return kExitOk;
}

int run_learn(const Config& c, std::ostream& out) {
  const OfflineDataset ds = load(c);
  BonusSpec spec;
  spec.kind = bonus_kind_from_string(c.bonus);
  if (spec.kind == BonusKind::kCustom) throw InvalidArgument("custom bonuses are library-only");
  if (spec.kind != BonusKind::kZero) {
    if (!c.delta) throw InvalidArgument("--delta is required for a nonzero bonus");
    spec.delta = *c.delta;
  }
  spec.beta_c = c.beta_c;
  Json report = {{"seed", c.seed}, {"config", config_json(c)}};
  LearnerOutput lo;
  try {
    lo = povi(ds, spec);
  } catch (const NoEquilibrium& e) {
    report["status"] = "no_equilibrium";
    report["h"] = e.h();
    report["s"] = e.s();
    emit(c, report, out);
    return kExitVerification;
  }
  report["learner"] = learner_json(lo, ds.shape);
  bool ok = true;
  if (!c.target.empty()) {
    const JointPolicy tp = load_target(c, ds.shape);
    const bool match = lo.policy == tp;
    report["matches_target"] = match;
    ok = ok && match;
  }
  if (!c.widths.empty()) {
    const ConfidenceWidths w = compute_widths(width_params(c), visit_counts(ds), ds.shape, ds.bound);
    const BonusCheck bc = check_bonus_within_widths(lo.gamma, w, lo.v_lower);
    report["bonus_check"] = {{"holds", bc.holds}, {"worst_slack", bc.worst_slack}};
    ok = ok && bc.holds;
  }
  report["ok"] = ok;
  emit(c, report, out);
  return ok ? kExitOk : kExitVerification;
}

void add_instance_options(CLI::App* sub, Config& c) {
  sub->add_option("--data", c.data, "dataset prefix (<prefix>.header.json, <prefix>.jsonl)")->required();
  sub->add_option("--target", c.target, "\"all-zeros\", a JSON policy file, or an inline JSON table");
  sub->add_option("--iota", c.iota, "separation margin");
  sub->add_option("--b", c.bound, "override the reward bound from the header");
  sub->add_option("--widths", c.widths, "constant | hoeffding | bonus-scale | explicit");
  sub->add_option("--rho-r", c.rho_r, "constant reward width");
  sub->add_option("--rho-p", c.rho_p, "constant transition width");
  sub->add_option("--delta", c.delta, "failure probability");
  sub->add_option("--reward-const", c.reward_const, "Hoeffding multiplier");
  sub->add_option("--beta-c", c.beta_c, "log-term constant");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--threads", c.threads, "worker threads (default MGPOISON_THREADS or all cores)");
  sub->add_option("--report", c.report, "report path (default stdout)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Reward-poisoning attacks on offline multi-agent datasets", "mgpoison_cli"};
  app.require_subcommand(1);

  CLI::App* gen = app.add_subcommand("gen", "generate a dataset");
  gen->add_option("--family", c.family, "worst-case | dominant-example | random")->required();
  gen->add_option("--n", c.n, "players");
  gen->add_option("--A", c.actions, "actions per player");
  gen->add_option("--S", c.n_states, "states");
  gen->add_option("--H", c.horizon, "horizon");
  gen->add_option("--N", c.visits, "visits per cell (worst-case)");
  gen->add_option("--K", c.episodes, "episodes (random)");
  gen->add_option("--counts", c.counts, "per joint action counts (dominant-example)")->delimiter(',');
  gen->add_option("--b", c.bound, "reward bound");
  gen->add_option("--seed", c.seed, "random seed");
  gen->add_option("--out", c.out, "output prefix")->required();

  CLI::App* attack = app.add_subcommand("attack", "solve the poisoning LP");
  add_instance_options(attack, c);
  attack->add_option("--out", c.out, "poisoned dataset prefix")->required();
  attack->add_option("--mode", c.mode, "auto | bandit | markov");
  attack->add_option("--learner", c.learner, "bandit learner: mle | ci");
  attack->add_option("--granularity", c.granularity, "cell | episode");
  attack->add_option("--encoding", c.encoding, "best | unclipped | clip-target");
  attack->add_option("--verify-samples", c.samples, "plausible games to sample after the attack");

  CLI::App* verify = app.add_subcommand("verify", "sample plausible games of a poisoned dataset");
  add_instance_options(verify, c);
  verify->add_option("--samples", c.samples, "number of sampled games (default 500)");

  CLI::App* bounds = app.add_subcommand("bounds", "cost bounds report");
  add_instance_options(bounds, c);
  bounds->add_flag("--solve", c.solve_full, "also solve the full attack LP");

  CLI::App* learn = app.add_subcommand("learn", "run the POVI learner");
  add_instance_options(learn, c);
  learn->add_option("--bonus", c.bonus, "pessimistic | optimistic | zero");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  }

  // learn compares to the target only when one is given explicitly.
  if (learn->parsed() && learn->count("--target") == 0) c.target.clear();

  try {
    if (gen->parsed()) {
      c.command = "gen";
      return run_gen(c, out);
    }
    if (attack->parsed()) {
      c.command = "attack";
      return run_attack(c, out);
    }
    if (verify->parsed()) {
      c.command = "verify";
      return run_verify(c, out);
    }
    if (bounds->parsed()) {
      c.command = "bounds";
      return run_bounds(c, out);
    }
    c.command = "learn";
    return run_learn(c, out);
  } catch (const UncoveredCell& e) {
    err << "error: " << e.what() << " (" << e.cells().size() << " cells)\n";
    return kExitCoverage;
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const VerificationFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const InvalidDelta& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const InvalidMargin& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const Json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace mgpoison
