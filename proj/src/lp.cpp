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

#include "mgpoison/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace mgpoison {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

int LpModel::add_variable(std::string name, double lower, double upper, double cost) {
  vars_.push_back({std::move(name), lower, upper, cost});
  return static_cast<int>(vars_.size()) - 1;
}

int LpModel::add_constraint(std::string name, std::vector<LpTerm> terms, Sense sense, double rhs) {
  rows_.push_back({std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void LpModel::validate() const {
  for (const auto& v : vars_) {
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw InvalidArgument("variable " + v.name + " has crossed bounds");
    }
    if (!std::isfinite(v.cost)) throw InvalidArgument("variable " + v.name + " has non-finite cost");
  }
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rhs)) throw InvalidArgument("row " + r.name + " has non-finite rhs");
    for (const auto& t : r.terms) {
      if (t.var < 0 || t.var >= num_variables()) {
        throw InvalidArgument("row " + r.name + " references an undeclared variable");
      }
      if (!std::isfinite(t.coef)) throw InvalidArgument("row " + r.name + " has a non-finite coefficient");
    }
  }
}

double LpModel::objective(const std::vector<double>& x) const {
  double z = 0.0;
  for (int j = 0; j < num_variables(); ++j) z += vars_[j].cost * x[j];
  return z;
}

double LpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const auto& r : rows_) {
    double act = 0.0;
    for (const auto& t : r.terms) act += t.coef * x[t.var];
    const double d = act - r.rhs;
    if (r.sense != Sense::kGreaterEqual) worst = std::max(worst, d);
    if (r.sense != Sense::kLessEqual) worst = std::max(worst, -d);
  }
  return worst;
}

namespace {

enum class Status { kBasic, kLower, kUpper, kFree, kFixed };

class Simplex {
 public:
  Simplex(const LpModel& model, const SolverOptions& opt) : model_(model), opt_(opt) {
    n_ = model.num_variables();
    m_ = model.num_constraints();
    total_ = n_ + 2 * m_;
    build_columns();
  }

  LpSolution run() {
    LpSolution sol;
    initial_basis();
    // Phase 1: minimize the sum of artificials.
    std::vector<double> c1(total_, 0.0);
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      if (up_[art(i)] > 0) {
        c1[art(i)] = 1.0;
        need_phase1 = true;
      }
    }
    if (need_phase1) {
      if (iterate(c1) != LpStatus::kOptimal) throw NumericalFailure("phase 1 reported unbounded");
      double infeas = 0.0, scale = 1.0;
      for (int i = 0; i < m_; ++i) infeas += std::max(0.0, x_[art(i)]);
      for (const auto& r : model_.constraints()) scale = std::max(scale, std::abs(r.rhs));
      if (infeas > opt_.feasibility_tol * scale) {
        sol.status = LpStatus::kInfeasible;
        sol.iterations = iterations_;
        return sol;
      }
      for (int i = 0; i < m_; ++i) {
        lo_[art(i)] = up_[art(i)] = 0.0;
        if (status_[art(i)] != Status::kBasic) {
          status_[art(i)] = Status::kFixed;
          x_[art(i)] = 0.0;
        }
      }
      drive_out_artificials();
      refactor();
    }
    std::vector<double> c2(total_, 0.0);
    for (int j = 0; j < n_; ++j) c2[j] = model_.variable(j).cost;
    const LpStatus st = iterate(c2);
    sol.iterations = iterations_;
    if (st == LpStatus::kUnbounded) {
      sol.status = LpStatus::kUnbounded;
      return sol;
    }
    refactor();
    compute_duals(c2);
    sol.status = LpStatus::kOptimal;
    sol.values.assign(x_.begin(), x_.begin() + n_);
    sol.objective_value = model_.objective(sol.values);
    sol.duals = y_;
    sol.dual_bound = dual_bound(c2);
    const double viol = model_.max_violation(sol.values);
    if (viol > opt_.feasibility_tol) {
      throw NumericalFailure("final point violates constraints by " + std::to_string(viol));
    }
    return sol;
  }

 private:
  int slack(int i) const { return n_ + i; }
  int art(int i) const { return n_ + m_ + i; }

  void build_columns() {
    col_start_.assign(n_ + 1, 0);
    for (const auto& r : model_.constraints())
      for (const auto& t : r.terms) ++col_start_[t.var + 1];
    for (int j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i)
      for (const auto& t : model_.constraint(i).terms) {
        col_row_[fill[t.var]] = i;
        col_val_[fill[t.var]++] = t.coef;
      }
    rhs_.resize(m_);
    for (int i = 0; i < m_; ++i) rhs_[i] = model_.constraint(i).rhs;
    art_sign_.assign(m_, 1.0);
  }

  template <typename F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) f(col_row_[k], col_val_[k]);
    } else if (j < n_ + m_) {
      f(j - n_, 1.0);
    } else {
      f(j - n_ - m_, art_sign_[j - n_ - m_]);
    }
  }

  void initial_basis() {
    lo_.assign(total_, 0.0);
    up_.assign(total_, 0.0);
    x_.assign(total_, 0.0);
    status_.assign(total_, Status::kFixed);
    head_.assign(m_, -1);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = model_.variable(j).lower;
      up_[j] = model_.variable(j).upper;
      set_nonbasic_home(j);
    }
    std::vector<double> resid = rhs_;
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for_column(j, [&](int i, double v) { resid[i] -= v * x_[j]; });
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const Sense sense = model_.constraint(i).sense;
      const int s = slack(i), a = art(i);
      lo_[s] = sense == Sense::kGreaterEqual ? -kInf : 0.0;
      up_[s] = sense == Sense::kLessEqual ? kInf : 0.0;
      if (resid[i] >= lo_[s] && resid[i] <= up_[s]) {
        head_[i] = s;
        status_[s] = Status::kBasic;
        x_[s] = resid[i];
        binv_[idx(i, i)] = 1.0;
        lo_[a] = up_[a] = 0.0;
        status_[a] = Status::kFixed;
      } else {
        const double sb = std::clamp(resid[i], lo_[s], up_[s]);
        x_[s] = sb;
        status_[s] = lo_[s] == up_[s] ? Status::kFixed : (sb == lo_[s] ? Status::kLower : Status::kUpper);
        art_sign_[i] = resid[i] - sb >= 0 ? 1.0 : -1.0;
        lo_[a] = 0.0;
        up_[a] = kInf;
        x_[a] = std::abs(resid[i] - sb);
        head_[i] = a;
        status_[a] = Status::kBasic;
        binv_[idx(i, i)] = art_sign_[i];
      }
    }
  }

  void set_nonbasic_home(int j) {
    if (lo_[j] == up_[j]) {
      status_[j] = Status::kFixed;
      x_[j] = lo_[j];
    } else if (std::isfinite(lo_[j])) {
      status_[j] = Status::kLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(up_[j])) {
      status_[j] = Status::kUpper;
      x_[j] = up_[j];
    } else {
      status_[j] = Status::kFree;
      x_[j] = 0.0;
    }
  }

  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * m_ + c; }

  void compute_duals(const std::vector<double>& c) {
    y_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double cb = c[head_[r]];
      if (cb == 0.0) continue;
      const double* row = &binv_[idx(r, 0)];
      for (int k = 0; k < m_; ++k) y_[k] += cb * row[k];
    }
  }

  double reduced_cost(const std::vector<double>& c, int j) const {
    double d = c[j];
    for_column(j, [&](int i, double v) { d -= y_[i] * v; });
    return d;
  }

  // Gauss-Jordan inverse of the basis, then basic values from scratch.
  void refactor() {
    if (m_ == 0) return;
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) for_column(head_[r], [&](int i, double v) { b[idx(i, r)] = v; });
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[idx(i, i)] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(b[idx(col, col)]);
      for (int r = col + 1; r < m_; ++r) {
        if (std::abs(b[idx(r, col)]) > best) {
          best = std::abs(b[idx(r, col)]);
          piv = r;
        }
      }
      if (best < 1e-12) throw NumericalFailure("singular basis during refactorization");
      if (piv != col) {
        std::swap_ranges(b.begin() + idx(piv, 0), b.begin() + idx(piv, 0) + m_, b.begin() + idx(col, 0));
        std::swap_ranges(inv.begin() + idx(piv, 0), inv.begin() + idx(piv, 0) + m_,
                         inv.begin() + idx(col, 0));
      }
      const double p = b[idx(col, col)];
      for (int k = 0; k < m_; ++k) {
        b[idx(col, k)] /= p;
        inv[idx(col, k)] /= p;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = b[idx(r, col)];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          b[idx(r, k)] -= f * b[idx(col, k)];
          inv[idx(r, k)] -= f * inv[idx(col, k)];
        }
      }
    }
    // inv is B^{-1} with rows indexed by basis position.
    binv_.swap(inv);
    std::vector<double> resid = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == Status::kBasic || x_[j] == 0.0) continue;
      for_column(j, [&](int i, double v) { resid[i] -= v * x_[j]; });
    }
    for (int r = 0; r < m_; ++r) {
      double v = 0.0;
      const double* row = &binv_[idx(r, 0)];
      for (int k = 0; k < m_; ++k) v += row[k] * resid[k];
      x_[head_[r]] = v;
    }
    since_refactor_ = 0;
  }

  void pivot(int r, int q, const std::vector<double>& alpha) {
    const double pr = alpha[r];
    double* prow = &binv_[idx(r, 0)];
    for (int k = 0; k < m_; ++k) prow[k] /= pr;
    for (int i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      const double f = alpha[i];
      double* row = &binv_[idx(i, 0)];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
    head_[r] = q;
    status_[q] = Status::kBasic;
    ++since_refactor_;
  }

  void column_ftran(int q, std::vector<double>& alpha) const {
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for_column(q, [&](int i, double v) {
      for (int r = 0; r < m_; ++r) alpha[r] += binv_[idx(r, i)] * v;
    });
  }

  void drive_out_artificials() {
    std::vector<double> alpha(m_);
    for (int r = 0; r < m_; ++r) {
      if (head_[r] < n_ + m_) continue;
      const double* row = &binv_[idx(r, 0)];
      int enter = -1;
      double best = 1e-7;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == Status::kBasic || status_[j] == Status::kFixed) continue;
        double v = 0.0;
        for_column(j, [&](int i, double a) { v += row[i] * a; });
        if (std::abs(v) > best) {
          best = std::abs(v);
          enter = j;
        }
      }
      if (enter < 0) continue;  // redundant row
      column_ftran(enter, alpha);
      const int leaving = head_[r];
      pivot(r, enter, alpha);
      status_[leaving] = Status::kFixed;
      x_[leaving] = 0.0;
    }
  }

  LpStatus iterate(const std::vector<double>& c) {
    refactor();
    compute_duals(c);
    std::vector<double> alpha(m_);
    int degenerate_run = 0;
    bool bland = false;
    bool fresh = true;
    const double ptol = 1e-9;
    for (;;) {
      if (iterations_ >= opt_.pivot_limit) {
        throw NumericalFailure("simplex pivot limit reached");
      }
      // Pricing.
      int q = -1;
      int dir = 0;
      double best = 0.0, dq = 0.0;
      for (int j = 0; j < total_; ++j) {
        const Status st = status_[j];
        if (st == Status::kBasic || st == Status::kFixed) continue;
        const double d = reduced_cost(c, j);
        int dj = 0;
        if (st == Status::kLower && d < -opt_.optimality_tol) dj = 1;
        else if (st == Status::kUpper && d > opt_.optimality_tol) dj = -1;
        else if (st == Status::kFree && std::abs(d) > opt_.optimality_tol) dj = d < 0 ? 1 : -1;
        if (dj == 0) continue;
        if (bland) {
          q = j;
          dir = dj;
          dq = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir = dj;
          dq = d;
        }
      }
      if (q < 0) {
        if (fresh) return LpStatus::kOptimal;
        refactor();
        compute_duals(c);
        fresh = true;
        continue;
      }
      column_ftran(q, alpha);
      // Harris two-pass ratio test.
      const double range = up_[q] - lo_[q];
      double theta_relaxed = range;
      for (int r = 0; r < m_; ++r) {
        const double g = -dir * alpha[r];
        const int b = head_[r];
        if (g < -ptol && std::isfinite(lo_[b])) {
          theta_relaxed = std::min(theta_relaxed, (x_[b] - lo_[b] + opt_.feasibility_tol * 1e-2) / -g);
        } else if (g > ptol && std::isfinite(up_[b])) {
          theta_relaxed = std::min(theta_relaxed, (up_[b] - x_[b] + opt_.feasibility_tol * 1e-2) / g);
        }
      }
      if (!std::isfinite(theta_relaxed)) return LpStatus::kUnbounded;
      int leave = -1;
      double theta = 0.0, piv = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double g = -dir * alpha[r];
        const int b = head_[r];
        double ratio;
        if (g < -ptol && std::isfinite(lo_[b])) ratio = (x_[b] - lo_[b]) / -g;
        else if (g > ptol && std::isfinite(up_[b])) ratio = (up_[b] - x_[b]) / g;
        else continue;
        if (bland) {
          if (leave < 0 || ratio < theta - 1e-12 ||
              (ratio <= theta + 1e-12 && head_[r] < head_[leave])) {
            leave = r;
            theta = ratio;
          }
        } else if (ratio <= theta_relaxed && std::abs(g) > piv) {
          piv = std::abs(g);
          leave = r;
          theta = ratio;
        }
      }
      const bool flip = leave < 0 || range <= theta;
      if (flip) theta = range;
      theta = std::max(theta, 0.0);
      ++iterations_;
      if (theta <= 1e-12) {
        if (++degenerate_run >= opt_.degenerate_before_bland) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (theta > 0.0) {
        for (int r = 0; r < m_; ++r) {
          if (alpha[r] != 0.0) x_[head_[r]] -= dir * alpha[r] * theta;
        }
      }
      if (flip) {
        if (dir > 0) {
          x_[q] = up_[q];
          status_[q] = Status::kUpper;
        } else {
          x_[q] = lo_[q];
          status_[q] = Status::kLower;
        }
        fresh = false;
        continue;
      }
      x_[q] += dir * theta;
      const int out = head_[leave];
      const double g = -dir * alpha[leave];
      const double scale = dq / alpha[leave];
      const double* prow = &binv_[idx(leave, 0)];
      for (int k = 0; k < m_; ++k) y_[k] += scale * prow[k];
      pivot(leave, q, alpha);
      if (g < 0) {
        x_[out] = lo_[out];
        status_[out] = lo_[out] == up_[out] ? Status::kFixed : Status::kLower;
      } else {
        x_[out] = up_[out];
        status_[out] = lo_[out] == up_[out] ? Status::kFixed : Status::kUpper;
      }
      fresh = false;
      if (since_refactor_ >= opt_.refactor_every) {
        refactor();
        compute_duals(c);
        fresh = true;
      }
    }
  }

  double dual_bound(const std::vector<double>& c) const {
    double z = 0.0;
    for (int i = 0; i < m_; ++i) z += y_[i] * rhs_[i];
    for (int j = 0; j < total_; ++j) {
      double d = reduced_cost(c, j);
      if (std::abs(d) <= 1e-12) continue;
      const double bound = d > 0 ? lo_[j] : up_[j];
      if (!std::isfinite(bound)) return -kInf;
      z += d * bound;
    }
    return z;
  }

  const LpModel& model_;
  SolverOptions opt_;
  int n_ = 0, m_ = 0, total_ = 0;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_, rhs_, art_sign_;
  std::vector<double> lo_, up_, x_, y_, binv_;
  std::vector<Status> status_;
  std::vector<int> head_;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

LpSolution solve(const LpModel& model, const SolverOptions& options) {
  model.validate();
  Simplex simplex(model, options);
  return simplex.run();
}

namespace {

std::string mps_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

}  // namespace

void write_mps(const LpModel& model, std::ostream& out, const std::string& name) {
  auto row_name = [](int i) { return "R" + std::to_string(i); };
  auto col_name = [](int j) { return "C" + std::to_string(j); };
  // Comment lines map the generated C<j>/R<i> names back to the model.
  for (int j = 0; j < model.num_variables(); ++j) {
    out << "* " << col_name(j) << " " << model.variable(j).name << "\n";
  }
  for (int i = 0; i < model.num_constraints(); ++i) {
    out << "* " << row_name(i) << " " << model.constraint(i).name << "\n";
  }
  out << "NAME          " << name << "\n";
  out << "ROWS\n N  OBJ\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const char* t = model.constraint(i).sense == Sense::kLessEqual ? "L"
                    : model.constraint(i).sense == Sense::kEqual   ? "E"
                                                                   : "G";
    out << " " << t << "  " << row_name(i) << "\n";
  }
  std::vector<std::vector<std::pair<int, double>>> cols(model.num_variables());
  for (int i = 0; i < model.num_constraints(); ++i)
    for (const auto& t : model.constraint(i).terms) cols[t.var].push_back({i, t.coef});
  out << "COLUMNS\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const double c = model.variable(j).cost;
    if (c != 0.0) out << "    " << pad(col_name(j), 10) << pad("OBJ", 10) << mps_number(c) << "\n";
    for (const auto& [i, v] : cols[j]) {
      out << "    " << pad(col_name(j), 10) << pad(row_name(i), 10) << mps_number(v) << "\n";
    }
  }
  out << "RHS\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    if (model.constraint(i).rhs != 0.0) {
      out << "    " << pad("RHS", 10) << pad(row_name(i), 10) << mps_number(model.constraint(i).rhs) << "\n";
    }
  }
  out << "BOUNDS\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variable(j);
    const std::string c = pad(col_name(j), 10);
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << " FR BND       " << c << "\n";
    } else if (v.lower == v.upper) {
      out << " FX BND       " << c << mps_number(v.lower) << "\n";
    } else {
      if (std::isinf(v.lower)) out << " MI BND       " << c << "\n";
      else if (v.lower != 0.0) out << " LO BND       " << c << mps_number(v.lower) << "\n";
      if (std::isfinite(v.upper)) out << " UP BND       " << c << mps_number(v.upper) << "\n";
    }
  }
  out << "ENDATA\n";
}

}  // namespace mgpoison
