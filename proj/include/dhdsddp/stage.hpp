// Copyright 2026 The dhdsddp Authors
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

// Two-stage stage subproblems.
//
// At (t, i, Xhat) the first stage picks Ub; every scenario s = (j, e) of the
// conditional distribution gets its own copy of (Ua_s, X'_s, phi_s):
//
//   min  sum_s p_s (cx_s.Xt + cb_s.Ub + ca_s.Ua_s + phi_s)
//   s.t. Xt = Xhat                                  (anchor rows)
//        X'_s = A_s Xt + Bb_s Ub + Ba_s Ua_s + W_s
//        rows_s(Xt, Ub, Ua_s)
//        phi_s >= alpha + beta.X'_s                 for cuts at (t+1, j)
//
// The anchor-row duals are a subgradient of the optimal value in Xhat.

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhdsddp/cuts.hpp"
#include "dhdsddp/lp.hpp"
#include "dhdsddp/model.hpp"

namespace dhdsddp {

enum class StageFailure { Infeasible, Unbounded };

class StageError : public std::runtime_error {
 public:
  StageError(StageFailure kind, std::size_t t, std::size_t i, const Vector& x, const std::string& what)
      : std::runtime_error(what), kind_(kind), t_(t), i_(i), state_(x) {}
  StageFailure kind() const { return kind_; }
  std::size_t stage() const { return t_; }
  std::size_t markov_state() const { return i_; }
  const Vector& state() const { return state_; }

 private:
  StageFailure kind_;
  std::size_t t_;
  std::size_t i_;
  Vector state_;
};

struct StageOptions {
  /// Diagnostic mode: polyhedral and terminal rows get penalized slacks.
  bool feasibility_penalty = false;
  double penalty_cost = 1e6;
  LpOptions lp;
};

struct ScenarioBlock {
  std::size_t j = 0;
  std::size_t e = 0;
  double probability = 0.0;
  std::size_t u_a = 0;     // first index of Ua_s
  std::size_t x_next = 0;  // first index of X'_s
  std::size_t epi = 0;     // phi_s
};

struct TwoStageProgram {
  LinearProgram lp;
  std::size_t x_tilde = 0;  // first index of the dummy state copy
  std::size_t u_b = 0;      // first index of Ub
  std::vector<std::size_t> anchor_rows;
  std::vector<ScenarioBlock> scenarios;
};

struct ScenarioRecourse {
  std::size_t j = 0;
  std::size_t e = 0;
  double probability = 0.0;
  Vector u_a;
  Vector x_next;
  double epi = 0.0;
};

struct StageSolution {
  double value = 0.0;
  Vector u_b;
  std::vector<ScenarioRecourse> recourse;
  Vector subgradient;
  LpStatus lp_status = LpStatus::Optimal;
};

struct RecourseSolution {
  Vector u_a;
  Vector x_next;
  double value = 0.0;       // ca.Ua + phi
  double stage_cost = 0.0;  // cx.Xhat + cb.Ub + ca.Ua
  double epi = 0.0;
};

namespace detail {

inline std::string describe_point(std::size_t t, std::size_t i, const Vector& x) {
  std::ostringstream os;
  os.precision(10);
  os << "(t=" << t << ", i=" << i << ", X=[";
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << "])";
  return os.str();
}

[[noreturn]] inline void throw_stage(LpStatus status, std::size_t t, std::size_t i, const Vector& x) {
  if (status == LpStatus::Infeasible)
    throw StageError(StageFailure::Infeasible, t, i, x,
                     "stage infeasible at " + describe_point(t, i, x) + ": relatively complete recourse violated");
  throw StageError(StageFailure::Unbounded, t, i, x,
                   "stage unbounded at " + describe_point(t, i, x) + ": linearity/boundedness condition violated");
}

inline void add_penalized_row(LinearProgram& lp, std::vector<Term> terms, Sense sense, double rhs, double weight,
                              const StageOptions& opt, std::string label) {
  if (opt.feasibility_penalty) {
    const double c = weight * opt.penalty_cost;
    if (sense != Sense::LessEqual) terms.push_back({lp.add_variable(c, 0.0, kInf, label + ".slack+"), 1.0});
    if (sense != Sense::GreaterEqual) terms.push_back({lp.add_variable(c, 0.0, kInf, label + ".slack-"), -1.0});
  }
  lp.add_row(std::move(terms), sense, rhs, std::move(label));
}

inline Bound state_bound(const DhdProblem& p, std::size_t k) {
  return p.state_bounds ? (*p.state_bounds)[k] : Bound{};
}

}  // namespace detail

/// Builds the two-stage LP at (t, i, xhat) against the cuts stored at t+1.
inline TwoStageProgram build_two_stage(const DhdProblem& p, const CutStore& store, std::size_t t, std::size_t i,
                                       const Vector& xhat, const StageOptions& opt = {}) {
  const std::size_t N = p.dims.state_dim;
  const std::size_t Mb = p.dims.control_b_dim;
  const std::size_t Ma = p.dims.control_a_dim;
  const std::size_t T = p.dims.horizon;
  if (xhat.size() != N) throw std::invalid_argument("build_two_stage: state has the wrong dimension");
  const auto weights = scenario_weights(p, t, i);

  TwoStageProgram out;
  LinearProgram& lp = out.lp;

  Vector cx(N, 0.0), cb(Mb, 0.0);
  std::vector<Bound> ub_bounds(Mb);
  for (const auto& w : weights) {
    const auto& r = p.realization(t, i, w.j, w.e);
    for (std::size_t k = 0; k < N; ++k) cx[k] += w.probability * r.cost_x[k];
    for (std::size_t k = 0; k < Mb; ++k) {
      cb[k] += w.probability * r.cost_b[k];
      ub_bounds[k].lower = std::max(ub_bounds[k].lower, r.bounds_b[k].lower);
      ub_bounds[k].upper = std::min(ub_bounds[k].upper, r.bounds_b[k].upper);
    }
  }
  for (std::size_t k = 0; k < Mb; ++k)
    if (ub_bounds[k].lower > ub_bounds[k].upper) detail::throw_stage(LpStatus::Infeasible, t, i, xhat);

  out.x_tilde = lp.num_vars();
  for (std::size_t k = 0; k < N; ++k) lp.add_variable(cx[k], -kInf, kInf, "Xt[" + std::to_string(k) + "]");
  out.u_b = lp.num_vars();
  for (std::size_t k = 0; k < Mb; ++k)
    lp.add_variable(cb[k], ub_bounds[k].lower, ub_bounds[k].upper, "Ub[" + std::to_string(k) + "]");
  for (std::size_t k = 0; k < N; ++k)
    out.anchor_rows.push_back(
        lp.add_row({{out.x_tilde + k, 1.0}}, Sense::Equal, xhat[k], "anchor[" + std::to_string(k) + "]"));

  for (const auto& w : weights) {
    const auto& r = p.realization(t, i, w.j, w.e);
    const std::string tag = "s(" + std::to_string(w.j) + "," + std::to_string(w.e) + ")";
    ScenarioBlock b{w.j, w.e, w.probability, lp.num_vars(), 0, 0};
    for (std::size_t k = 0; k < Ma; ++k)
      lp.add_variable(w.probability * r.cost_a[k], r.bounds_a[k].lower, r.bounds_a[k].upper,
                      tag + ".Ua[" + std::to_string(k) + "]");
    b.x_next = lp.num_vars();
    for (std::size_t k = 0; k < N; ++k) {
      const Bound sb = detail::state_bound(p, k);
      lp.add_variable(0.0, sb.lower, sb.upper, tag + ".X[" + std::to_string(k) + "]");
    }
    b.epi = lp.add_variable(w.probability, -kInf, kInf, tag + ".phi");

    for (std::size_t k = 0; k < N; ++k) {
      std::vector<Term> terms{{b.x_next + k, 1.0}};
      for (std::size_t c = 0; c < N; ++c)
        if (r.A(k, c) != 0.0) terms.push_back({out.x_tilde + c, -r.A(k, c)});
      for (std::size_t c = 0; c < Mb; ++c)
        if (r.Bb(k, c) != 0.0) terms.push_back({out.u_b + c, -r.Bb(k, c)});
      for (std::size_t c = 0; c < Ma; ++c)
        if (r.Ba(k, c) != 0.0) terms.push_back({b.u_a + c, -r.Ba(k, c)});
      lp.add_row(std::move(terms), Sense::Equal, r.W[k], tag + ".dyn[" + std::to_string(k) + "]");
    }
    for (std::size_t c = 0; c < r.rows.size(); ++c) {
      const auto& row = r.rows[c];
      std::vector<Term> terms;
      for (std::size_t k = 0; k < N; ++k)
        if (row.ax[k] != 0.0) terms.push_back({out.x_tilde + k, row.ax[k]});
      for (std::size_t k = 0; k < Mb; ++k)
        if (row.ab[k] != 0.0) terms.push_back({out.u_b + k, row.ab[k]});
      for (std::size_t k = 0; k < Ma; ++k)
        if (row.aa[k] != 0.0) terms.push_back({b.u_a + k, row.aa[k]});
      detail::add_penalized_row(lp, std::move(terms), row.sense, row.rhs, w.probability, opt,
                                tag + ".row[" + std::to_string(c) + "]");
    }
    for (const auto& cut : store.cuts(t + 1, w.j)) {
      std::vector<Term> terms{{b.epi, 1.0}};
      for (std::size_t k = 0; k < N; ++k)
        if (cut.beta[k] != 0.0) terms.push_back({b.x_next + k, -cut.beta[k]});
      lp.add_row(std::move(terms), Sense::GreaterEqual, cut.alpha, tag + ".cut");
    }
    if (t + 1 == T) {
      const auto& rows = store.terminal_rows(w.j);
      for (std::size_t c = 0; c < rows.size(); ++c) {
        std::vector<Term> terms;
        for (std::size_t k = 0; k < N; ++k)
          if (rows[c].ax[k] != 0.0) terms.push_back({b.x_next + k, rows[c].ax[k]});
        detail::add_penalized_row(lp, std::move(terms), rows[c].sense, rows[c].rhs, w.probability, opt,
                                  tag + ".terminal_row[" + std::to_string(c) + "]");
      }
    }
    out.scenarios.push_back(b);
  }
  return out;
}

/// Optimal value of the stage problem at (t, i, xhat), the first-stage
/// control, per-scenario recourse, and a subgradient V with
/// value(X) >= value(xhat) + V.(X - xhat).
inline StageSolution solve_stage(const DhdProblem& p, const CutStore& store, std::size_t t, std::size_t i,
                                 const Vector& xhat, const StageOptions& opt = {}) {
  const TwoStageProgram prog = build_two_stage(p, store, t, i, xhat, opt);
  const LpSolution sol = solve(prog.lp, opt.lp);
  if (sol.status != LpStatus::Optimal) detail::throw_stage(sol.status, t, i, xhat);

  const std::size_t N = p.dims.state_dim;
  StageSolution out;
  out.lp_status = sol.status;
  out.value = sol.objective;
  out.u_b.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(prog.u_b),
                 sol.x.begin() + static_cast<std::ptrdiff_t>(prog.u_b + p.dims.control_b_dim));
  out.subgradient.resize(N);
  for (std::size_t k = 0; k < N; ++k) out.subgradient[k] = sol.duals[prog.anchor_rows[k]];
  for (const auto& b : prog.scenarios) {
    ScenarioRecourse r;
    r.j = b.j;
    r.e = b.e;
    r.probability = b.probability;
    r.u_a.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(b.u_a),
                 sol.x.begin() + static_cast<std::ptrdiff_t>(b.u_a + p.dims.control_a_dim));
    r.x_next.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(b.x_next),
                    sol.x.begin() + static_cast<std::ptrdiff_t>(b.x_next + N));
    r.epi = sol.x[b.epi];
    out.recourse.push_back(std::move(r));
  }
  return out;
}

/// Second stage of one realized scenario (j, e) with Xhat and Ub fixed.
inline RecourseSolution solve_recourse(const DhdProblem& p, const CutStore& store, std::size_t t, std::size_t i,
                                       std::size_t j, std::size_t e, const Vector& xhat, const Vector& u_b,
                                       const StageOptions& opt = {}) {
  const std::size_t N = p.dims.state_dim;
  const std::size_t Mb = p.dims.control_b_dim;
  const std::size_t Ma = p.dims.control_a_dim;
  const std::size_t T = p.dims.horizon;
  if (xhat.size() != N || u_b.size() != Mb) throw std::invalid_argument("solve_recourse: dimension mismatch");
  if (t >= T || i >= p.num_markov_states(t) || j >= p.num_markov_states(t + 1) ||
      !(p.markov.transitions[t][i][j] > 0.0) || e >= p.noise.support_sizes[t] || !(p.noise.probabilities[t][e] > 0.0))
    throw std::out_of_range("solve_recourse: scenario has zero probability or is out of range");
  const auto& r = p.realization(t, i, j, e);

  LinearProgram lp;
  const std::size_t ua0 = lp.num_vars();
  for (std::size_t k = 0; k < Ma; ++k)
    lp.add_variable(r.cost_a[k], r.bounds_a[k].lower, r.bounds_a[k].upper, "Ua[" + std::to_string(k) + "]");
  const std::size_t x0 = lp.num_vars();
  for (std::size_t k = 0; k < N; ++k) {
    const Bound sb = detail::state_bound(p, k);
    lp.add_variable(0.0, sb.lower, sb.upper, "X[" + std::to_string(k) + "]");
  }
  const std::size_t epi = lp.add_variable(1.0, -kInf, kInf, "phi");

  Vector fixed = r.W;
  multiply_add(r.A, xhat, fixed);
  multiply_add(r.Bb, u_b, fixed);
  for (std::size_t k = 0; k < N; ++k) {
    std::vector<Term> terms{{x0 + k, 1.0}};
    for (std::size_t c = 0; c < Ma; ++c)
      if (r.Ba(k, c) != 0.0) terms.push_back({ua0 + c, -r.Ba(k, c)});
    lp.add_row(std::move(terms), Sense::Equal, fixed[k], "dyn[" + std::to_string(k) + "]");
  }
  for (std::size_t c = 0; c < r.rows.size(); ++c) {
    const auto& row = r.rows[c];
    std::vector<Term> terms;
    for (std::size_t k = 0; k < Ma; ++k)
      if (row.aa[k] != 0.0) terms.push_back({ua0 + k, row.aa[k]});
    const double rhs = row.rhs - dot(row.ax, xhat) - dot(row.ab, u_b);
    detail::add_penalized_row(lp, std::move(terms), row.sense, rhs, 1.0, opt, "row[" + std::to_string(c) + "]");
  }
  for (const auto& cut : store.cuts(t + 1, j)) {
    std::vector<Term> terms{{epi, 1.0}};
    for (std::size_t k = 0; k < N; ++k)
      if (cut.beta[k] != 0.0) terms.push_back({x0 + k, -cut.beta[k]});
    lp.add_row(std::move(terms), Sense::GreaterEqual, cut.alpha, "cut");
  }
  if (t + 1 == T) {
    const auto& rows = store.terminal_rows(j);
    for (std::size_t c = 0; c < rows.size(); ++c) {
      std::vector<Term> terms;
      for (std::size_t k = 0; k < N; ++k)
        if (rows[c].ax[k] != 0.0) terms.push_back({x0 + k, rows[c].ax[k]});
      detail::add_penalized_row(lp, std::move(terms), rows[c].sense, rows[c].rhs, 1.0, opt,
                                "terminal_row[" + std::to_string(c) + "]");
    }
  }
  // Ub outside this scenario's own bounds makes the realized stage cost infinite.
  for (std::size_t k = 0; k < Mb; ++k)
    if (u_b[k] < r.bounds_b[k].lower - opt.lp.feasibility_tol || u_b[k] > r.bounds_b[k].upper + opt.lp.feasibility_tol)
      detail::throw_stage(LpStatus::Infeasible, t, i, xhat);

  const LpSolution sol = solve(lp, opt.lp);
  if (sol.status != LpStatus::Optimal) detail::throw_stage(sol.status, t, i, xhat);

  RecourseSolution out;
  out.u_a.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(ua0),
                 sol.x.begin() + static_cast<std::ptrdiff_t>(ua0 + Ma));
  out.x_next = r.next_state(xhat, u_b, out.u_a);
  out.epi = sol.x[epi];
  out.value = sol.objective;
  out.stage_cost = r.stage_cost(xhat, u_b, out.u_a);
  return out;
}

}  // namespace dhdsddp
