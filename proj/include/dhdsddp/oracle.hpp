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

// Extensive-form (deterministic equivalent) verification.
//
// The scenario tree has one node per positive-probability history
// (i_0, (i_1, e_1), ..., (i_t, e_t)). Adaptedness is structural: X and Ub get
// one copy per node, Ua one copy per non-root node (it sees the noise of the
// edge into that node). Everything here is independent of the cut machinery
// except when a truncated horizon explicitly borrows a cut store as terminal.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhdsddp/cuts.hpp"
#include "dhdsddp/lp.hpp"
#include "dhdsddp/model.hpp"

namespace dhdsddp {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TreeTooLarge : public OracleError {
 public:
  using OracleError::OracleError;
};

class OracleInfeasible : public OracleError {
 public:
  using OracleError::OracleError;
};

struct TreeNode {
  std::size_t stage = 0;
  std::size_t markov = 0;
  std::size_t noise = 0;  // index of the noise on the edge into this node
  std::size_t parent = kNoParent;
  double probability = 1.0;  // conditional on the root
  std::vector<std::size_t> children;

  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
};

struct ScenarioTree {
  std::size_t root_stage = 0;
  std::size_t last_stage = 0;
  std::vector<TreeNode> nodes;           // breadth first
  std::vector<std::size_t> stage_begin;  // nodes of stage root_stage + s are [stage_begin[s], stage_begin[s+1])

  std::size_t num_stages() const { return stage_begin.size() - 1; }
  bool is_leaf(std::size_t n) const { return nodes[n].stage == last_stage; }
};

inline ScenarioTree build_scenario_tree(const DhdProblem& p, std::size_t root_stage, std::size_t root_markov,
                                        std::size_t last_stage, std::size_t max_nodes) {
  if (root_stage > last_stage || last_stage > p.dims.horizon)
    throw std::out_of_range("scenario tree: invalid stage range");
  if (root_markov >= p.num_markov_states(root_stage)) throw std::out_of_range("scenario tree: Markov state out of range");
  ScenarioTree tree;
  tree.root_stage = root_stage;
  tree.last_stage = last_stage;
  TreeNode root;
  root.stage = root_stage;
  root.markov = root_markov;
  tree.nodes.push_back(root);
  tree.stage_begin = {0, 1};
  for (std::size_t t = root_stage; t < last_stage; ++t) {
    const std::size_t begin = tree.stage_begin[tree.stage_begin.size() - 2];
    const std::size_t end = tree.stage_begin.back();
    std::size_t count = 0;
    for (std::size_t n = begin; n < end; ++n) count += scenario_weights(p, t, tree.nodes[n].markov).size();
    if (tree.nodes.size() + count > max_nodes)
      throw TreeTooLarge("tree too large: more than " + std::to_string(max_nodes) + " scenario nodes by stage " +
                         std::to_string(t + 1));
    for (std::size_t n = begin; n < end; ++n) {
      for (const auto& w : scenario_weights(p, t, tree.nodes[n].markov)) {
        TreeNode child;
        child.stage = t + 1;
        child.markov = w.j;
        child.noise = w.e;
        child.parent = n;
        child.probability = tree.nodes[n].probability * w.probability;
        tree.nodes[n].children.push_back(tree.nodes.size());
        tree.nodes.push_back(std::move(child));
      }
    }
    tree.stage_begin.push_back(tree.nodes.size());
  }
  return tree;
}

struct ExtensiveFormOptions {
  std::size_t root_stage = 0;
  std::size_t root_markov = 0;
  /// Fixed root state (anchored by equality rows). When absent the problem's
  /// initial state is used, or X_0 ranges over state_bounds if it is free.
  std::optional<Vector> root_state;
  /// Horizon of the tree; defaults to T.
  std::optional<std::size_t> last_stage;
  /// Terminal cost at last_stage taken from these cuts instead of the
  /// problem's terminal function (truncated problems).
  const CutStore* terminal_cuts = nullptr;
  std::size_t max_nonzeros = 1'000'000;
};

struct ExtensiveForm {
  LinearProgram lp;
  ScenarioTree tree;
  std::vector<std::size_t> x;    // first state index per node
  std::vector<std::size_t> u_b;  // first Ub index per non-leaf node
  std::vector<std::size_t> u_a;  // first Ua index per non-root node
  std::vector<std::size_t> epi;  // phi per leaf (npos elsewhere)
  std::vector<std::size_t> anchor_rows;
};

namespace detail {

inline std::vector<Term> state_terms(std::size_t x0, const Vector& coef, std::vector<Term> terms = {}) {
  for (std::size_t k = 0; k < coef.size(); ++k)
    if (coef[k] != 0.0) terms.push_back({x0 + k, coef[k]});
  return terms;
}

inline void check_nonzeros(const LinearProgram& lp, std::size_t cap) {
  if (lp.num_nonzeros() > cap)
    throw TreeTooLarge("tree too large: extensive form exceeds " + std::to_string(cap) + " nonzeros");
}

struct RootSetup {
  std::optional<Vector> fixed;
  std::size_t last = 0;
};

inline RootSetup root_setup(const DhdProblem& p, const ExtensiveFormOptions& opt) {
  RootSetup r;
  r.last = opt.last_stage.value_or(p.dims.horizon);
  if (r.last > p.dims.horizon || r.last < opt.root_stage) throw std::out_of_range("extensive form: bad horizon");
  if (r.last < p.dims.horizon && opt.terminal_cuts == nullptr)
    throw std::invalid_argument("extensive form: truncated horizon needs terminal cuts");
  if (opt.root_state)
    r.fixed = opt.root_state;
  else if (opt.root_stage == 0 && p.initial_state)
    r.fixed = p.initial_state;
  else if (!p.state_bounds)
    throw std::invalid_argument("extensive form: free root state needs state_bounds");
  if (r.fixed && r.fixed->size() != p.dims.state_dim)
    throw std::invalid_argument("extensive form: root state has the wrong dimension");
  return r;
}

inline std::vector<AffinePiece> leaf_cuts(const DhdProblem& p, const ExtensiveFormOptions& opt, std::size_t last,
                                          std::size_t markov) {
  if (opt.terminal_cuts == nullptr) return p.terminal.cuts_for(markov);
  std::vector<AffinePiece> out;
  for (const auto& c : opt.terminal_cuts->cuts(last, markov)) out.push_back({c.alpha, c.beta});
  return out;
}

}  // namespace detail

/// Deterministic equivalent over the whole scenario tree of the subproblem
/// rooted at (root_stage, root_markov).
inline ExtensiveForm build_extensive_form(const DhdProblem& p, const ExtensiveFormOptions& opt = {}) {
  const std::size_t N = p.dims.state_dim;
  const std::size_t Mb = p.dims.control_b_dim;
  const std::size_t Ma = p.dims.control_a_dim;
  const std::size_t T = p.dims.horizon;
  const auto setup = detail::root_setup(p, opt);
  const std::size_t npos = TreeNode::kNoParent;

  ExtensiveForm ef;
  ef.tree = build_scenario_tree(p, opt.root_stage, opt.root_markov, setup.last, opt.max_nonzeros);
  const auto& nodes = ef.tree.nodes;
  LinearProgram& lp = ef.lp;
  ef.x.assign(nodes.size(), npos);
  ef.u_b.assign(nodes.size(), npos);
  ef.u_a.assign(nodes.size(), npos);
  ef.epi.assign(nodes.size(), npos);

  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const TreeNode& node = nodes[n];
    const std::string tag = "n" + std::to_string(n);
    ef.x[n] = lp.num_vars();
    for (std::size_t k = 0; k < N; ++k) {
      Bound b = p.state_bounds ? (*p.state_bounds)[k] : Bound{};
      if (n == 0 && setup.fixed) b = Bound{};
      lp.add_variable(0.0, b.lower, b.upper, tag + ".X[" + std::to_string(k) + "]");
    }
    if (n != 0) {
      const TreeNode& parent = nodes[node.parent];
      const auto& r = p.realization(parent.stage, parent.markov, node.markov, node.noise);
      ef.u_a[n] = lp.num_vars();
      for (std::size_t k = 0; k < Ma; ++k)
        lp.add_variable(node.probability * r.cost_a[k], r.bounds_a[k].lower, r.bounds_a[k].upper,
                        tag + ".Ua[" + std::to_string(k) + "]");
    }
    if (!node.children.empty()) {
      std::vector<Bound> bounds(Mb);
      for (std::size_t c : node.children) {
        const auto& r = p.realization(node.stage, node.markov, nodes[c].markov, nodes[c].noise);
        for (std::size_t k = 0; k < Mb; ++k) {
          bounds[k].lower = std::max(bounds[k].lower, r.bounds_b[k].lower);
          bounds[k].upper = std::min(bounds[k].upper, r.bounds_b[k].upper);
        }
      }
      ef.u_b[n] = lp.num_vars();
      for (std::size_t k = 0; k < Mb; ++k) {
        if (bounds[k].lower > bounds[k].upper)
          throw OracleInfeasible("extensive form infeasible: empty Ub bounds at node " + std::to_string(n));
        lp.add_variable(0.0, bounds[k].lower, bounds[k].upper, tag + ".Ub[" + std::to_string(k) + "]");
      }
    }
    if (node.stage == setup.last) ef.epi[n] = lp.add_variable(node.probability, -kInf, kInf, tag + ".phi");
  }

  if (setup.fixed)
    for (std::size_t k = 0; k < N; ++k)
      ef.anchor_rows.push_back(lp.add_row({{ef.x[0] + k, 1.0}}, Sense::Equal, (*setup.fixed)[k],
                                          "anchor[" + std::to_string(k) + "]"));

  for (std::size_t m = 1; m < nodes.size(); ++m) {
    const TreeNode& node = nodes[m];
    const std::size_t n = node.parent;
    const TreeNode& parent = nodes[n];
    const auto& r = p.realization(parent.stage, parent.markov, node.markov, node.noise);
    const double w = node.probability;
    const std::string tag = "n" + std::to_string(m);
    for (std::size_t k = 0; k < N; ++k) lp.cost[ef.x[n] + k] += w * r.cost_x[k];
    for (std::size_t k = 0; k < Mb; ++k) lp.cost[ef.u_b[n] + k] += w * r.cost_b[k];

    for (std::size_t k = 0; k < N; ++k) {
      std::vector<Term> terms{{ef.x[m] + k, 1.0}};
      for (std::size_t c = 0; c < N; ++c)
        if (r.A(k, c) != 0.0) terms.push_back({ef.x[n] + c, -r.A(k, c)});
      for (std::size_t c = 0; c < Mb; ++c)
        if (r.Bb(k, c) != 0.0) terms.push_back({ef.u_b[n] + c, -r.Bb(k, c)});
      for (std::size_t c = 0; c < Ma; ++c)
        if (r.Ba(k, c) != 0.0) terms.push_back({ef.u_a[m] + c, -r.Ba(k, c)});
      lp.add_row(std::move(terms), Sense::Equal, r.W[k], tag + ".dyn[" + std::to_string(k) + "]");
    }
    for (std::size_t c = 0; c < r.rows.size(); ++c) {
      const auto& row = r.rows[c];
      auto terms = detail::state_terms(ef.x[n], row.ax);
      terms = detail::state_terms(ef.u_b[n], row.ab, std::move(terms));
      terms = detail::state_terms(ef.u_a[m], row.aa, std::move(terms));
      lp.add_row(std::move(terms), row.sense, row.rhs, tag + ".row[" + std::to_string(c) + "]");
    }
    detail::check_nonzeros(lp, opt.max_nonzeros);
  }

  for (std::size_t n = ef.tree.stage_begin[ef.tree.num_stages() - 1]; n < nodes.size(); ++n) {
    const std::size_t markov = nodes[n].markov;
    const std::string tag = "n" + std::to_string(n);
    for (const auto& c : detail::leaf_cuts(p, opt, setup.last, markov)) {
      std::vector<Term> terms{{ef.epi[n], 1.0}};
      for (std::size_t k = 0; k < N; ++k)
        if (c.beta[k] != 0.0) terms.push_back({ef.x[n] + k, -c.beta[k]});
      lp.add_row(std::move(terms), Sense::GreaterEqual, c.alpha, tag + ".terminal_cut");
    }
    if (setup.last == T)
      for (const auto& row : p.terminal.rows_for(markov))
        lp.add_row(detail::state_terms(ef.x[n], row.ax), row.sense, row.rhs, tag + ".terminal_row");
  }
  detail::check_nonzeros(lp, opt.max_nonzeros);
  return ef;
}

struct OracleResult {
  double value = 0.0;
  Vector subgradient;  // anchor-row duals; empty when the root state is free
  Vector root_state;
};

inline OracleResult solve_extensive_form(const DhdProblem& p, const ExtensiveFormOptions& opt = {},
                                         const LpOptions& lp_opt = {}) {
  const ExtensiveForm ef = build_extensive_form(p, opt);
  const LpSolution sol = solve(ef.lp, lp_opt);
  if (sol.status == LpStatus::Infeasible) throw OracleInfeasible("extensive form infeasible");
  if (sol.status == LpStatus::Unbounded) throw OracleError("extensive form unbounded");
  OracleResult out;
  out.value = sol.objective;
  for (std::size_t r : ef.anchor_rows) out.subgradient.push_back(sol.duals[r]);
  out.root_state.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(ef.x[0]),
                        sol.x.begin() + static_cast<std::ptrdiff_t>(ef.x[0] + p.dims.state_dim));
  return out;
}

/// Exact J_t(x, i) with its subgradient. Throws OracleInfeasible when no
/// feasible continuation exists (J = +inf).
inline OracleResult exact_value_with_subgradient(const DhdProblem& p, std::size_t t, std::size_t i, const Vector& x,
                                                 std::size_t max_nonzeros = 1'000'000) {
  if (t > p.dims.horizon || i >= p.num_markov_states(t)) throw std::out_of_range("exact_value: index out of range");
  if (x.size() != p.dims.state_dim) throw std::invalid_argument("exact_value: state has the wrong dimension");
  if (p.state_bounds)
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] < (*p.state_bounds)[k].lower - 1e-9 || x[k] > (*p.state_bounds)[k].upper + 1e-9)
        throw OracleInfeasible("exact_value: state outside state_bounds");
  if (t == p.dims.horizon) {
    for (const auto& row : p.terminal.rows_for(i)) {
      const double a = dot(row.ax, x);
      const bool ok = row.sense == Sense::LessEqual ? a <= row.rhs + 1e-9
                      : row.sense == Sense::GreaterEqual ? a >= row.rhs - 1e-9
                                                         : std::abs(a - row.rhs) <= 1e-9;
      if (!ok) throw OracleInfeasible("exact_value: terminal domain violated");
    }
    OracleResult out;
    out.value = -kInf;
    out.root_state = x;
    for (const auto& c : p.terminal.cuts_for(i)) {
      const double v = c.alpha + dot(c.beta, x);
      if (v > out.value) {
        out.value = v;
        out.subgradient = c.beta;
      }
    }
    return out;
  }
  ExtensiveFormOptions opt;
  opt.root_stage = t;
  opt.root_markov = i;
  opt.root_state = x;
  opt.max_nonzeros = max_nonzeros;
  return solve_extensive_form(p, opt);
}

inline double exact_value(const DhdProblem& p, std::size_t t, std::size_t i, const Vector& x,
                          std::size_t max_nonzeros = 1'000'000) {
  return exact_value_with_subgradient(p, t, i, x, max_nonzeros).value;
}

/// Optimal value of the whole problem.
inline double oracle_optimum(const DhdProblem& p, std::size_t max_nonzeros = 1'000'000) {
  ExtensiveFormOptions opt;
  opt.max_nonzeros = max_nonzeros;
  return solve_extensive_form(p, opt).value;
}

/// Hazard-decision reformulation with augmented state Y_t = (X_t, Ub_t) and
/// controls (Ua_{t+1}, U~_{t+1}) chosen after the noise:
///
///   Y_{t+1} = (A X_t + Bb Ub_t + Ba Ua_{t+1} + W, U~_{t+1}).
///
/// Ub bounds become constraints on the state inside each edge's cost, and
/// the root state component Ub_0 is a free decision at stage 0. The
/// terminal cost ignores the Ub component, so leaves carry no U~.
inline ExtensiveForm build_hd_extensive_form(const DhdProblem& p, std::size_t max_nonzeros = 1'000'000) {
  const std::size_t N = p.dims.state_dim;
  const std::size_t Mb = p.dims.control_b_dim;
  const std::size_t Ma = p.dims.control_a_dim;
  const std::size_t T = p.dims.horizon;
  const std::size_t npos = TreeNode::kNoParent;

  ExtensiveForm ef;
  ef.tree = build_scenario_tree(p, 0, 0, T, max_nonzeros);
  const auto& nodes = ef.tree.nodes;
  LinearProgram& lp = ef.lp;
  ef.x.assign(nodes.size(), npos);
  ef.u_b.assign(nodes.size(), npos);  // Ub component of the augmented state
  ef.u_a.assign(nodes.size(), npos);
  ef.epi.assign(nodes.size(), npos);
  std::vector<std::size_t> u_tilde(nodes.size(), npos);

  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const TreeNode& node = nodes[n];
    const std::string tag = "n" + std::to_string(n);
    ef.x[n] = lp.num_vars();
    for (std::size_t k = 0; k < N; ++k) {
      Bound b = p.state_bounds ? (*p.state_bounds)[k] : Bound{};
      if (n == 0 && p.initial_state) b = Bound{};
      lp.add_variable(0.0, b.lower, b.upper, tag + ".Y.X[" + std::to_string(k) + "]");
    }
    const bool carries_ub = node.stage < T;
    if (carries_ub) {
      ef.u_b[n] = lp.num_vars();
      for (std::size_t k = 0; k < Mb; ++k) lp.add_variable(0.0, -kInf, kInf, tag + ".Y.Ub[" + std::to_string(k) + "]");
    }
    if (n != 0) {
      const TreeNode& parent = nodes[node.parent];
      const auto& r = p.realization(parent.stage, parent.markov, node.markov, node.noise);
      ef.u_a[n] = lp.num_vars();
      for (std::size_t k = 0; k < Ma; ++k)
        lp.add_variable(node.probability * r.cost_a[k], r.bounds_a[k].lower, r.bounds_a[k].upper,
                        tag + ".Ua[" + std::to_string(k) + "]");
      if (carries_ub) {
        u_tilde[n] = lp.num_vars();
        for (std::size_t k = 0; k < Mb; ++k) lp.add_variable(0.0, -kInf, kInf, tag + ".U~[" + std::to_string(k) + "]");
      }
    }
    if (node.stage == T) ef.epi[n] = lp.add_variable(node.probability, -kInf, kInf, tag + ".phi");
  }

  if (p.initial_state)
    for (std::size_t k = 0; k < N; ++k)
      ef.anchor_rows.push_back(lp.add_row({{ef.x[0] + k, 1.0}}, Sense::Equal, (*p.initial_state)[k],
                                          "anchor[" + std::to_string(k) + "]"));

  for (std::size_t m = 1; m < nodes.size(); ++m) {
    const TreeNode& node = nodes[m];
    const std::size_t n = node.parent;
    const TreeNode& parent = nodes[n];
    const auto& r = p.realization(parent.stage, parent.markov, node.markov, node.noise);
    const double w = node.probability;
    const std::string tag = "n" + std::to_string(m);
    for (std::size_t k = 0; k < N; ++k) lp.cost[ef.x[n] + k] += w * r.cost_x[k];
    for (std::size_t k = 0; k < Mb; ++k) lp.cost[ef.u_b[n] + k] += w * r.cost_b[k];

    for (std::size_t k = 0; k < N; ++k) {
      std::vector<Term> terms{{ef.x[m] + k, 1.0}};
      for (std::size_t c = 0; c < N; ++c)
        if (r.A(k, c) != 0.0) terms.push_back({ef.x[n] + c, -r.A(k, c)});
      for (std::size_t c = 0; c < Mb; ++c)
        if (r.Bb(k, c) != 0.0) terms.push_back({ef.u_b[n] + c, -r.Bb(k, c)});
      for (std::size_t c = 0; c < Ma; ++c)
        if (r.Ba(k, c) != 0.0) terms.push_back({ef.u_a[m] + c, -r.Ba(k, c)});
      lp.add_row(std::move(terms), Sense::Equal, r.W[k], tag + ".dyn.X[" + std::to_string(k) + "]");
    }
    if (u_tilde[m] != npos)
      for (std::size_t k = 0; k < Mb; ++k)
        lp.add_row({{ef.u_b[m] + k, 1.0}, {u_tilde[m] + k, -1.0}}, Sense::Equal, 0.0,
                   tag + ".dyn.Ub[" + std::to_string(k) + "]");
    for (std::size_t k = 0; k < Mb; ++k) {
      const Bound& b = r.bounds_b[k];
      if (std::isfinite(b.lower))
        lp.add_row({{ef.u_b[n] + k, 1.0}}, Sense::GreaterEqual, b.lower, tag + ".Ub_lo[" + std::to_string(k) + "]");
      if (std::isfinite(b.upper))
        lp.add_row({{ef.u_b[n] + k, 1.0}}, Sense::LessEqual, b.upper, tag + ".Ub_hi[" + std::to_string(k) + "]");
    }
    for (std::size_t c = 0; c < r.rows.size(); ++c) {
      const auto& row = r.rows[c];
      auto terms = detail::state_terms(ef.x[n], row.ax);
      terms = detail::state_terms(ef.u_b[n], row.ab, std::move(terms));
      terms = detail::state_terms(ef.u_a[m], row.aa, std::move(terms));
      lp.add_row(std::move(terms), row.sense, row.rhs, tag + ".row[" + std::to_string(c) + "]");
    }
    detail::check_nonzeros(lp, max_nonzeros);
  }

  for (std::size_t n = ef.tree.stage_begin[ef.tree.num_stages() - 1]; n < nodes.size(); ++n) {
    const std::size_t markov = nodes[n].markov;
    for (const auto& c : p.terminal.cuts_for(markov)) {
      std::vector<Term> terms{{ef.epi[n], 1.0}};
      for (std::size_t k = 0; k < N; ++k)
        if (c.beta[k] != 0.0) terms.push_back({ef.x[n] + k, -c.beta[k]});
      lp.add_row(std::move(terms), Sense::GreaterEqual, c.alpha, "n" + std::to_string(n) + ".terminal_cut");
    }
    for (const auto& row : p.terminal.rows_for(markov))
      lp.add_row(detail::state_terms(ef.x[n], row.ax), row.sense, row.rhs, "n" + std::to_string(n) + ".terminal_row");
  }
  detail::check_nonzeros(lp, max_nonzeros);
  return ef;
}

struct HdCheck {
  double dhd_optimum = 0.0;
  double hd_optimum = 0.0;
  double difference = 0.0;
  std::size_t dhd_state_dim = 0;  // N
  std::size_t hd_state_dim = 0;   // N + Mb
};

inline HdCheck check_hd_reformulation(const DhdProblem& p, std::size_t max_nonzeros = 1'000'000) {
  HdCheck out;
  out.dhd_optimum = oracle_optimum(p, max_nonzeros);
  const ExtensiveForm hd = build_hd_extensive_form(p, max_nonzeros);
  const LpSolution sol = solve(hd.lp);
  if (sol.status == LpStatus::Infeasible) throw OracleInfeasible("hazard-decision extensive form infeasible");
  if (sol.status == LpStatus::Unbounded) throw OracleError("hazard-decision extensive form unbounded");
  out.hd_optimum = sol.objective;
  out.difference = std::abs(out.dhd_optimum - out.hd_optimum);
  out.dhd_state_dim = p.dims.state_dim;
  out.hd_state_dim = p.dims.state_dim + p.dims.control_b_dim;
  return out;
}

}  // namespace dhdsddp
