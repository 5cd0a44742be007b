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

// Problem data for decision-hazard-decision control problems
//
//   minimize  E[ sum_t L_t(X_t, Ub_t, Ua_{t+1}) + J(X_T) ]
//   s.t.      X_{t+1} = A X_t + Bb Ub_t + Ba Ua_{t+1} + W
//
// with polyhedral L_t and J. Randomness is a finite Markov lattice (i_t)
// times independent finite noise (e_t); the data of transition t -> t+1 is
// keyed by (t, i_t, i_{t+1}, e_{t+1}).

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "dhdsddp/lp.hpp"

namespace dhdsddp {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) s += a[k] * b[k];
  return s;
}

/// y += M x
inline void multiply_add(const Matrix& m, const Vector& x, Vector& y) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) s += m(r, c) * x[c];
    y[r] += s;
  }
}

struct Dims {
  std::size_t horizon = 1;        // T, number of transitions
  std::size_t state_dim = 1;      // N
  std::size_t control_b_dim = 0;  // Mb, decided before the noise
  std::size_t control_a_dim = 0;  // Ma, decided after the noise
};

struct MarkovLattice {
  std::vector<std::size_t> states_per_stage;    // K_0 .. K_T
  std::vector<std::vector<Vector>> transitions;  // [t][i][j], t = 0 .. T-1
};

struct NoiseModel {
  std::vector<std::size_t> support_sizes;  // E for transitions 0 .. T-1
  std::vector<Vector> probabilities;       // [t][e]
};

struct Bound {
  double lower = -kInf;
  double upper = kInf;
};

/// Polyhedral constraint ax.X + ab.Ub + aa.Ua (sense) rhs.
struct PolyRow {
  Vector ax;
  Vector ab;
  Vector aa;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// Constraint on the state alone.
struct StateRow {
  Vector ax;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct StageRealization {
  Matrix A;
  Matrix Bb;
  Matrix Ba;
  Vector W;
  Vector cost_x;
  Vector cost_b;
  Vector cost_a;
  std::vector<PolyRow> rows;
  std::vector<Bound> bounds_b;
  std::vector<Bound> bounds_a;

  Vector next_state(const Vector& x, const Vector& ub, const Vector& ua) const {
    Vector out = W;
    multiply_add(A, x, out);
    multiply_add(Bb, ub, out);
    multiply_add(Ba, ua, out);
    return out;
  }

  double stage_cost(const Vector& x, const Vector& ub, const Vector& ua) const {
    return dot(cost_x, x) + dot(cost_b, ub) + dot(cost_a, ua);
  }
};

struct AffinePiece {
  double alpha = 0.0;
  Vector beta;
};

struct TerminalFunction {
  bool per_markov = false;
  // One entry when shared, K_T entries when per_markov.
  std::vector<std::vector<AffinePiece>> cuts;
  std::vector<std::vector<StateRow>> rows;

  const std::vector<AffinePiece>& cuts_for(std::size_t markov_state) const {
    return cuts.at(per_markov ? markov_state : 0);
  }
  const std::vector<StateRow>& rows_for(std::size_t markov_state) const {
    static const std::vector<StateRow> kEmpty;
    const std::size_t k = per_markov ? markov_state : 0;
    return k < rows.size() ? rows[k] : kEmpty;
  }
};

struct ScenarioKey {
  std::size_t t = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t e = 0;

  auto operator<=>(const ScenarioKey&) const = default;
};

inline std::string to_string(const ScenarioKey& k) {
  return "(" + std::to_string(k.t) + ", " + std::to_string(k.i) + ", " + std::to_string(k.j) + ", " +
         std::to_string(k.e) + ")";
}

struct DhdProblem {
  Dims dims;
  MarkovLattice markov;
  NoiseModel noise;
  std::map<ScenarioKey, StageRealization> realizations;
  TerminalFunction terminal;
  std::optional<Vector> initial_state;  // nullopt: X_0 is chosen freely in state_bounds
  std::optional<std::vector<Bound>> state_bounds;
  Vector stage_lower_bounds;  // LB_0 .. LB_T

  const StageRealization& realization(std::size_t t, std::size_t i, std::size_t j, std::size_t e) const {
    auto it = realizations.find(ScenarioKey{t, i, j, e});
    if (it == realizations.end())
      throw std::out_of_range("no realization for " + to_string(ScenarioKey{t, i, j, e}));
    return it->second;
  }

  std::size_t num_markov_states(std::size_t t) const { return markov.states_per_stage.at(t); }

  /// max over terminal cuts at x (rows are not checked).
  double terminal_value(std::size_t markov_state, const Vector& x) const {
    double v = -kInf;
    for (const auto& c : terminal.cuts_for(markov_state)) v = std::max(v, c.alpha + dot(c.beta, x));
    return v;
  }
};

struct Violation {
  std::string kind;   // invariant class, e.g. "row_stochastic"
  std::string where;  // field path, e.g. "markov.transitions[0][0]"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& kind) const {
    for (const auto& v : violations)
      if (v.kind == kind) return true;
    return false;
  }
};

namespace detail {

inline std::string idx(std::size_t a) { return "[" + std::to_string(a) + "]"; }

inline bool finite_all(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// Lists every invariant violation of p; an empty report means p is valid.
inline ValidationReport validate(const DhdProblem& p) {
  using detail::idx;
  ValidationReport report;
  auto add = [&](std::string kind, std::string where, std::string message) {
    report.violations.push_back({std::move(kind), std::move(where), std::move(message)});
  };

  const Dims& d = p.dims;
  if (d.horizon < 1) add("dims", "dims.T", "horizon T must be at least 1");
  if (d.state_dim < 1) add("dims", "dims.N", "state dimension N must be at least 1");
  if (d.horizon < 1 || d.state_dim < 1) return report;
  const std::size_t T = d.horizon;
  const std::size_t N = d.state_dim;

  // Markov lattice.
  const auto& K = p.markov.states_per_stage;
  bool lattice_ok = true;
  if (K.size() != T + 1) {
    add("markov_shape", "markov.states_per_stage", "expected T+1 = " + std::to_string(T + 1) + " entries");
    lattice_ok = false;
  } else {
    if (K[0] != 1) add("markov_initial", "markov.states_per_stage[0]", "K_0 must be 1");
    for (std::size_t t = 0; t <= T; ++t)
      if (K[t] == 0) {
        add("markov_shape", "markov.states_per_stage" + idx(t), "stage has no Markov states");
        lattice_ok = false;
      }
  }
  if (p.markov.transitions.size() != T) {
    add("markov_shape", "markov.transitions", "expected T = " + std::to_string(T) + " matrices");
    lattice_ok = false;
  }
  if (lattice_ok) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto& M = p.markov.transitions[t];
      if (M.size() != K[t]) {
        add("markov_shape", "markov.transitions" + idx(t), "expected " + std::to_string(K[t]) + " rows");
        lattice_ok = false;
        continue;
      }
      for (std::size_t i = 0; i < K[t]; ++i) {
        const std::string where = "markov.transitions" + idx(t) + idx(i);
        if (M[i].size() != K[t + 1]) {
          add("markov_shape", where, "expected " + std::to_string(K[t + 1]) + " columns");
          lattice_ok = false;
          continue;
        }
        double sum = 0.0;
        bool negative = false;
        for (double v : M[i]) {
          if (!(v >= 0.0) || !std::isfinite(v)) negative = true;
          sum += v;
        }
        if (negative) add("probability_sign", where, "probabilities must be finite and nonnegative");
        if (!(std::abs(sum - 1.0) <= 1e-12)) {
          std::ostringstream os;
          os.precision(17);
          os << "row sums to " << sum << ", not 1";
          add("row_stochastic", where, os.str());
        }
      }
    }
  }

  // Noise.
  bool noise_ok = true;
  if (p.noise.support_sizes.size() != T || p.noise.probabilities.size() != T) {
    add("noise_shape", "noise", "expected T = " + std::to_string(T) + " noise distributions");
    noise_ok = false;
  } else {
    for (std::size_t t = 0; t < T; ++t) {
      const std::string where = "noise.probabilities" + idx(t);
      const auto& q = p.noise.probabilities[t];
      if (p.noise.support_sizes[t] < 1) {
        add("noise_shape", "noise.support_sizes" + idx(t), "support size must be at least 1");
        noise_ok = false;
      }
      if (q.size() != p.noise.support_sizes[t]) {
        add("noise_shape", where, "length does not match support_sizes");
        noise_ok = false;
        continue;
      }
      double sum = 0.0;
      bool negative = false;
      for (double v : q) {
        if (!(v >= 0.0) || !std::isfinite(v)) negative = true;
        sum += v;
      }
      if (negative) add("probability_sign", where, "probabilities must be finite and nonnegative");
      if (!(std::abs(sum - 1.0) <= 1e-12)) add("noise_sum", where, "probabilities do not sum to 1");
    }
  }

  // Realizations: dimensions and coverage.
  const std::size_t Mb = d.control_b_dim;
  const std::size_t Ma = d.control_a_dim;
  for (const auto& [key, r] : p.realizations) {
    const std::string where = "realizations" + to_string(key);
    const bool key_ok = lattice_ok && noise_ok && key.t < T && key.i < K[key.t] && key.j < K[key.t + 1] &&
                        key.e < p.noise.support_sizes[key.t];
    if (!key_ok) {
      add("realization_key", where, "index out of range");
      continue;
    }
    auto mat = [&](const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
      if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols)
        add("realization_shape", where + "." + name,
            "expected " + std::to_string(rows) + "x" + std::to_string(cols));
      else if (!detail::finite_all(m.data))
        add("non_finite", where + "." + name, "entries must be finite");
    };
    auto vec = [&](const Vector& v, std::size_t n, const std::string& name) {
      if (v.size() != n)
        add("realization_shape", where + "." + name, "expected length " + std::to_string(n));
      else if (!detail::finite_all(v))
        add("non_finite", where + "." + name, "entries must be finite");
    };
    mat(r.A, N, N, "A");
    mat(r.Bb, N, Mb, "Bb");
    mat(r.Ba, N, Ma, "Ba");
    vec(r.W, N, "W");
    vec(r.cost_x, N, "cost_x");
    vec(r.cost_b, Mb, "cost_b");
    vec(r.cost_a, Ma, "cost_a");
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      const auto& row = r.rows[k];
      const std::string rw = "rows" + idx(k);
      vec(row.ax, N, rw + ".ax");
      vec(row.ab, Mb, rw + ".ab");
      vec(row.aa, Ma, rw + ".aa");
      if (!std::isfinite(row.rhs)) add("non_finite", where + "." + rw + ".rhs", "rhs must be finite");
    }
    auto bounds = [&](const std::vector<Bound>& b, std::size_t n, const char* name) {
      if (b.size() != n) {
        add("realization_shape", where + "." + name, "expected " + std::to_string(n) + " bounds");
        return;
      }
      for (std::size_t k = 0; k < n; ++k)
        if (!(b[k].lower <= b[k].upper) || b[k].lower == kInf || b[k].upper == -kInf)
          add("bound_order", where + "." + name + idx(k), "lower bound exceeds upper bound");
    };
    bounds(r.bounds_b, Mb, "bounds_b");
    bounds(r.bounds_a, Ma, "bounds_a");
  }
  if (lattice_ok && noise_ok) {
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < K[t]; ++i)
        for (std::size_t j = 0; j < K[t + 1]; ++j) {
          if (!(p.markov.transitions[t][i][j] > 0.0)) continue;
          for (std::size_t e = 0; e < p.noise.support_sizes[t]; ++e) {
            if (!(p.noise.probabilities[t][e] > 0.0)) continue;
            const ScenarioKey key{t, i, j, e};
            if (!p.realizations.contains(key))
              add("realization_missing", "realizations" + to_string(key),
                  "missing realization for positive-probability edge " + to_string(key));
          }
        }
  }

  // Terminal function.
  const auto& term = p.terminal;
  const std::size_t expected_lists = term.per_markov ? (lattice_ok ? K[T] : term.cuts.size()) : 1;
  if (term.cuts.size() != expected_lists) {
    add("terminal_shape", "terminal.cuts",
        "expected " + std::to_string(expected_lists) + " cut list(s)" +
            (term.per_markov ? " (one per terminal Markov state)" : ""));
  }
  if (!term.rows.empty() && term.rows.size() != term.cuts.size())
    add("terminal_shape", "terminal.rows", "row lists must match cut lists");
  for (std::size_t k = 0; k < term.cuts.size(); ++k) {
    if (term.cuts[k].empty())
      add("terminal_empty", "terminal.cuts" + idx(k), "terminal function needs at least one cut");
    for (std::size_t c = 0; c < term.cuts[k].size(); ++c) {
      const auto& cut = term.cuts[k][c];
      if (cut.beta.size() != N)
        add("terminal_shape", "terminal.cuts" + idx(k) + idx(c), "beta must have length N");
      else if (!std::isfinite(cut.alpha) || !detail::finite_all(cut.beta))
        add("non_finite", "terminal.cuts" + idx(k) + idx(c), "cut must be finite");
    }
  }
  for (std::size_t k = 0; k < term.rows.size(); ++k)
    for (std::size_t c = 0; c < term.rows[k].size(); ++c)
      if (term.rows[k][c].ax.size() != N)
        add("terminal_shape", "terminal.rows" + idx(k) + idx(c), "ax must have length N");

  // Initial state and state box.
  if (p.state_bounds) {
    if (p.state_bounds->size() != N)
      add("state_bounds_shape", "state_bounds", "expected N = " + std::to_string(N) + " bounds");
    else
      for (std::size_t k = 0; k < N; ++k) {
        const auto& b = (*p.state_bounds)[k];
        if (!(b.lower <= b.upper) || b.lower == kInf || b.upper == -kInf)
          add("bound_order", "state_bounds" + idx(k), "lower bound exceeds upper bound");
      }
  }
  if (p.initial_state) {
    if (p.initial_state->size() != N)
      add("initial_state_shape", "initial_state", "expected length N = " + std::to_string(N));
    else if (!detail::finite_all(*p.initial_state))
      add("non_finite", "initial_state", "initial state must be finite");
  } else {
    bool bounded = p.state_bounds && p.state_bounds->size() == N;
    if (bounded)
      for (const auto& b : *p.state_bounds)
        if (!std::isfinite(b.lower) || !std::isfinite(b.upper)) bounded = false;
    if (!bounded)
      add("free_initial_unbounded", "state_bounds", "state_bounds required (bounded) when initial_state is free");
  }

  if (p.stage_lower_bounds.size() != T + 1) {
    add("lower_bounds_shape", "stage_lower_bounds", "expected T+1 = " + std::to_string(T + 1) + " entries");
  } else {
    for (std::size_t t = 0; t <= T; ++t)
      if (!std::isfinite(p.stage_lower_bounds[t]))
        add("non_finite", "stage_lower_bounds" + idx(t), "stage lower bound must be finite");
  }
  return report;
}

struct ScenarioWeight {
  std::size_t j = 0;  // next Markov state
  std::size_t e = 0;  // noise index
  double probability = 0.0;
};

/// Conditional distribution of (i_{t+1}, e_{t+1}) given i_t = i, restricted to
/// positive-probability pairs, ordered by (j, e).
inline std::vector<ScenarioWeight> scenario_weights(const DhdProblem& p, std::size_t t, std::size_t i) {
  if (t >= p.dims.horizon) throw std::out_of_range("scenario_weights: stage " + std::to_string(t) + " out of range");
  if (i >= p.markov.states_per_stage.at(t))
    throw std::out_of_range("scenario_weights: Markov state " + std::to_string(i) + " out of range at stage " +
                            std::to_string(t));
  std::vector<ScenarioWeight> out;
  const auto& row = p.markov.transitions[t][i];
  const auto& q = p.noise.probabilities[t];
  for (std::size_t j = 0; j < row.size(); ++j)
    for (std::size_t e = 0; e < q.size(); ++e) {
      const double w = row[j] * q[e];
      if (w > 0.0) out.push_back({j, e, w});
    }
  return out;
}

}  // namespace dhdsddp
