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

// Outer approximations of the cost-to-go functions J_t(., i) as pointwise
// maxima of affine cuts, one list per (stage, Markov state).

#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dhdsddp/model.hpp"
#include "dhdsddp/model_io.hpp"

namespace dhdsddp {

/// alpha + beta.X, generated at source_state.
struct Cut {
  double alpha = 0.0;
  Vector beta;
  std::size_t iteration_born = 0;
  Vector source_state;

  double value_at(const Vector& x) const { return alpha + dot(beta, x); }
};

class CutStore {
 public:
  CutStore() = default;

  /// Stage t < T gets the constant cut LB_t per Markov state; stage T holds
  /// the terminal function.
  static CutStore initialize(const DhdProblem& p) {
    CutStore s;
    s.state_dim_ = p.dims.state_dim;
    s.horizon_ = p.dims.horizon;
    const std::size_t T = p.dims.horizon;
    s.cuts_.resize(T + 1);
    for (std::size_t t = 0; t < T; ++t) {
      s.cuts_[t].resize(p.num_markov_states(t));
      for (auto& list : s.cuts_[t])
        list.push_back(Cut{p.stage_lower_bounds.at(t), Vector(s.state_dim_, 0.0), 0, Vector(s.state_dim_, 0.0)});
    }
    const std::size_t KT = p.num_markov_states(T);
    s.cuts_[T].resize(KT);
    s.terminal_rows_.resize(KT);
    for (std::size_t j = 0; j < KT; ++j) {
      for (const auto& c : p.terminal.cuts_for(j))
        s.cuts_[T][j].push_back(Cut{c.alpha, c.beta, 0, Vector(s.state_dim_, 0.0)});
      s.terminal_rows_[j] = p.terminal.rows_for(j);
    }
    return s;
  }

  std::size_t horizon() const { return horizon_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t num_markov_states(std::size_t t) const { return cuts_.at(t).size(); }

  const std::vector<Cut>& cuts(std::size_t t, std::size_t i) const {
    check_index(t, i);
    return cuts_[t][i];
  }

  /// Constraints on X_T that the terminal function carries as its domain.
  const std::vector<StateRow>& terminal_rows(std::size_t j) const { return terminal_rows_.at(j); }

  double evaluate(std::size_t t, std::size_t i, const Vector& x) const {
    check_index(t, i);
    if (x.size() != state_dim_) throw std::invalid_argument("evaluate: state has the wrong dimension");
    double v = -kInf;
    for (const auto& c : cuts_[t][i]) v = std::max(v, c.value_at(x));
    return v;
  }

  /// Adds c at (t, i). Returns false when an identical cut (alpha and beta
  /// within 1e-12) is already stored.
  bool add_cut(std::size_t t, std::size_t i, Cut c) {
    check_index(t, i);
    if (c.beta.size() != state_dim_) throw std::invalid_argument("add_cut: beta has the wrong dimension");
    if (!std::isfinite(c.alpha)) throw std::invalid_argument("add_cut: non-finite intercept");
    for (double b : c.beta)
      if (!std::isfinite(b)) throw std::invalid_argument("add_cut: non-finite slope");
    if (c.source_state.empty()) c.source_state.assign(state_dim_, 0.0);
    for (const auto& existing : cuts_[t][i]) {
      if (std::abs(existing.alpha - c.alpha) > 1e-12) continue;
      bool same = true;
      for (std::size_t k = 0; k < state_dim_ && same; ++k)
        same = std::abs(existing.beta[k] - c.beta[k]) <= 1e-12;
      if (same) return false;
    }
    cuts_[t][i].push_back(std::move(c));
    return true;
  }

  std::size_t num_cuts(std::size_t t) const {
    std::size_t n = 0;
    for (const auto& list : cuts_.at(t)) n += list.size();
    return n;
  }

  /// Cuts at stages 0..T-1.
  std::size_t total_cuts() const {
    std::size_t n = 0;
    for (std::size_t t = 0; t < horizon_; ++t) n += num_cuts(t);
    return n;
  }

 private:
  void check_index(std::size_t t, std::size_t i) const {
    if (t >= cuts_.size() || i >= cuts_[t].size())
      throw std::out_of_range("cut store index (" + std::to_string(t) + ", " + std::to_string(i) + ") out of range");
  }

  std::size_t state_dim_ = 0;
  std::size_t horizon_ = 0;
  std::vector<std::vector<std::vector<Cut>>> cuts_;
  std::vector<std::vector<StateRow>> terminal_rows_;
};

/// Cut dump: JSON array of {t, i, alpha, beta, iteration_born, source_state}
/// for stages 0..T-1. Terminal cuts belong to the problem and are not written.
inline std::string cuts_to_json(const CutStore& s, int indent = 1) {
  using nlohmann::json;
  json out = json::array();
  for (std::size_t t = 0; t < s.horizon(); ++t)
    for (std::size_t i = 0; i < s.num_markov_states(t); ++i)
      for (const auto& c : s.cuts(t, i))
        out.push_back(json{{"t", t},
                           {"i", i},
                           {"alpha", c.alpha},
                           {"beta", c.beta},
                           {"iteration_born", c.iteration_born},
                           {"source_state", c.source_state}});
  return out.dump(indent);
}

/// Adds every cut of a dump to s. Returns the number of cuts actually added.
inline std::size_t load_cuts(CutStore& s, std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ProblemFormatError(std::string("cut file: ") + e.what());
  }
  if (!doc.is_array()) throw SchemaError("$", "cut file must be a JSON array");
  std::size_t added = 0;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& r = doc[k];
    const std::string path = "[" + std::to_string(k) + "]";
    const std::size_t t = io::to_count(io::require(r, "t", path), path + ".t");
    const std::size_t i = io::to_count(io::require(r, "i", path), path + ".i");
    if (t >= s.horizon() || i >= s.num_markov_states(t))
      throw SchemaError(path, "cut index (" + std::to_string(t) + ", " + std::to_string(i) + ") out of range");
    Cut c;
    c.alpha = io::to_number(io::require(r, "alpha", path), path + ".alpha", 0.0);
    c.beta = io::to_vector(io::require(r, "beta", path), path + ".beta");
    if (c.beta.size() != s.state_dim()) throw SchemaError(path + ".beta", "expected length N");
    if (const auto* ib = io::find(r, "iteration_born"); ib && !ib->is_null())
      c.iteration_born = io::to_count(*ib, path + ".iteration_born");
    if (const auto* ss = io::find(r, "source_state"); ss && !ss->is_null())
      c.source_state = io::to_vector(*ss, path + ".source_state");
    if (!c.source_state.empty() && c.source_state.size() != s.state_dim())
      throw SchemaError(path + ".source_state", "expected length N");
    try {
      if (s.add_cut(t, i, std::move(c))) ++added;
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path, e.what());
    }
  }
  return added;
}

inline std::size_t load_cuts_file(CutStore& s, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemFormatError("cannot open cut file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_cuts(s, buf.str());
}

}  // namespace dhdsddp
