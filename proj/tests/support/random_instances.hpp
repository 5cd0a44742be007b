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

// Seeded generators for small test instances and fixtures.
//
// Random instances have relatively complete recourse on the whole state box:
// rows of A have absolute sum <= 1/2, every control lies in [0, 2] (scaled
// by dimension), |W| <= 1, so from any X in [-20, 20]^N the next state stays
// within [-15, 15]^N. Polyhedral rows only couple controls and are always
// satisfiable by Ua at its upper bound.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dhdsddp/model.hpp"

namespace dhdsddp::testing {

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed * 0x9E3779B97F4A7C15ULL + 12345) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  /// Multiple of 1/8 in [lo, hi]; keeps generated data exactly representable.
  double grid(double lo, double hi) { return std::round(uniform(lo, hi) * 8.0) / 8.0; }

 private:
  std::mt19937_64 engine_;
};

struct InstanceShape {
  std::size_t min_horizon = 2;
  std::size_t max_horizon = 3;
  std::size_t state_dim = 2;
  std::size_t control_b_dim = 1;
  std::size_t control_a_dim = 1;
  std::size_t max_markov = 2;
  std::size_t max_noise = 2;
  bool free_initial = false;
  bool allow_per_markov_terminal = true;
  double state_box = 20.0;
};

inline Vector probability_vector(TestRng& rng, std::size_t n) {
  if (n == 1) return {1.0};
  Vector p(n);
  double sum = 0.0;
  for (auto& v : p) {
    v = std::round(rng.uniform(1.0, 4.0));
    sum += v;
  }
  for (auto& v : p) v /= sum;
  // Push the rounding residue into the last entry so the sum is 1 to the last bit.
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) head += p[k];
  p[n - 1] = 1.0 - head;
  return p;
}

inline StageRealization random_realization(TestRng& rng, const Dims& d) {
  const std::size_t N = d.state_dim, Mb = d.control_b_dim, Ma = d.control_a_dim;
  StageRealization r;
  r.A = Matrix(N, N);
  for (std::size_t k = 0; k < N; ++k) {
    double abs_sum = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      r.A(k, c) = rng.grid(-1.0, 1.0);
      abs_sum += std::abs(r.A(k, c));
    }
    if (abs_sum > 0.5)
      for (std::size_t c = 0; c < N; ++c) r.A(k, c) *= 0.5 / abs_sum;
  }
  r.Bb = Matrix(N, Mb);
  for (auto& v : r.Bb.data) v = rng.grid(-1.0, 1.0) / static_cast<double>(Mb);
  r.Ba = Matrix(N, Ma);
  for (auto& v : r.Ba.data) v = rng.grid(-1.0, 1.0) / static_cast<double>(Ma);
  r.W.resize(N);
  for (auto& v : r.W) v = rng.grid(-1.0, 1.0);
  r.cost_x.resize(N);
  for (auto& v : r.cost_x) v = rng.grid(-0.25, 0.25);
  r.cost_b.resize(Mb);
  for (auto& v : r.cost_b) v = rng.grid(-1.0, 2.0);
  r.cost_a.resize(Ma);
  for (auto& v : r.cost_a) v = rng.grid(-1.0, 3.0);
  r.bounds_b.assign(Mb, Bound{0.0, 2.0});
  r.bounds_a.assign(Ma, Bound{0.0, 2.0});
  if (Ma > 0 && rng.coin(0.7)) {
    PolyRow row;
    row.ax.assign(N, 0.0);
    row.ab.resize(Mb);
    for (auto& v : row.ab) v = rng.grid(0.0, 1.0);
    row.aa.resize(Ma);
    double aa_sum = 0.0;
    for (auto& v : row.aa) {
      v = rng.grid(0.25, 1.0);
      aa_sum += v;
    }
    row.sense = Sense::GreaterEqual;
    row.rhs = rng.grid(0.0, 2.0 * aa_sum);
    r.rows.push_back(std::move(row));
  }
  return r;
}

/// Lower bound on every reachable cost-to-go: worst stage cost over the box
/// at each remaining transition plus the smallest terminal cut over the box.
inline Vector compute_stage_lower_bounds(const DhdProblem& p, double box) {
  const std::size_t T = p.dims.horizon;
  Vector stage_min(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double worst = kInf;
    for (const auto& [key, r] : p.realizations) {
      if (key.t != t) continue;
      double c = 0.0;
      for (double v : r.cost_x) c -= std::abs(v) * box;
      for (std::size_t k = 0; k < r.cost_b.size(); ++k)
        c += std::min(r.cost_b[k] * r.bounds_b[k].lower, r.cost_b[k] * r.bounds_b[k].upper);
      for (std::size_t k = 0; k < r.cost_a.size(); ++k)
        c += std::min(r.cost_a[k] * r.bounds_a[k].lower, r.cost_a[k] * r.bounds_a[k].upper);
      worst = std::min(worst, c);
    }
    stage_min[t] = worst;
  }
  double terminal = kInf;
  for (const auto& list : p.terminal.cuts) {
    const auto& c = list.front();
    double v = c.alpha;
    for (double b : c.beta) v -= std::abs(b) * box;
    terminal = std::min(terminal, v);
  }
  Vector lb(T + 1, 0.0);
  lb[T] = std::floor(terminal) - 1.0;
  for (std::size_t t = T; t-- > 0;) lb[t] = lb[t + 1] + std::floor(stage_min[t]) - 1.0;
  return lb;
}

inline DhdProblem random_instance(std::uint64_t seed, const InstanceShape& shape = {}) {
  TestRng rng(seed);
  DhdProblem p;
  const std::size_t span = shape.max_horizon - shape.min_horizon + 1;
  p.dims.horizon = shape.min_horizon + rng.index(span);
  p.dims.state_dim = shape.state_dim;
  p.dims.control_b_dim = shape.control_b_dim;
  p.dims.control_a_dim = shape.control_a_dim;
  const std::size_t T = p.dims.horizon;
  const std::size_t N = p.dims.state_dim;

  p.markov.states_per_stage.push_back(1);
  for (std::size_t t = 1; t <= T; ++t) p.markov.states_per_stage.push_back(1 + rng.index(shape.max_markov));
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Vector> m;
    for (std::size_t i = 0; i < p.markov.states_per_stage[t]; ++i)
      m.push_back(probability_vector(rng, p.markov.states_per_stage[t + 1]));
    p.markov.transitions.push_back(std::move(m));
    const std::size_t E = 1 + rng.index(shape.max_noise);
    p.noise.support_sizes.push_back(E);
    p.noise.probabilities.push_back(probability_vector(rng, E));
  }
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < p.markov.states_per_stage[t]; ++i)
      for (std::size_t j = 0; j < p.markov.states_per_stage[t + 1]; ++j)
        for (std::size_t e = 0; e < p.noise.support_sizes[t]; ++e)
          p.realizations.emplace(ScenarioKey{t, i, j, e}, random_realization(rng, p.dims));

  const std::size_t KT = p.markov.states_per_stage[T];
  p.terminal.per_markov = shape.allow_per_markov_terminal && KT > 1 && rng.coin();
  const std::size_t lists = p.terminal.per_markov ? KT : 1;
  for (std::size_t l = 0; l < lists; ++l) {
    std::vector<AffinePiece> cuts;
    const std::size_t count = 2 + rng.index(3);
    for (std::size_t c = 0; c < count; ++c) {
      AffinePiece piece;
      piece.alpha = rng.grid(-1.0, 1.0);
      piece.beta.resize(N);
      for (auto& b : piece.beta) b = rng.grid(-2.0, 2.0);
      cuts.push_back(std::move(piece));
    }
    p.terminal.cuts.push_back(std::move(cuts));
  }

  p.state_bounds = std::vector<Bound>(N, Bound{-shape.state_box, shape.state_box});
  if (!shape.free_initial) {
    Vector x0(N);
    for (auto& v : x0) v = rng.grid(-2.0, 2.0);
    p.initial_state = x0;
  }
  p.stage_lower_bounds = compute_stage_lower_bounds(p, shape.state_box);
  return p;
}

}  // namespace dhdsddp::testing
