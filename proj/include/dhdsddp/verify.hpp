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

// Cut validity against exact cost-to-go values on a state grid.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dhdsddp/cuts.hpp"
#include "dhdsddp/oracle.hpp"
#include "dhdsddp/sddp.hpp"

namespace dhdsddp {

/// Box used for grid checks: state_bounds when given, otherwise the hull of
/// the initial state and all cut source states, padded by 1.
inline std::vector<Bound> verification_box(const DhdProblem& p, const CutStore& s) {
  const std::size_t N = p.dims.state_dim;
  if (p.state_bounds) {
    bool finite = true;
    for (const auto& b : *p.state_bounds) finite = finite && std::isfinite(b.lower) && std::isfinite(b.upper);
    if (finite) return *p.state_bounds;
  }
  std::vector<Bound> box(N, Bound{kInf, -kInf});
  auto include = [&](const Vector& x) {
    for (std::size_t k = 0; k < N; ++k) {
      box[k].lower = std::min(box[k].lower, x[k]);
      box[k].upper = std::max(box[k].upper, x[k]);
    }
  };
  if (p.initial_state) include(*p.initial_state);
  for (std::size_t t = 0; t < s.horizon(); ++t)
    for (std::size_t i = 0; i < s.num_markov_states(t); ++i)
      for (const auto& c : s.cuts(t, i))
        if (c.iteration_born > 0) include(c.source_state);
  for (std::size_t k = 0; k < N; ++k) {
    if (box[k].lower > box[k].upper) box[k] = Bound{0.0, 0.0};
    const Bound sb = p.state_bounds ? (*p.state_bounds)[k] : Bound{};
    box[k].lower = std::max(box[k].lower - 1.0, sb.lower);
    box[k].upper = std::min(box[k].upper + 1.0, sb.upper);
  }
  return box;
}

/// Exactly `count` points in the box: a full lattice for N <= 2 (100 = 10 x 10
/// in two dimensions), a lattice topped up with seeded uniform points otherwise.
inline std::vector<Vector> state_grid(const std::vector<Bound>& box, std::size_t count, std::uint64_t seed = 7) {
  const std::size_t N = box.size();
  std::vector<Vector> out;
  if (count == 0 || N == 0) return out;
  std::size_t per_dim = 1;
  while (true) {
    std::size_t next = 1;
    for (std::size_t k = 0; k < N; ++k) next *= per_dim + 1;
    if (next > count) break;
    ++per_dim;
  }
  auto coord = [&](std::size_t k, std::size_t idx) {
    if (per_dim == 1) return 0.5 * (box[k].lower + box[k].upper);
    return box[k].lower + (box[k].upper - box[k].lower) * static_cast<double>(idx) / static_cast<double>(per_dim - 1);
  };
  std::vector<std::size_t> idx(N, 0);
  while (out.size() < count) {
    Vector x(N);
    for (std::size_t k = 0; k < N; ++k) x[k] = coord(k, idx[k]);
    out.push_back(std::move(x));
    std::size_t k = 0;
    while (k < N && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == N) break;
  }
  Rng rng(seed);
  while (out.size() < count) {
    Vector x(N);
    for (std::size_t k = 0; k < N; ++k) x[k] = box[k].lower + (box[k].upper - box[k].lower) * rng.uniform();
    out.push_back(std::move(x));
  }
  return out;
}

struct CutValidityReport {
  std::size_t points_checked = 0;
  std::size_t points_infeasible = 0;  // J = +inf there, every cut is trivially valid
  std::size_t cuts_checked = 0;
  std::size_t violations = 0;
  double max_violation = 0.0;  // max of alpha + beta.X - J(X)
};

/// Checks every stored cut at stages 0..T-1 against exact_value on a grid
/// of points_per_state points for every (t, i).
inline CutValidityReport check_cut_validity(const DhdProblem& p, const CutStore& s, std::size_t points_per_state = 100,
                                            double tolerance = 1e-6, std::size_t max_nonzeros = 1'000'000) {
  CutValidityReport rep;
  const auto grid = state_grid(verification_box(p, s), points_per_state);
  for (std::size_t t = 0; t < p.dims.horizon; ++t)
    for (std::size_t i = 0; i < p.num_markov_states(t); ++i) {
      const auto& cuts = s.cuts(t, i);
      rep.cuts_checked += cuts.size();
      for (const auto& x : grid) {
        double exact;
        try {
          exact = exact_value(p, t, i, x, max_nonzeros);
        } catch (const OracleInfeasible&) {
          ++rep.points_infeasible;
          continue;
        }
        ++rep.points_checked;
        for (const auto& c : cuts) {
          const double excess = c.value_at(x) - exact;
          rep.max_violation = std::max(rep.max_violation, excess);
          if (excess > tolerance) ++rep.violations;
        }
      }
    }
  return rep;
}

}  // namespace dhdsddp
