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

// SDDP in control format: cuts live on the N-dimensional state only.
//
// Forward pass: sample (i_1, e_1), ..., (i_T, e_T); at each stage solve the
// two-stage problem for Ub, then the realized scenario's recourse for Ua and
// the next state. Backward pass: for t = T-1 .. 0 solve the two-stage problem
// at the visited state against the already refreshed cuts of t+1 and add
// value + V.(X - X_t) at (t, i_t).

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dhdsddp/cuts.hpp"
#include "dhdsddp/lp.hpp"
#include "dhdsddp/model.hpp"
#include "dhdsddp/stage.hpp"

namespace dhdsddp {

/// std::mt19937_64 with inverse-CDF sampling from raw 64-bit draws, so a
/// seed gives the same path on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Index k with probability probs[k]; zero-probability entries are never drawn.
  std::size_t sample(const Vector& probs) {
    const double u = uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (!(probs[k] > 0.0)) continue;
      cumulative += probs[k];
      last_positive = k;
      if (u < cumulative) return k;
    }
    return last_positive;
  }

  std::string state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (!is) throw std::invalid_argument("invalid generator state");
  }

 private:
  std::mt19937_64 engine_;
};

struct Trajectory {
  std::vector<std::size_t> markov;  // i_0 .. i_T
  std::vector<std::size_t> noise;   // e_1 .. e_T, stored at index t for transition t -> t+1
  std::vector<Vector> states;       // X_0 .. X_T
  std::vector<Vector> u_b;          // per transition
  std::vector<Vector> u_a;          // per transition
  double cost = 0.0;
};

struct SddpConfig {
  std::size_t max_iterations = 200;
  double bound_stall_tolerance = 1e-7;
  std::size_t bound_stall_patience = 20;
  std::uint64_t seed = 0;
  bool share_cuts_all_states = false;
  std::size_t forward_paths_per_iteration = 1;
  StageOptions stage;
};

enum class Termination { MaxIterations, BoundStall, Error };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::MaxIterations: return "MaxIterations";
    case Termination::BoundStall: return "BoundStall";
    case Termination::Error: return "Error";
  }
  return "?";
}

struct IterationRecord {
  std::size_t iteration = 0;
  double lower_bound = 0.0;
  double path_cost = std::numeric_limits<double>::quiet_NaN();  // NaN for the initialization row
  std::size_t cuts_total = 0;
  std::vector<std::size_t> cuts_per_stage;
  double wall_ms = 0.0;
};

struct SolveReport {
  std::vector<IterationRecord> history;
  Termination termination = Termination::MaxIterations;
  std::string error;
  CutStore cuts;
  SddpConfig config;
  std::uint64_t seed = 0;
  std::string rng_state;

  double final_lower_bound() const { return history.empty() ? -kInf : history.back().lower_bound; }
  std::size_t iterations() const { return history.empty() ? 0 : history.back().iteration; }
};

/// argmin of the stage-0 envelope over the state box.
struct EnvelopeMinimum {
  double value = 0.0;
  Vector state;
};

inline EnvelopeMinimum minimize_envelope(const DhdProblem& p, const CutStore& s, const LpOptions& opt = {}) {
  const std::size_t N = p.dims.state_dim;
  if (!p.state_bounds) throw std::invalid_argument("free initial state requires state_bounds");
  LinearProgram lp;
  for (std::size_t k = 0; k < N; ++k)
    lp.add_variable(0.0, (*p.state_bounds)[k].lower, (*p.state_bounds)[k].upper, "X0[" + std::to_string(k) + "]");
  const std::size_t phi = lp.add_variable(1.0, -kInf, kInf, "phi");
  for (const auto& c : s.cuts(0, 0)) {
    std::vector<Term> terms{{phi, 1.0}};
    for (std::size_t k = 0; k < N; ++k)
      if (c.beta[k] != 0.0) terms.push_back({k, -c.beta[k]});
    lp.add_row(std::move(terms), Sense::GreaterEqual, c.alpha, "cut");
  }
  const LpSolution sol = solve(lp, opt);
  if (sol.status != LpStatus::Optimal)
    throw StageError(sol.status == LpStatus::Infeasible ? StageFailure::Infeasible : StageFailure::Unbounded, 0, 0,
                     {}, "initial-state problem is not solvable: " + std::string(to_string(sol.status)));
  EnvelopeMinimum out;
  out.state.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(N));
  out.value = sol.objective;
  return out;
}

/// Valid lower bound on the optimal value from the stage-0 cuts.
inline double lower_bound(const DhdProblem& p, const CutStore& s, const LpOptions& opt = {}) {
  if (p.initial_state) return s.evaluate(0, 0, *p.initial_state);
  return minimize_envelope(p, s, opt).value;
}

/// Draws (i_{t+1}, e_{t+1}) for t = 0 .. T-1, starting from i_0 = 0.
inline void sample_path(const DhdProblem& p, Rng& rng, Trajectory& traj) {
  const std::size_t T = p.dims.horizon;
  traj.markov.assign(T + 1, 0);
  traj.noise.assign(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    traj.markov[t + 1] = rng.sample(p.markov.transitions[t][traj.markov[t]]);
    traj.noise[t] = rng.sample(p.noise.probabilities[t]);
  }
}

inline Trajectory forward_pass(const DhdProblem& p, const CutStore& s, Rng& rng, const StageOptions& opt = {}) {
  const std::size_t T = p.dims.horizon;
  Trajectory traj;
  sample_path(p, rng, traj);
  traj.states.resize(T + 1);
  traj.u_b.resize(T);
  traj.u_a.resize(T);
  traj.states[0] = p.initial_state ? *p.initial_state : minimize_envelope(p, s, opt.lp).state;
  double cost = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t i = traj.markov[t];
    const Vector& x = traj.states[t];
    const StageSolution first = solve_stage(p, s, t, i, x, opt);
    const RecourseSolution second =
        solve_recourse(p, s, t, i, traj.markov[t + 1], traj.noise[t], x, first.u_b, opt);
    traj.u_b[t] = first.u_b;
    traj.u_a[t] = second.u_a;
    traj.states[t + 1] = second.x_next;
    cost += second.stage_cost;
  }
  cost += p.terminal_value(traj.markov[T], traj.states[T]);
  traj.cost = cost;
  return traj;
}

/// Adds one cut per visited (t, i_t), or per (t, i) for every i when
/// share_all_states is set (all evaluated at the trajectory's X_t).
/// Returns the number of cuts added.
inline std::size_t backward_pass(const DhdProblem& p, CutStore& s, const std::vector<Trajectory>& paths,
                                 std::size_t iteration, bool share_all_states, const StageOptions& opt = {}) {
  const std::size_t T = p.dims.horizon;
  std::size_t added = 0;
  for (std::size_t tt = T; tt-- > 0;) {
    for (const auto& traj : paths) {
      const Vector& x = traj.states[tt];
      auto refine = [&](std::size_t i) {
        const StageSolution sol = solve_stage(p, s, tt, i, x, opt);
        Cut c;
        c.beta = sol.subgradient;
        c.alpha = sol.value - dot(sol.subgradient, x);
        c.iteration_born = iteration;
        c.source_state = x;
        if (s.add_cut(tt, i, std::move(c))) ++added;
      };
      if (share_all_states) {
        for (std::size_t i = 0; i < p.num_markov_states(tt); ++i) refine(i);
      } else {
        refine(traj.markov[tt]);
      }
    }
  }
  return added;
}

inline std::size_t backward_pass(const DhdProblem& p, CutStore& s, const Trajectory& traj, std::size_t iteration = 0,
                                 bool share_all_states = false, const StageOptions& opt = {}) {
  return backward_pass(p, s, std::vector<Trajectory>{traj}, iteration, share_all_states, opt);
}

namespace detail {

inline IterationRecord make_record(const CutStore& s, std::size_t iteration, double lb, double path_cost,
                                   double wall_ms) {
  IterationRecord r;
  r.iteration = iteration;
  r.lower_bound = lb;
  r.path_cost = path_cost;
  r.cuts_total = s.total_cuts();
  for (std::size_t t = 0; t < s.horizon(); ++t) r.cuts_per_stage.push_back(s.num_cuts(t));
  r.wall_ms = wall_ms;
  return r;
}

}  // namespace detail

/// Alternates forward and backward passes until max_iterations or until the
/// lower bound has improved by less than bound_stall_tolerance for
/// bound_stall_patience consecutive iterations. Stage errors end the run
/// with Termination::Error and the partial history.
inline SolveReport run(const DhdProblem& p, const SddpConfig& config, std::optional<CutStore> warm_start = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(Clock::now() - start).count(); };

  SolveReport report;
  report.config = config;
  report.seed = config.seed;
  report.cuts = warm_start ? std::move(*warm_start) : CutStore::initialize(p);
  Rng rng(config.seed);

  double lb;
  try {
    lb = lower_bound(p, report.cuts, config.stage.lp);
  } catch (const std::exception& e) {
    report.termination = Termination::Error;
    report.error = e.what();
    report.rng_state = rng.state();
    return report;
  }
  report.history.push_back(detail::make_record(report.cuts, 0, lb, std::numeric_limits<double>::quiet_NaN(),
                                               elapsed_ms()));
  report.termination = Termination::MaxIterations;
  std::size_t stall = 0;
  const std::size_t paths_per_iteration = std::max<std::size_t>(1, config.forward_paths_per_iteration);
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    try {
      std::vector<Trajectory> paths;
      paths.reserve(paths_per_iteration);
      for (std::size_t n = 0; n < paths_per_iteration; ++n)
        paths.push_back(forward_pass(p, report.cuts, rng, config.stage));
      backward_pass(p, report.cuts, paths, k, config.share_cuts_all_states, config.stage);
      const double next = lower_bound(p, report.cuts, config.stage.lp);
      double path_cost = 0.0;
      for (const auto& path : paths) path_cost += path.cost;
      path_cost /= static_cast<double>(paths.size());
      report.history.push_back(detail::make_record(report.cuts, k, next, path_cost, elapsed_ms()));
      if (next - lb < config.bound_stall_tolerance)
        ++stall;
      else
        stall = 0;
      lb = next;
      if (config.bound_stall_patience > 0 && stall >= config.bound_stall_patience) {
        report.termination = Termination::BoundStall;
        break;
      }
    } catch (const std::exception& e) {
      report.termination = Termination::Error;
      report.error = e.what();
      break;
    }
  }
  report.rng_state = rng.state();
  return report;
}

struct SimulationStats {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> costs;
};

/// Monte Carlo cost of the policy induced by the cuts; no cuts are added.
inline SimulationStats simulate_policy(const DhdProblem& p, const CutStore& s, std::size_t n_paths, Rng& rng,
                                       const StageOptions& opt = {}) {
  if (n_paths == 0) throw std::invalid_argument("simulate_policy: n_paths must be at least 1");
  SimulationStats out;
  out.costs.reserve(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) out.costs.push_back(forward_pass(p, s, rng, opt).cost);
  double sum = 0.0;
  for (double c : out.costs) sum += c;
  out.mean = sum / static_cast<double>(n_paths);
  if (n_paths > 1) {
    double ss = 0.0;
    for (double c : out.costs) ss += (c - out.mean) * (c - out.mean);
    out.standard_error = std::sqrt(ss / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths));
  }
  return out;
}

/// Convergence log. wall_ms is written as 0 unless with_timing is set, which
/// keeps logs of identical runs byte-identical.
inline void write_convergence_csv(std::ostream& os, const SolveReport& report, bool with_timing = false) {
  os << "iteration,lower_bound,path_cost,cuts_total,wall_ms\n";
  os << std::setprecision(17);
  for (const auto& r : report.history) {
    os << r.iteration << ',' << r.lower_bound << ',';
    if (std::isnan(r.path_cost))
      os << "nan";
    else
      os << r.path_cost;
    os << ',' << r.cuts_total << ',';
    if (with_timing)
      os << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat << std::setprecision(17);
    else
      os << 0;
    os << '\n';
  }
}

}  // namespace dhdsddp
