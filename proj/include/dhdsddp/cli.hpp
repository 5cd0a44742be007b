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

// Command implementations behind the dhdsddp executable. Each returns a
// process exit code:
//   0  success
//   1  verify ran but a check failed
//   2  file, schema, or configuration error (including missing cuts)
//   3  solver error (stage infeasible or unbounded, LP failure)
//   4  extensive form exceeds the oracle size cap

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dhdsddp/cuts.hpp"
#include "dhdsddp/model_io.hpp"
#include "dhdsddp/oracle.hpp"
#include "dhdsddp/sddp.hpp"
#include "dhdsddp/stage.hpp"
#include "dhdsddp/verify.hpp"

namespace dhdsddp::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInputError = 2, kSolverError = 3, kTooLarge = 4 };

struct RunConfig {
  std::string command = "solve";  // solve | verify | simulate | export-cuts
  std::string problem;
  std::string out = ".";
  std::size_t max_iterations = 200;
  double tolerance = 1e-7;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  std::size_t n_paths = 1000;
  bool share_cuts = false;
  std::optional<std::string> warm_start;
  bool timing = false;                    // write measured wall_ms instead of 0
  bool dump_lp = false;                   // write the root stage LP as MPS
  std::size_t max_nonzeros = 1'000'000;  // oracle cap
  std::size_t grid_points = 100;         // per (t, i) in verify
};

/// Thresholds used by verify. All are at most 1e-5.
struct VerifyTolerances {
  double gap_relative = 1e-5;  // |lb - opt| <= gap_relative * (1 + |opt|)
  double cut = 1e-6;
  double hd = 1e-7;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void check_config(const RunConfig& cfg) {
  if (cfg.problem.empty()) throw InputError("--problem is required");
  if (!(cfg.tolerance >= 0.0)) throw InputError("--tol must be nonnegative");
  if (cfg.n_paths == 0) throw InputError("--paths must be positive");
  if (cfg.grid_points == 0) throw InputError("grid size must be positive");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw InputError("cannot create output directory '" + cfg.out + "': " + ec.message());
}

inline std::filesystem::path out_path(const RunConfig& cfg, const char* name) {
  return std::filesystem::path(cfg.out) / name;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw InputError("write failed for '" + path.string() + "'");
}

inline SddpConfig engine_config(const RunConfig& cfg) {
  SddpConfig c;
  c.max_iterations = cfg.max_iterations;
  c.bound_stall_tolerance = cfg.tolerance;
  c.bound_stall_patience = cfg.patience;
  c.seed = cfg.seed;
  c.share_cuts_all_states = cfg.share_cuts;
  return c;
}

inline std::optional<CutStore> load_warm_start(const DhdProblem& p, const RunConfig& cfg) {
  if (!cfg.warm_start) return std::nullopt;
  CutStore s = CutStore::initialize(p);
  load_cuts_file(s, *cfg.warm_start);
  return s;
}

inline std::string summary_text(const SolveReport& r) {
  std::ostringstream os;
  os << "lower_bound: " << format_double(r.final_lower_bound()) << '\n';
  os << "iterations: " << r.iterations() << '\n';
  os << "termination: " << to_string(r.termination) << '\n';
  os << "cuts_total: " << r.cuts.total_cuts() << '\n';
  os << "seed: " << r.seed << '\n';
  if (!r.error.empty()) os << "error: " << r.error << '\n';
  return os.str();
}

inline std::string checkpoint_json(const SolveReport& r) {
  nlohmann::json j;
  j["iteration"] = r.iterations();
  j["seed"] = r.seed;
  j["rng_state"] = r.rng_state;
  return j.dump(1) + "\n";
}

/// Writes the solve artifacts into cfg.out.
inline void write_solve_outputs(const RunConfig& cfg, const SolveReport& r) {
  std::ostringstream csv;
  write_convergence_csv(csv, r, cfg.timing);
  write_file(out_path(cfg, "convergence.csv"), csv.str());
  write_file(out_path(cfg, "cuts.json"), cuts_to_json(r.cuts));
  write_file(out_path(cfg, "checkpoint.json"), checkpoint_json(r));
  write_file(out_path(cfg, "summary.txt"), summary_text(r));
}

inline void dump_root_lp(const RunConfig& cfg, const DhdProblem& p, const CutStore& s) {
  Vector x0 = p.initial_state ? *p.initial_state : minimize_envelope(p, s).state;
  const auto prog = build_two_stage(p, s, 0, 0, x0);
  std::ostringstream os;
  write_mps(os, prog.lp, "STAGE0");
  write_file(out_path(cfg, "stage0.mps"), os.str());
}

/// Runs `body` and maps exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ProblemFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const TreeTooLarge& e) {
    err << "error: " << e.what() << '\n';
    return kTooLarge;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
}

}  // namespace detail

/// Writes convergence.csv, cuts.json, checkpoint.json and summary.txt.
inline int cmd_solve(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    detail::check_config(cfg);
    const DhdProblem p = load_problem_file(cfg.problem);
    const SolveReport r = run(p, detail::engine_config(cfg), detail::load_warm_start(p, cfg));
    detail::write_solve_outputs(cfg, r);
    if (cfg.dump_lp && r.termination != Termination::Error) detail::dump_root_lp(cfg, p, r.cuts);
    out << detail::summary_text(r);
    if (r.termination == Termination::Error) {
      err << "solver error: " << r.error << '\n';
      return static_cast<int>(kSolverError);
    }
    return static_cast<int>(kOk);
  });
}

struct VerifyOutcome {
  double optimum = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;
  CutValidityReport cuts;
  HdCheck hd;
  bool gap_ok = false;
  bool cuts_ok = false;
  bool hd_ok = false;
  bool passed() const { return gap_ok && cuts_ok && hd_ok; }
};

inline std::string verify_text(const VerifyOutcome& v) {
  std::ostringstream os;
  os << "oracle_optimum: " << detail::format_double(v.optimum) << '\n';
  os << "lower_bound: " << detail::format_double(v.lower_bound) << '\n';
  os << "gap: " << detail::format_double(v.gap) << (v.gap_ok ? " ok" : " FAIL") << '\n';
  os << "cut_points_checked: " << v.cuts.points_checked << '\n';
  os << "cut_points_infeasible: " << v.cuts.points_infeasible << '\n';
  os << "cut_violations: " << v.cuts.violations << (v.cuts_ok ? " ok" : " FAIL") << '\n';
  os << "cut_max_excess: " << detail::format_double(v.cuts.max_violation) << '\n';
  os << "hd_optimum: " << detail::format_double(v.hd.hd_optimum) << '\n';
  os << "hd_difference: " << detail::format_double(v.hd.difference) << (v.hd_ok ? " ok" : " FAIL") << '\n';
  os << "hd_state_dim: " << v.hd.hd_state_dim << ", dhd_state_dim: " << v.hd.dhd_state_dim << '\n';
  os << "verdict: " << (v.passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

/// Solves, then compares against the extensive-form oracle. Also writes the
/// solve artifacts and verify.txt into cfg.out.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                      const VerifyTolerances& tol = {}) {
  return detail::guarded(err, [&] {
    detail::check_config(cfg);
    const DhdProblem p = load_problem_file(cfg.problem);
    VerifyOutcome v;
    v.optimum = oracle_optimum(p, cfg.max_nonzeros);
    const SolveReport r = run(p, detail::engine_config(cfg), detail::load_warm_start(p, cfg));
    detail::write_solve_outputs(cfg, r);
    if (r.termination == Termination::Error) {
      err << "solver error: " << r.error << '\n';
      return static_cast<int>(kSolverError);
    }
    v.lower_bound = r.final_lower_bound();
    v.gap = std::abs(v.lower_bound - v.optimum);
    v.gap_ok = v.gap <= tol.gap_relative * (1.0 + std::abs(v.optimum));
    v.cuts = check_cut_validity(p, r.cuts, cfg.grid_points, tol.cut, cfg.max_nonzeros);
    v.cuts_ok = v.cuts.violations == 0;
    v.hd = check_hd_reformulation(p, cfg.max_nonzeros);
    v.hd_ok = v.hd.difference <= tol.hd;
    const std::string text = verify_text(v);
    detail::write_file(detail::out_path(cfg, "verify.txt"), text);
    out << text;
    return static_cast<int>(v.passed() ? kOk : kCheckFailed);
  });
}

/// Monte Carlo evaluation of a stored policy. Cuts come from --warm-start or
/// from <out>/cuts.json; writes simulation.csv and simulation_summary.txt.
inline int cmd_simulate(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    detail::check_config(cfg);
    const DhdProblem p = load_problem_file(cfg.problem);
    RunConfig c = cfg;
    if (!c.warm_start) {
      const auto fallback = detail::out_path(cfg, "cuts.json");
      if (!std::filesystem::exists(fallback))
        throw InputError("no cuts: pass --warm-start or run solve into '" + cfg.out + "' first");
      c.warm_start = fallback.string();
    }
    if (!std::filesystem::exists(*c.warm_start)) throw InputError("cut file '" + *c.warm_start + "' not found");
    const CutStore s = *detail::load_warm_start(p, c);
    Rng rng(cfg.seed);
    const SimulationStats stats = simulate_policy(p, s, cfg.n_paths, rng);
    const double lb = lower_bound(p, s);

    std::ostringstream csv;
    csv << "path_index,cost\n" << std::setprecision(17);
    for (std::size_t k = 0; k < stats.costs.size(); ++k) csv << k << ',' << stats.costs[k] << '\n';
    detail::write_file(detail::out_path(cfg, "simulation.csv"), csv.str());

    std::ostringstream sum;
    sum << "paths: " << cfg.n_paths << '\n';
    sum << "mean: " << detail::format_double(stats.mean) << '\n';
    sum << "standard_error: " << detail::format_double(stats.standard_error) << '\n';
    sum << "lower_bound: " << detail::format_double(lb) << '\n';
    sum << "gap_estimate: " << detail::format_double(stats.mean - lb) << '\n';
    detail::write_file(detail::out_path(cfg, "simulation_summary.txt"), sum.str());
    out << sum.str();
    return static_cast<int>(kOk);
  });
}

/// Solves (optionally from a warm start) and writes only cuts.json.
inline int cmd_export_cuts(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    detail::check_config(cfg);
    const DhdProblem p = load_problem_file(cfg.problem);
    const SolveReport r = run(p, detail::engine_config(cfg), detail::load_warm_start(p, cfg));
    if (r.termination == Termination::Error) {
      err << "solver error: " << r.error << '\n';
      return static_cast<int>(kSolverError);
    }
    const auto path = detail::out_path(cfg, "cuts.json");
    detail::write_file(path, cuts_to_json(r.cuts));
    out << "cuts: " << r.cuts.total_cuts() << '\n';
    out << "lower_bound: " << detail::format_double(r.final_lower_bound()) << '\n';
    out << "written: " << path.string() << '\n';
    return static_cast<int>(kOk);
  });
}

inline int dispatch(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (cfg.command == "solve") return cmd_solve(cfg, out, err);
  if (cfg.command == "verify") return cmd_verify(cfg, out, err);
  if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
  if (cfg.command == "export-cuts") return cmd_export_cuts(cfg, out, err);
  err << "error: unknown command '" << cfg.command << "'\n";
  return kInputError;
}

}  // namespace dhdsddp::cli
