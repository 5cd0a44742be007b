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

// Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dhdsddp/cli.hpp"
#include "dhdsddp/dhdsddp.hpp"
#include "support/fixtures.hpp"
#include "support/lp_oracle.hpp"
#include "support/random_instances.hpp"

namespace {

using namespace dhdsddp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kGapRelative = 1e-5;     // criterion 1
constexpr std::size_t kIterationCap = 300;  // criterion 1
constexpr double kRuntimeCapSeconds = 60.0;
constexpr double kCutTolerance = 1e-6;    // criterion 2
constexpr std::size_t kGridPoints = 100;  // criteria 1, 2
constexpr double kMonotoneSlack = 1e-9;   // criterion 3
constexpr double kMinorantSlack = 1e-6;   // criterion 4
constexpr double kHdTolerance = 1e-7;     // criterion 5
constexpr double kEnvelopeTolerance = 1e-5;  // criterion 6
constexpr double kFixtureTolerance = 1e-6;   // criterion 7
constexpr double kFixtureSeconds = 1.0;
constexpr double kLpTolerance = 1e-8;  // criterion 8

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::vector<double> csv_lower_bounds(const fs::path& file) {
  std::istringstream in(testing::read_text(file));
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    out.push_back(std::stod(line.substr(a + 1, b - a - 1)));
  }
  return out;
}

struct Instance {
  std::uint64_t seed;
  DhdProblem problem;
  fs::path dir;
};

const fs::path root = fs::temp_directory_path() / "dhdsddp_acceptance";
std::vector<std::vector<double>> all_bound_sequences;

std::vector<Instance> acceptance_instances() {
  std::vector<Instance> out;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Instance inst{seed, testing::random_instance(seed), root / ("instance_" + std::to_string(seed))};
    fs::create_directories(inst.dir);
    testing::write_text(inst.dir / "problem.json", serialize(inst.problem));
    out.push_back(std::move(inst));
  }
  return out;
}

CutStore stored_cuts(const Instance& inst) {
  CutStore s = CutStore::initialize(inst.problem);
  load_cuts_file(s, (inst.dir / "cuts.json").string());
  return s;
}

void criterion_1(const std::vector<Instance>& instances) {
  const auto start = Clock::now();
  std::size_t passed = 0;
  double worst_gap = 0.0;
  std::string failed;
  for (const auto& inst : instances) {
    cli::RunConfig cfg;
    cfg.command = "verify";
    cfg.problem = (inst.dir / "problem.json").string();
    cfg.out = inst.dir.string();
    cfg.max_iterations = kIterationCap;
    cfg.seed = inst.seed;
    cfg.grid_points = kGridPoints;
    std::ostringstream out, err;
    cli::VerifyTolerances tol;
    tol.gap_relative = kGapRelative;
    const int code = cli::cmd_verify(cfg, out, err, tol);
    const double opt = oracle_optimum(inst.problem);
    const auto bounds = csv_lower_bounds(inst.dir / "convergence.csv");
    all_bound_sequences.push_back(bounds);
    worst_gap = std::max(worst_gap, std::abs(bounds.back() - opt) / (1.0 + std::abs(opt)));
    if (code == cli::kOk && bounds.size() <= kIterationCap + 1)
      ++passed;
    else
      failed += " " + std::to_string(inst.seed);
  }
  const double elapsed = seconds_since(start);
  report(1, passed == instances.size() && elapsed < kRuntimeCapSeconds,
         "verify passes on 25 random instances within 300 iterations",
         std::to_string(passed) + "/25 pass, worst relative gap " + fmt(worst_gap) + ", " + fmt(elapsed) +
             " s total" + (failed.empty() ? "" : ", failed seeds:" + failed));
}

void criterion_2(const std::vector<Instance>& instances) {
  std::size_t violations = 0, points = 0, cuts = 0;
  double worst = 0.0;
  for (const auto& inst : instances) {
    const auto rep = check_cut_validity(inst.problem, stored_cuts(inst), kGridPoints, kCutTolerance);
    violations += rep.violations;
    points += rep.points_checked;
    cuts += rep.cuts_checked;
    worst = std::max(worst, rep.max_violation);
  }
  report(2, violations == 0 && points > 0, "every cut lies below the exact cost-to-go on the grid",
         std::to_string(cuts) + " cuts, " + std::to_string(points) + " grid points, " + std::to_string(violations) +
             " violations, max excess " + fmt(worst));
}

void criterion_3() {
  std::size_t sequences = 0, drops = 0;
  double worst = 0.0;
  for (const auto& seq : all_bound_sequences) {
    ++sequences;
    for (std::size_t k = 1; k < seq.size(); ++k) {
      worst = std::max(worst, seq[k - 1] - seq[k]);
      if (seq[k] < seq[k - 1] - kMonotoneSlack) ++drops;
    }
  }
  report(3, drops == 0 && sequences > 0, "lower-bound sequences are nondecreasing",
         std::to_string(sequences) + " runs, " + std::to_string(drops) + " decreases, largest drop " + fmt(worst));
}

void criterion_4(const std::vector<Instance>& instances) {
  std::mt19937_64 g(4);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t checks = 0, bad = 0;
  double worst = 0.0;
  std::vector<CutStore> stores;
  for (const auto& inst : instances) stores.push_back(stored_cuts(inst));
  for (int tuple = 0; tuple < 200; ++tuple) {
    const auto& inst = instances[static_cast<std::size_t>(tuple) % instances.size()];
    const auto& p = inst.problem;
    const auto& s = stores[static_cast<std::size_t>(tuple) % instances.size()];
    const std::size_t t = g() % p.dims.horizon;
    const std::size_t i = g() % p.num_markov_states(t);
    Vector x(p.dims.state_dim), d(p.dims.state_dim);
    double norm = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const auto& b = (*p.state_bounds)[k];
      x[k] = b.lower + 0.1 + (b.upper - b.lower - 0.2) * unit(g);
      d[k] = normal(g);
      norm += d[k] * d[k];
    }
    for (auto& v : d) v /= std::sqrt(norm);
    const auto base = solve_stage(p, s, t, i, x);
    for (double h : {1e-2, 1e-4}) {
      Vector y = x;
      for (std::size_t k = 0; k < y.size(); ++k) y[k] += h * d[k];
      const double excess = base.value + h * dot(base.subgradient, d) - solve_stage(p, s, t, i, y).value;
      worst = std::max(worst, excess);
      ++checks;
      if (excess > kMinorantSlack) ++bad;
    }
  }
  report(4, bad == 0 && checks == 400, "stage subgradients are convex minorants",
         "200 tuples x 2 steps, " + std::to_string(bad) + " violations, max excess " + fmt(worst));
}

void criterion_5() {
  std::size_t bad_value = 0, bad_dim = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1000; seed < 1020; ++seed) {
    testing::InstanceShape shape;
    shape.control_b_dim = 1 + seed % 2;
    const auto p = testing::random_instance(seed, shape);
    const auto hd = check_hd_reformulation(p);
    worst = std::max(worst, hd.difference);
    if (hd.difference > kHdTolerance) ++bad_value;
    SddpConfig c;
    c.max_iterations = 20;
    c.seed = seed;
    const auto run_report = run(p, c);
    all_bound_sequences.push_back({});
    for (const auto& r : run_report.history) all_bound_sequences.back().push_back(r.lower_bound);
    bool dims_ok = run_report.cuts.state_dim() == p.dims.state_dim && hd.hd_state_dim == p.dims.state_dim + shape.control_b_dim;
    for (std::size_t t = 0; t < p.dims.horizon; ++t)
      for (std::size_t i = 0; i < p.num_markov_states(t); ++i)
        for (const auto& cut : run_report.cuts.cuts(t, i)) dims_ok = dims_ok && cut.beta.size() == p.dims.state_dim;
    if (!dims_ok) ++bad_dim;
  }
  report(5, bad_value == 0 && bad_dim == 0, "hazard-decision and DHD extensive forms agree; cut slopes stay N-dimensional",
         "20 instances, max difference " + fmt(worst) + ", " + std::to_string(bad_dim) + " dimension mismatches");
}

void criterion_6() {
  std::size_t bad_lists = 0, sampled = 0, bad_points = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 600; seed < 605; ++seed) {
    testing::InstanceShape shape;
    shape.max_markov = 1;
    shape.max_noise = 3;
    const auto p = testing::random_instance(seed, shape);
    SddpConfig c;
    c.max_iterations = kIterationCap;
    c.seed = seed;
    const auto r = run(p, c);
    all_bound_sequences.push_back({});
    for (const auto& rec : r.history) all_bound_sequences.back().push_back(rec.lower_bound);
    for (std::size_t t = 0; t < p.dims.horizon; ++t)
      if (r.cuts.num_markov_states(t) != 1) ++bad_lists;
    // Ten states per instance, drawn from trajectories of the converged policy.
    Rng rng(seed + 1);
    std::mt19937_64 pick(seed);
    for (int k = 0; k < 10; ++k) {
      const auto traj = forward_pass(p, r.cuts, rng);
      const std::size_t t = pick() % p.dims.horizon;
      const double exact = exact_value(p, t, 0, traj.states[t]);
      const double envelope = r.cuts.evaluate(t, 0, traj.states[t]);
      const double err = std::abs(exact - envelope);
      worst = std::max(worst, err);
      ++sampled;
      if (err > kEnvelopeTolerance * (1.0 + std::abs(exact))) ++bad_points;
    }
  }
  report(6, bad_lists == 0 && bad_points == 0 && sampled == 50,
         "single-Markov-state runs keep one cut list per stage and match exact values",
         std::to_string(sampled) + " sampled states, " + std::to_string(bad_points) + " mismatches, max error " +
             fmt(worst) + ", " + std::to_string(bad_lists) + " stages with extra lists");
}

void criterion_7() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, expected] : {std::pair<const char*, double>{"det1", 3.0}, {"stoch2", 1.0}}) {
    const auto start = Clock::now();
    const auto p = testing::load_example(name);
    const double opt = oracle_optimum(p);
    SddpConfig c;
    c.max_iterations = kIterationCap;
    const auto r = run(p, c);
    const double elapsed = seconds_since(start);
    const double lb = r.final_lower_bound();
    all_bound_sequences.push_back({});
    for (const auto& rec : r.history) all_bound_sequences.back().push_back(rec.lower_bound);
    const bool pass = std::abs(opt - expected) <= kFixtureTolerance && std::abs(lb - opt) <= kFixtureTolerance &&
                      elapsed < kFixtureSeconds;
    ok = ok && pass;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": oracle " + fmt(opt) + ", sddp " + fmt(lb) + ", " +
              fmt(elapsed * 1000.0) + " ms";
  }
  report(7, ok, "det1 optimum 3 and stoch2 optimum 1 from oracle and SDDP", detail);
}

void criterion_8() {
  std::mt19937_64 g(8);
  std::size_t mismatches = 0, certificate_issues = 0, optimal = 0, infeasible = 0;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto lp = testing::random_bounded_lp(g, 8, 6);
    const auto brute = testing::enumerate_bases(lp);
    const auto sol = solve(lp);
    if (!brute.feasible) {
      ++infeasible;
      if (sol.status != LpStatus::Infeasible) ++mismatches;
      continue;
    }
    ++optimal;
    if (sol.status != LpStatus::Optimal) {
      ++mismatches;
      continue;
    }
    const double diff = std::abs(sol.objective - brute.objective);
    worst = std::max(worst, diff);
    if (diff > kLpTolerance) ++mismatches;
    if (!check_certificate(lp, sol).empty()) ++certificate_issues;
  }
  report(8, mismatches == 0 && certificate_issues == 0, "simplex matches basis enumeration on 1000 random LPs",
         std::to_string(optimal) + " optimal, " + std::to_string(infeasible) + " infeasible, " +
             std::to_string(mismatches) + " mismatches, max difference " + fmt(worst) + ", " +
             std::to_string(certificate_issues) + " certificate failures");
}

void criterion_9(const std::vector<Instance>& instances) {
  std::vector<std::string> problems = {testing::example_path("det1"), testing::example_path("stoch2"),
                                       testing::example_path("cascade3")};
  for (std::size_t k = 0; k < 3; ++k) problems.push_back((instances[k].dir / "problem.json").string());
  std::size_t identical = 0;
  for (std::size_t k = 0; k < problems.size(); ++k) {
    std::string logs[2];
    for (int rep = 0; rep < 2; ++rep) {
      cli::RunConfig cfg;
      cfg.command = "solve";
      cfg.problem = problems[k];
      cfg.out = (root / ("determinism_" + std::to_string(k) + "_" + std::to_string(rep))).string();
      cfg.seed = 1234;
      std::ostringstream out, err;
      cli::cmd_solve(cfg, out, err);
      logs[rep] = testing::read_text(fs::path(cfg.out) / "convergence.csv");
      if (rep == 0) all_bound_sequences.push_back(csv_lower_bounds(fs::path(cfg.out) / "convergence.csv"));
    }
    if (!logs[0].empty() && logs[0] == logs[1]) ++identical;
  }
  report(9, identical == problems.size(), "repeated solves write byte-identical convergence logs",
         std::to_string(identical) + "/" + std::to_string(problems.size()) + " problems identical");
}

}  // namespace

int main() {
  fs::remove_all(root);
  fs::create_directories(root);
  const auto instances = acceptance_instances();
  criterion_1(instances);
  criterion_2(instances);
  criterion_4(instances);
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9(instances);
  criterion_3();
  return failures == 0 ? 0 : 1;
}
