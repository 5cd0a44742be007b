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

#include <CLI11.hpp>

#include "dhdsddp/cli.hpp"

int main(int argc, char** argv) {
  using dhdsddp::cli::RunConfig;
  CLI::App app{"SDDP solver for decision-hazard-decision multistage stochastic control problems"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem, "Problem JSON file")->required();
    sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
    sub->add_option("--iters", cfg.max_iterations, "Maximum SDDP iterations")->capture_default_str();
    sub->add_option("--tol", cfg.tolerance, "Lower-bound stall tolerance")->capture_default_str();
    sub->add_option("--patience", cfg.patience, "Stalled iterations before stopping")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--paths", cfg.n_paths, "Simulation paths")->capture_default_str();
    sub->add_flag("--share-cuts", cfg.share_cuts, "Add every cut to all Markov states of its stage");
    sub->add_option("--warm-start", cfg.warm_start, "Cut file to start from");
    sub->add_flag("--timing", cfg.timing, "Record wall-clock time in the convergence log");
    sub->add_flag("--dump-lp", cfg.dump_lp, "Write the root stage LP as stage0.mps");
    sub->add_option("--max-nonzeros", cfg.max_nonzeros, "Extensive-form size cap")->capture_default_str();
  };
  for (const char* name : {"solve", "verify", "simulate", "export-cuts"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dhdsddp::cli::kInputError;
  }
  return dhdsddp::cli::dispatch(cfg);
}
