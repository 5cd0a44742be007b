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

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dhdsddp/model.hpp"
#include "dhdsddp/model_io.hpp"

namespace dhdsddp::testing {

inline std::string example_path(const std::string& name) {
  return std::string(DHDSDDP_SOURCE_DIR) + "/docs/examples/" + name + ".json";
}

inline DhdProblem load_example(const std::string& name) { return load_problem_file(example_path(name)); }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Smallest legal instance: T = N = Mb = Ma = 1, one Markov state, one noise.
inline const char* minimal_problem_json() {
  return R"({
  "dims": {"T": 1, "N": 1, "Mb": 1, "Ma": 1},
  "markov": {"states_per_stage": [1, 1], "transitions": [[[1.0]]]},
  "noise": {"support_sizes": [1], "probabilities": [[1.0]]},
  "realizations": [{"t": 0, "i": 0, "j": 0, "e": 0, "A": [[1.0]]}],
  "terminal": {"cuts": [{"alpha": 0.0, "beta": [0.0]}]},
  "initial_state": [0.0],
  "stage_lower_bounds": [0.0, 0.0]
})";
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dhdsddp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace dhdsddp::testing
