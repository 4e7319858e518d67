// Copyright 2026 The musclearm Authors.
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

// Command dispatch shared by the CLI and the tests.
//
// Artifacts land in <out>/<experiment.name>/: run_summary.json and
// config.ini at the top, plus one directory per condition holding its own
// config.ini and the trial logs iter_<k>.csv (or rep_<r>.csv for sweeps).

#ifndef MUSCLEARM_DISPATCH_H_
#define MUSCLEARM_DISPATCH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "musclearm/config.h"

namespace musclearm {

const std::vector<std::string>& command_names();

struct DispatchOptions {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> config_text;  // used when no path is given
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::string controller = "hold";  // simulate: hold | pid
  bool use_env = true;
  bool quiet = false;
};

// Resolves the effective config: file or text, then environment, then
// command-line flags.
ExperimentConfig resolve_config(const DispatchOptions& options);

struct DispatchOutcome {
  int exit_code = 0;
  std::filesystem::path output_dir;
  std::string message;  // one-line JSON status or error object
};

// Exit codes: 0 ok, 2 usage or config error, 3 model or domain error,
// 4 file IO error, 1 anything else. Progress goes to `log` unless quiet.
DispatchOutcome dispatch(const DispatchOptions& options, std::ostream& log);

}  // namespace musclearm

#endif  // MUSCLEARM_DISPATCH_H_
