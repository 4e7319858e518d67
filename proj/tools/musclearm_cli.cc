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

// musclearm command-line front end.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "musclearm/dispatch.h"

int main(int argc, char** argv) {
  CLI::App app{"Muscle-driven arm simulator and data-driven ILC experiments"};
  app.require_subcommand(1);

  musclearm::DispatchOptions opts;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string preset;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "INI experiment config");
    sub->add_option("--seed", seed, "Override experiment.seed");
    sub->add_option("--out", out, "Override experiment.output directory");
    sub->add_option("--preset", preset, "Override arm.preset");
    sub->add_flag("-q,--quiet", opts.quiet, "No progress lines");
    sub->add_flag("--no-env", "Ignore MUSCLEARM_<SECTION>_<KEY> overrides");
  };

  CLI::App* sub = nullptr;
  add_common(app.add_subcommand("curves", "Dump fl, fpe, fv and ft curves"));
  sub = app.add_subcommand("simulate", "Run one trial");
  add_common(sub);
  sub->add_option("--controller", opts.controller, "hold or pid")
      ->check(CLI::IsMember({"hold", "pid"}));
  add_common(app.add_subcommand("ilc", "Learn the benchmark trajectory"));
  add_common(app.add_subcommand("sweep", "Learn, then replay under tip loads"));
  add_common(app.add_subcommand("compare", "Learned controller vs PID stand-in"));
  add_common(app.add_subcommand("lowpass", "Activation-noise attenuation test"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* chosen = app.get_subcommands().front();
  opts.command = chosen->get_name();
  if (chosen->count("--config")) opts.config_path = config;
  if (chosen->count("--seed")) opts.seed = seed;
  if (chosen->count("--out")) opts.out = out;
  if (chosen->count("--preset")) opts.preset = preset;
  opts.use_env = chosen->count("--no-env") == 0;

  const musclearm::DispatchOutcome r = musclearm::dispatch(opts, std::cerr);
  (r.exit_code == 0 ? std::cout : std::cerr) << r.message << '\n';
  return r.exit_code;
}
