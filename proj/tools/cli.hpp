/* Copyright 2026 The unetpipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef UNETPIPE_TOOLS_CLI_HPP
#define UNETPIPE_TOOLS_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "unetpipe/pipeline_sim.hpp"

namespace unetpipe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Runs one command line (without the program name). Primary output goes to
/// `--out` or `out`; diagnostics and, without `--out`, the run manifest go to
/// `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

struct Scenario {
  ScheduleConfig config;
  std::filesystem::path model;
  /// "balanced" or "fixed" place the sequentialized model on a chain of
  /// stages; "layers" places every raw-graph layer explicitly.
  std::string placement_kind;
  std::string granularity = "block";
  std::string objective = "compute";
  std::vector<int> boundaries;
  std::vector<int> layers;
};

/// Reads a scenario document; model_ref resolves relative to the file.
/// Throws ValidationError naming unknown or ill-typed keys.
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioOutcome {
  SimulationResult result;
  std::string schedule;  ///< "gpipe" or "dependency"
};

ScenarioOutcome simulate_scenario(const Scenario& scenario);

}  // namespace unetpipe::cli

#endif  // UNETPIPE_TOOLS_CLI_HPP
