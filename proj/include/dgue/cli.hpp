#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace dgue {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitIllConditioned = 3,
  kExitThreshold = 4,
};

struct RunConfig {
  std::string command;
  std::string model;
  std::string spikes;  // CSV sidecar for CSV models
  std::string out = ".";
  std::uint64_t seed = 7;
  std::size_t trials = 2000;
  std::optional<int> n;
  std::string kind = "edge";
  std::string id = "tw";
  int k = 1;
  std::string grid;
  double window = 2.0;
  std::optional<double> threshold;
  double epsilon = 0.2;
  std::optional<double> quartic;
  std::optional<int> select;
  std::size_t m = 60;

  /// Range checks on overrides; throws ValidationError.
  void validate() const;
  nlohmann::json to_json() const;
};

int cmd_analyze(const RunConfig& config);
int cmd_verify(const RunConfig& config);
int cmd_kernel(const RunConfig& config);

/// Parses argv, dispatches, and maps exceptions to exit codes.
int run_cli(int argc, char** argv);

}  // namespace dgue
