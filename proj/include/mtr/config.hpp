#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mtr/landscape.hpp"
#include "mtr/optimizers.hpp"

namespace mtr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LandscapeConfig {
  int n_u = 40;
  int n_w = 40;
  double tolerance = 0.05;
};

// One file, one reproducibility unit: everything a run needs.
struct RunConfig {
  std::filesystem::path xs_library;
  std::filesystem::path output_dir = "runs";
  GeometryConfig geometry;
  Bounds bounds;
  McConfig mc;
  ObjectiveConfig objective;
  JayaConfig jaya;
  PpoEsConfig ppo_es;
  LandscapeConfig landscape;
  McConfig speedup_mc{300, 6, 1, 1};  // reduced workload for the speed-up harness

  nlohmann::ordered_json to_json() const;
};

// Parses the run config; relative paths resolve against the config file's
// directory. MTRBENCH_XS_PATH overrides xs_library when set.
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::ordered_json evaluation_to_json(const Evaluation& ev);

// JSONL record for the optimizer history: evaluation fields plus algo/gen.
std::string history_line(const Evaluation& ev, const std::string& algo, int gen);

}  // namespace mtr
