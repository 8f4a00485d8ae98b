#pragma once

#include "mtr/config.hpp"

namespace mtr {

// Per-evaluation median wall times for the three model-handling pipelines:
//   baseline     - fresh file parse + fresh model build every evaluation
//   update       - in-place density update, still a fresh parse
//   update_cache - in-place update plus the in-memory XS cache
// Physics outputs are bit-identical across the pipelines; only the
// model-handling overhead differs.
struct SpeedupReport {
  int evals = 0;
  double baseline_ms = 0.0;
  double update_ms = 0.0;
  double update_cache_ms = 0.0;
  double relative_update = 0.0;
  double relative_update_cache = 0.0;
  bool physics_identical = false;

  nlohmann::ordered_json to_json() const;
};

SpeedupReport bench_speedup(const RunConfig& cfg, int n_evals);

}  // namespace mtr
