#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mtr/objective.hpp"
#include "mtr/policy.hpp"

namespace mtr {

// Evaluation callback used by both optimizers. Must be safe to call
// concurrently for distinct worker ids; the result may only depend on
// (params, eval_index), never on the worker id or scheduling.
using WorkerEval =
    std::function<Evaluation(const ParamPoint& params, std::uint64_t eval_index, int worker)>;

struct Individual {
  ParamPoint params;
  double fitness = 0.0;
  bool evaluated = false;
};

struct JayaConfig {
  int pop_size = 10;
  int max_evals = 400;
  std::uint64_t seed = 1;
};

void validate_jaya(const JayaConfig& cfg);

struct PpoEsConfig {
  int es_pop = 8;
  double es_sigma = 0.05;
  double es_elite_frac = 0.5;
  int ppo_inner_iters = 4;
  double ppo_clip_eps = 0.2;
  double ppo_lr = 3e-3;
  int steps_per_update = 16;
  int generations = 1;
  std::uint64_t seed = 1;
  std::vector<int> layer_sizes{2, 32, 32, 2};
};

void validate_ppo_es(const PpoEsConfig& cfg);

struct OptRunEntry {
  Evaluation ev;
  int gen = 0;
};

struct OptRun {
  std::string algorithm;  // "jaya" or "ppo-es"
  std::vector<OptRunEntry> history;
  Evaluation best;
  std::string error;  // non-empty if the run aborted; history holds the part done
};

// One JAYA generation: every individual moves toward the best and away from
// the worst (candidate x'_j = x_j + r1*(best_j - |x_j|) - r2*(worst_j - |x_j|),
// clipped to bounds), then greedy selection keeps the better of candidate
// and incumbent. Candidate evaluations take indices base_index + i.
std::vector<Individual> jaya_step(const std::vector<Individual>& pop,
                                  const Individual& best, const Individual& worst,
                                  const Bounds& bounds, std::uint64_t step_seed,
                                  const WorkerEval& eval, std::uint64_t base_index,
                                  int budget, int threads,
                                  std::vector<OptRunEntry>* history, int gen);

OptRun jaya_run(const JayaConfig& cfg, const WorkerEval& eval, const Bounds& bounds,
                std::optional<Bounds> init_bounds = std::nullopt, int threads = 1);

OptRun ppo_es_run(const PpoEsConfig& cfg, const WorkerEval& eval, const Bounds& bounds,
                  int threads = 1);

// tanh-squash bijection between raw action space and the open parameter box
ParamPoint squash_action(const std::vector<double>& action, const Bounds& bounds);
std::vector<double> normalize_params(const ParamPoint& p, const Bounds& bounds);

}  // namespace mtr
