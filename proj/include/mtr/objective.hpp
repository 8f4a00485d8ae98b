#pragma once

#include <cstdint>
#include <functional>

#include "mtr/transport.hpp"

namespace mtr {

struct ObjectiveConfig {
  double criticality_constant = 1.0;  // a, added to |k - 1|
  double flux_constant = 1.0;         // b, added to the flux (avoids singularities)

  bool operator==(const ObjectiveConfig&) const = default;
};

void validate_objective(const ObjectiveConfig& cfg);

// (|k - 1| + a) / (phi + b); smaller is better.
double fitness(double k, double phi, const ObjectiveConfig& cfg);

struct Evaluation {
  ParamPoint params;
  double k = 0.0;
  double k_std = 0.0;
  double fast_flux = 0.0;
  double fitness = 0.0;
  std::uint64_t eval_index = 0;
  double wall_time_ms = 0.0;

  bool physics_equal(const Evaluation& o) const {
    return params == o.params && k == o.k && k_std == o.k_std &&
           fast_flux == o.fast_flux && fitness == o.fitness &&
           eval_index == o.eval_index;
  }
};

using EvalSink = std::function<void(const Evaluation&)>;
using BatchDiagSink =
    std::function<void(std::uint64_t eval_index, const std::vector<BatchDiag>&)>;

// One full evaluation pipeline: params -> in-place model update -> MC run ->
// fitness. Each Evaluator owns its SlabModel, so distinct instances are safe
// to drive concurrently. The per-evaluation MC seed derives deterministically
// from (mc.seed, eval_index), which makes the whole pipeline a pure function
// of (params, eval_index).
class Evaluator {
 public:
  Evaluator(const GeometryConfig& geom, const Bounds& bounds, const XsLibrary& lib,
            const McConfig& mc, const ObjectiveConfig& obj);

  Evaluation operator()(const ParamPoint& params, std::uint64_t eval_index);

  const Bounds& bounds() const { return bounds_; }
  const McConfig& mc() const { return mc_; }
  const ObjectiveConfig& objective() const { return obj_; }

  void set_sink(EvalSink sink) { sink_ = std::move(sink); }

  // Receives the per-batch k/entropy diagnostics of every run.
  void set_batch_sink(BatchDiagSink sink) { batch_sink_ = std::move(sink); }

 private:
  Bounds bounds_;
  const XsLibrary* lib_;
  McConfig mc_;
  ObjectiveConfig obj_;
  SlabModel model_;
  EvalSink sink_;
  BatchDiagSink batch_sink_;
};

std::uint64_t evaluation_seed(std::uint64_t mc_seed, std::uint64_t eval_index);

}  // namespace mtr
