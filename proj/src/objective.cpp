#include "mtr/objective.hpp"

#include <chrono>
#include <cmath>

#include "mtr/rng.hpp"

namespace mtr {

void validate_objective(const ObjectiveConfig& cfg) {
  if (!(cfg.criticality_constant > 0.0))
    throw std::runtime_error("objective: criticality_constant must be > 0");
  if (!(cfg.flux_constant > 0.0))
    throw std::runtime_error("objective: flux_constant must be > 0");
}

double fitness(double k, double phi, const ObjectiveConfig& cfg) {
  return (std::abs(k - 1.0) + cfg.criticality_constant) / (phi + cfg.flux_constant);
}

std::uint64_t evaluation_seed(std::uint64_t mc_seed, std::uint64_t eval_index) {
  return stream_seed(mc_seed, eval_index, 0xe7a1u);
}

Evaluator::Evaluator(const GeometryConfig& geom, const Bounds& bounds,
                     const XsLibrary& lib, const McConfig& mc, const ObjectiveConfig& obj)
    : bounds_(bounds), lib_(&lib), mc_(mc), obj_(obj) {
  validate_mc(mc);
  validate_objective(obj);
  model_ = build_unit_cell(geom, bounds.center(), lib, bounds);
}

Evaluation Evaluator::operator()(const ParamPoint& params, std::uint64_t eval_index) {
  const auto t0 = std::chrono::steady_clock::now();
  update_densities(model_, params, *lib_, bounds_);
  McConfig mc = mc_;
  mc.seed = evaluation_seed(mc_.seed, eval_index);
  std::vector<BatchDiag> diag;
  const RunResult rr = run_keig(model_, mc, batch_sink_ ? &diag : nullptr);
  if (batch_sink_) batch_sink_(eval_index, diag);

  Evaluation ev;
  ev.params = params;
  ev.k = rr.k_mean;
  ev.k_std = rr.k_std;
  ev.fast_flux = rr.fast_flux;
  ev.fitness = fitness(rr.k_mean, rr.fast_flux, obj_);
  ev.eval_index = eval_index;
  ev.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  if (sink_) sink_(ev);
  return ev;
}

}  // namespace mtr
