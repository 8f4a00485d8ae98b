#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mtr/objective.hpp"
#include "mtr/rng.hpp"

using namespace mtr;

namespace {

const XsLibrary& lib() {
  static const XsLibrary l =
      load_library_file(std::filesystem::path(MTRBENCH_DATA_DIR) / "default.xs.json");
  return l;
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("fitness matches the published optima fed through the formula") {
  const ObjectiveConfig cfg;
  // (|1.000021 - 1| + 1) / (0.00141 + 1) and (|0.990 - 1| + 1) / (0.4966 + 1)
  CHECK(fitness(1.000021, 0.00141, cfg) == doctest::Approx(0.998613).epsilon(1e-6));
  CHECK(fitness(0.990, 0.4966, cfg) == doctest::Approx(0.674863).epsilon(1e-6));
}

TEST_CASE("exact criticality with zero flux scores 1") {
  CHECK(fitness(1.0, 0.0, ObjectiveConfig{}) == 1.0);
}

TEST_CASE("fitness is monotone: down in flux, up in |k-1|") {
  const ObjectiveConfig cfg;
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double k = rng.uniform(0.0, 2.0);
    const double phi = rng.uniform(0.0, 3.0);
    CHECK(fitness(k, phi + 0.1, cfg) < fitness(k, phi, cfg));
    const double away = (k >= 1.0 ? k + 0.1 : k - 0.1);
    CHECK(fitness(away, phi, cfg) > fitness(k, phi, cfg));
  }
}

TEST_CASE("numerator depends only on |k-1|") {
  const ObjectiveConfig cfg;
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double k = rng.uniform(0.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0);
    CHECK(fitness(k, phi, cfg) == fitness(2.0 - k, phi, cfg));
  }
}

TEST_CASE("objective constants are configurable and validated") {
  ObjectiveConfig cfg;
  cfg.criticality_constant = 0.5;
  cfg.flux_constant = 2.0;
  CHECK(fitness(1.0, 0.0, cfg) == doctest::Approx(0.25));
  cfg.flux_constant = 0.0;
  CHECK_THROWS(validate_objective(cfg));
}

TEST_CASE("evaluate is a pure function of params and eval_index") {
  McConfig mc{400, 12, 3, 9};
  Evaluator eval_a(GeometryConfig{}, Bounds{}, lib(), mc, ObjectiveConfig{});
  Evaluator eval_b(GeometryConfig{}, Bounds{}, lib(), mc, ObjectiveConfig{});

  const ParamPoint p{11.0, 0.4};
  const Evaluation a1 = eval_a(p, 17);
  // interleave another evaluation: model state must not leak across calls
  (void)eval_a({2.0, 20.0}, 18);
  const Evaluation a2 = eval_a(p, 17);
  const Evaluation b1 = eval_b(p, 17);
  CHECK(a1.physics_equal(a2));
  CHECK(a1.physics_equal(b1));
  CHECK(a1.fitness == fitness(a1.k, a1.fast_flux, ObjectiveConfig{}));
}

TEST_CASE("different eval indices decorrelate the MC seed") {
  McConfig mc{400, 12, 3, 9};
  Evaluator eval(GeometryConfig{}, Bounds{}, lib(), mc, ObjectiveConfig{});
  const ParamPoint p{11.0, 0.4};
  const Evaluation a = eval(p, 1);
  const Evaluation b = eval(p, 2);
  CHECK(a.k != b.k);
}

TEST_CASE("out-of-bounds params propagate as errors") {
  Evaluator eval(GeometryConfig{}, Bounds{}, lib(), McConfig{400, 12, 3, 9},
                 ObjectiveConfig{});
  CHECK_THROWS_AS((void)eval({0.0, 1.0}, 0), ModelError);
}

TEST_CASE("heavily moderated fuel-starved corner loses to the thermal optimum") {
  // (U=0.1, W=25): k far below 1, so it must score worse than a point in
  // the thermal critical band
  McConfig mc{1000, 25, 5, 13};
  Evaluator eval(GeometryConfig{}, Bounds{}, lib(), mc, ObjectiveConfig{});
  const Evaluation corner = eval({0.1, 25.0}, 0);
  const Evaluation thermal = eval({3.0, 10.0}, 1);
  CHECK(corner.k < 0.5);
  CHECK(thermal.k > 0.9);
  CHECK(corner.fitness > thermal.fitness);
}

TEST_CASE("the batch sink receives one diagnostic per batch") {
  McConfig mc{400, 12, 3, 9};
  Evaluator eval(GeometryConfig{}, Bounds{}, lib(), mc, ObjectiveConfig{});
  std::size_t batches = 0;
  std::uint64_t seen_index = 0;
  eval.set_batch_sink([&](std::uint64_t index, const std::vector<BatchDiag>& d) {
    seen_index = index;
    batches = d.size();
  });
  (void)eval({11.0, 0.4}, 42);
  CHECK(seen_index == 42);
  CHECK(batches == 12);
}

TEST_CASE("the sink sees every evaluation") {
  McConfig mc{400, 12, 3, 9};
  Evaluator eval(GeometryConfig{}, Bounds{}, lib(), mc, ObjectiveConfig{});
  int calls = 0;
  eval.set_sink([&](const Evaluation& ev) {
    ++calls;
    CHECK(ev.fitness > 0.0);
  });
  (void)eval({5.0, 5.0}, 0);
  (void)eval({6.0, 6.0}, 1);
  CHECK(calls == 2);
}

}  // TEST_SUITE
