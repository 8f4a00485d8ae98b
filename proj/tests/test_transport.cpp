#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mtr/transport.hpp"

using namespace mtr;

namespace {

const XsLibrary& lib() {
  static const XsLibrary l =
      load_library_file(std::filesystem::path(MTRBENCH_DATA_DIR) / "default.xs.json");
  return l;
}

SlabModel homogeneous(const MaterialXs& mat, double thickness = 3.0) {
  SlabModel m;
  m.layers.push_back(Layer{Region::FuelMeat, mat.name, thickness, mat});
  m.tally_layer = 0;
  finalize_model(m);
  return m;
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("kinf_analytic: no production gives zero") {
  MaterialXs m;
  m.name = "inert";
  m.ref_density = 1.0;
  m.sigma_a = {0.1, 0.2};
  m.sigma_s = {{{0.2, 0.1}, {0.0, 0.3}}};
  m.sigma_t = {0.4, 0.5};
  CHECK(kinf_analytic(m) == 0.0);
}

TEST_CASE("kinf_analytic: one-group reduction arithmetic") {
  MaterialXs m;
  m.name = "onegroup";
  m.ref_density = 1.0;
  m.sigma_a = {0.02, 0.1};
  m.sigma_s = {{{0.1, 0.0}, {0.0, 0.1}}};
  m.sigma_t = {0.12, 0.2};
  m.nu_sigma_f = {0.03, 0.0};
  m.chi = {1.0, 0.0};
  CHECK(kinf_analytic(m) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("kinf_analytic: degenerate thermal medium is an error") {
  MaterialXs m;
  m.name = "degenerate";
  m.ref_density = 1.0;
  m.sigma_a = {0.02, 0.0};
  m.sigma_s = {{{0.0, 0.05}, {0.0, 0.0}}};
  m.sigma_t = {0.07, 0.0};
  m.nu_sigma_f = {0.03, 0.1};
  m.chi = {1.0, 0.0};
  CHECK_THROWS_AS((void)kinf_analytic(m), TransportError);
}

TEST_CASE("homogeneous fuel matches the analytic oracle within 3 sigma") {
  const MaterialXs& fuel = lib().at("fuel");
  const double k_ref = kinf_analytic(fuel);
  McConfig cfg;
  cfg.particles_per_batch = 1000;
  cfg.n_batches = 30;
  cfg.n_inactive = 5;
  cfg.seed = 99;
  const RunResult rr = run_keig(homogeneous(fuel), cfg);
  CHECK(rr.batches_used == 25);
  CHECK(std::abs(rr.k_mean - k_ref) <= 3.0 * rr.k_std);
}

TEST_CASE("no fissile material: k == 0 after source extinction") {
  const RunResult rr = run_keig(homogeneous(lib().at("aluminum")), McConfig{});
  CHECK(rr.k_mean == 0.0);
  CHECK(rr.k_std == 0.0);
  CHECK(rr.batches_used == 0);
}

TEST_CASE("identical model and config give bit-identical results") {
  McConfig cfg;
  cfg.particles_per_batch = 400;
  cfg.n_batches = 12;
  cfg.n_inactive = 3;
  cfg.seed = 12345;
  const SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 0.001}, lib());
  const RunResult a = run_keig(m, cfg);
  const RunResult b = run_keig(m, cfg);
  CHECK(a == b);
}

TEST_CASE("different seeds decorrelate") {
  McConfig a{400, 12, 3, 1};
  McConfig b{400, 12, 3, 2};
  const SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 0.001}, lib());
  CHECK(run_keig(m, a) != run_keig(m, b));
}

TEST_CASE("void layers stream ballistically") {
  // water at exactly zero density: sigma_t == 0 in the gap and channels
  XsLibrary l = lib();
  SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 0.001}, l);
  const MaterialXs vacuum = scale_to_density(l.at("water"), 0.0);
  for (Layer& layer : m.layers)
    if (layer.material == "water") layer.xs = vacuum;
  finalize_model(m);
  McConfig cfg{300, 10, 2, 3};
  const RunResult rr = run_keig(m, cfg);
  CHECK(rr.k_mean > 0.0);
  CHECK(rr.fast_flux > 0.0);
}

TEST_CASE("fully void model is a degenerate-medium error") {
  const MaterialXs vacuum = scale_to_density(lib().at("water"), 0.0);
  CHECK_THROWS_AS((void)run_keig(homogeneous(vacuum), McConfig{}), TransportError);
}

TEST_CASE("raising nu_sigma_f never lowers k beyond noise") {
  McConfig cfg{800, 24, 4, 31};
  std::vector<double> k, kerr;
  for (double scale : {0.8, 1.0, 1.2}) {
    MaterialXs fuel = lib().at("fuel");
    fuel.nu_sigma_f[kFast] *= scale;
    fuel.nu_sigma_f[kThermal] *= scale;
    const RunResult rr = run_keig(homogeneous(fuel), cfg);
    k.push_back(rr.k_mean);
    kerr.push_back(rr.k_std);
  }
  CHECK(k[1] >= k[0] - 3.0 * (kerr[0] + kerr[1]));
  CHECK(k[2] >= k[1] - 3.0 * (kerr[1] + kerr[2]));
}

TEST_CASE("fast flux is per source neutron: invariant under batch size") {
  const SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 0.001}, lib());
  McConfig small{600, 30, 5, 77};
  McConfig big{2400, 30, 5, 77};
  const RunResult a = run_keig(m, small);
  const RunResult b = run_keig(m, big);
  const double err = 3.0 * (a.fast_flux_std + b.fast_flux_std);
  CHECK(std::abs(a.fast_flux - b.fast_flux) <= err);
}

TEST_CASE("quadrupling the batch size shrinks k_std roughly twofold") {
  const SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 0.001}, lib());
  McConfig base{500, 40, 8, 5};
  McConfig quad{2000, 40, 8, 5};
  const double r = run_keig(m, base).k_std / run_keig(m, quad).k_std;
  CHECK(r >= 1.3);
  CHECK(r <= 3.0);
}

TEST_CASE("per-batch diagnostics cover every batch") {
  McConfig cfg{300, 8, 2, 11};
  std::vector<BatchDiag> diag;
  const SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 0.001}, lib());
  (void)run_keig(m, cfg, &diag);
  REQUIRE(diag.size() == 8);
  for (int b = 0; b < 8; ++b) {
    CHECK(diag[static_cast<std::size_t>(b)].batch == b);
    CHECK(diag[static_cast<std::size_t>(b)].k > 0.0);
    CHECK(diag[static_cast<std::size_t>(b)].entropy >= 0.0);
  }
}

TEST_CASE("shannon entropy: point source and uniform source") {
  std::vector<double> one_bin(100, 0.4);
  CHECK(shannon_entropy(one_bin, 8, 0.0, 1.0) == 0.0);

  // sites exactly uniform over 2^m bins -> m bits
  std::vector<double> uniform;
  const int bins = 16;
  for (int b = 0; b < bins; ++b)
    for (int i = 0; i < 10; ++i) uniform.push_back((b + 0.5) / bins);
  CHECK(shannon_entropy(uniform, bins, 0.0, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("source entropy plateaus before the inactive window ends (fast regime)") {
  const SlabModel m = build_unit_cell(GeometryConfig{}, {11.7, 0.001}, lib());
  std::vector<BatchDiag> diag;
  (void)run_keig(m, McConfig{2000, 60, 10, 21}, &diag);
  auto window_mean = [&](int a, int b) {
    double s = 0.0;
    for (int i = a; i < b; ++i) s += diag[static_cast<std::size_t>(i)].entropy;
    return s / (b - a);
  };
  CHECK(std::abs(window_mean(2, 10) - window_mean(40, 60)) < 0.25);
}

TEST_CASE("k is converged by the end of the inactive window (thermal corner)") {
  const SlabModel m = build_unit_cell(GeometryConfig{}, {3.0, 24.0}, lib());
  double early = 0.0, late = 0.0;
  const int seeds = 8;
  for (int s = 0; s < seeds; ++s) {
    std::vector<BatchDiag> diag;
    (void)run_keig(m, McConfig{2000, 60, 10, 300 + static_cast<std::uint64_t>(s)}, &diag);
    for (int b = 10; b < 20; ++b) early += diag[static_cast<std::size_t>(b)].k;
    for (int b = 40; b < 60; ++b) late += diag[static_cast<std::size_t>(b)].k;
  }
  early /= 10.0 * seeds;
  late /= 20.0 * seeds;
  CHECK(std::abs(early - late) < 0.015);
}

TEST_CASE("invalid mc config is rejected") {
  McConfig bad;
  bad.particles_per_batch = 50;
  const SlabModel m = homogeneous(lib().at("fuel"));
  CHECK_THROWS_AS((void)run_keig(m, bad), TransportError);
  McConfig bad2;
  bad2.n_batches = 5;
  bad2.n_inactive = 5;
  CHECK_THROWS_AS((void)run_keig(m, bad2), TransportError);
}

}  // TEST_SUITE
