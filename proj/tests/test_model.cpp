#include <doctest.h>

#include <chrono>
#include <filesystem>

#include "mtr/model.hpp"
#include "mtr/rng.hpp"
#include "mtr/xs.hpp"

using namespace mtr;

namespace {

const XsLibrary& lib() {
  static const XsLibrary l =
      load_library_file(std::filesystem::path(MTRBENCH_DATA_DIR) / "default.xs.json");
  return l;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("default geometry with 3 plates has 15 layers in spec order") {
  const SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 1.0}, lib());
  REQUIRE(m.layers.size() == 15);
  const Region expected[15] = {
      Region::WaterGap,  Region::SidePlate, Region::Clad, Region::FuelMeat,
      Region::Clad,      Region::WaterChannel, Region::Clad, Region::FuelMeat,
      Region::Clad,      Region::WaterChannel, Region::Clad, Region::FuelMeat,
      Region::Clad,      Region::SidePlate, Region::Cadmium};
  for (int i = 0; i < 15; ++i) CHECK(m.layers[static_cast<std::size_t>(i)].region == expected[i]);
  CHECK(m.tally_layer == 0);
  CHECK(m.layers[m.tally_layer].material == "water");
  CHECK(m.layers.back().material == "cadmium");
}

TEST_CASE("total thickness equals the sum of geometry contributions") {
  GeometryConfig g;
  const SlabModel m = build_unit_cell(g, {5.0, 5.0}, lib());
  const double expected = g.water_gap_cm + 2 * g.side_plate_cm + g.cadmium_cm +
                          g.n_fuel_plates * (g.fuel_meat_cm + 2 * g.clad_cm) +
                          (g.n_fuel_plates - 1) * g.water_channel_cm;
  CHECK(m.total_thickness_cm == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("water layers scale with the w parameter") {
  const SlabModel m = build_unit_cell(GeometryConfig{}, {19.0, 0.001}, lib());
  const MaterialXs& ref = lib().at("water");
  for (const Layer& l : m.layers) {
    if (l.region != Region::WaterGap && l.region != Region::WaterChannel) continue;
    for (int g = 0; g < kGroups; ++g)
      CHECK(l.xs.sigma_t[g] <= 0.001 / ref.ref_density * ref.sigma_t[g] * (1 + 1e-12));
  }
}

TEST_CASE("rebuild equivalence: update_densities matches a fresh build exactly") {
  Rng rng(7);
  const Bounds b;
  SlabModel updated = build_unit_cell(GeometryConfig{}, b.center(), lib());
  for (int trial = 0; trial < 25; ++trial) {
    const ParamPoint p{rng.uniform(b.u_min, b.u_max), rng.uniform(b.w_min, b.w_max)};
    update_densities(updated, p, lib());
    const SlabModel fresh = build_unit_cell(GeometryConfig{}, p, lib());
    CHECK(updated == fresh);
  }
}

TEST_CASE("updating to the model's current params changes nothing") {
  const ParamPoint p{8.0, 3.0};
  SlabModel m = build_unit_cell(GeometryConfig{}, p, lib());
  const SlabModel before = m;
  update_densities(m, p, lib());
  CHECK(m == before);
}

TEST_CASE("aluminum and cadmium layers are never modified") {
  SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 1.0}, lib());
  std::vector<MaterialXs> structural;
  for (const Layer& l : m.layers)
    if (l.material == "aluminum" || l.material == "cadmium") structural.push_back(l.xs);
  update_densities(m, {0.5, 24.0}, lib());
  std::size_t at = 0;
  for (const Layer& l : m.layers)
    if (l.material == "aluminum" || l.material == "cadmium") CHECK(l.xs == structural[at++]);
}

TEST_CASE("out-of-bounds params are rejected") {
  CHECK_THROWS_AS((void)build_unit_cell(GeometryConfig{}, {0.0, 1.0}, lib()), ModelError);
  CHECK_THROWS_AS((void)build_unit_cell(GeometryConfig{}, {5.0, 26.0}, lib()), ModelError);
  SlabModel m = build_unit_cell(GeometryConfig{}, {5.0, 1.0}, lib());
  CHECK_THROWS_AS(update_densities(m, {25.0, 1.0}, lib()), ModelError);
}

TEST_CASE("missing material is reported") {
  XsLibrary partial = lib();
  partial.materials.erase("cadmium");
  CHECK_THROWS_AS((void)build_unit_cell(GeometryConfig{}, {5.0, 1.0}, partial), XsError);
}

TEST_CASE("invalid geometry is rejected") {
  GeometryConfig g;
  g.n_fuel_plates = 0;
  CHECK_THROWS_AS((void)build_unit_cell(g, {5.0, 1.0}, lib()), ModelError);
  GeometryConfig g2;
  g2.clad_cm = 0.0;
  CHECK_THROWS_AS((void)build_unit_cell(g2, {5.0, 1.0}, lib()), ModelError);
}

TEST_CASE("exactly one tally layer, opposite the cadmium") {
  GeometryConfig g;
  g.n_fuel_plates = 5;
  const SlabModel m = build_unit_cell(g, {5.0, 1.0}, lib());
  CHECK(m.tally_layer == 0);
  CHECK(m.layers[0].region == Region::WaterGap);
  int gaps = 0;
  for (const Layer& l : m.layers)
    if (l.region == Region::WaterGap) ++gaps;
  CHECK(gaps == 1);
}

TEST_CASE("derived kernels track the layers") {
  const SlabModel m = build_unit_cell(GeometryConfig{}, {12.0, 1.0}, lib());
  REQUIRE(m.kernels.size() == m.layers.size());
  CHECK(m.kernels.front().x_left == 0.0);
  CHECK(m.kernels.back().x_right == doctest::Approx(m.total_thickness_cm));
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    CHECK(m.kernels[i].sigma_t[kFast] == m.layers[i].xs.sigma_t[kFast]);
    CHECK(m.kernels[i].x_right - m.kernels[i].x_left ==
          doctest::Approx(m.layers[i].thickness_cm));
  }
  // source table spans exactly the fuel layers
  CHECK(m.source_cdf.size() > 2);
  const double lo = m.source_cdf.front(), hi = m.source_cdf.back();
  bool lo_in_fuel = false, hi_in_fuel = false;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    if (m.layers[i].region != Region::FuelMeat) continue;
    if (lo >= m.kernels[i].x_left && lo <= m.kernels[i].x_right) lo_in_fuel = true;
    if (hi >= m.kernels[i].x_left && hi <= m.kernels[i].x_right) hi_in_fuel = true;
  }
  CHECK(lo_in_fuel);
  CHECK(hi_in_fuel);
}

TEST_CASE("a thousand updates beat a thousand fresh builds") {
  using Clock = std::chrono::steady_clock;
  SlabModel m = build_unit_cell(GeometryConfig{}, {10.0, 1.0}, lib());
  Rng rng(3);
  std::vector<ParamPoint> seq;
  const Bounds b;
  for (int i = 0; i < 1000; ++i)
    seq.push_back({rng.uniform(b.u_min, b.u_max), rng.uniform(b.w_min, b.w_max)});

  const auto t0 = Clock::now();
  for (const ParamPoint& p : seq) update_densities(m, p, lib());
  const auto t1 = Clock::now();
  for (const ParamPoint& p : seq) {
    volatile SlabModel fresh = build_unit_cell(GeometryConfig{}, p, lib());
    (void)fresh;
  }
  const auto t2 = Clock::now();
  CHECK((t1 - t0) < (t2 - t1));
}

}  // TEST_SUITE
