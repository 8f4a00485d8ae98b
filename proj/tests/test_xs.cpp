#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "mtr/rng.hpp"
#include "mtr/xs.hpp"

using namespace mtr;
namespace fs = std::filesystem;

namespace {

const fs::path kDefaultLib = fs::path(MTRBENCH_DATA_DIR) / "default.xs.json";

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

MaterialXs toy_material() {
  MaterialXs m;
  m.name = "toy";
  m.ref_density = 1.0;
  m.sigma_a = {0.02, 0.2};
  m.sigma_s = {{{0.1, 0.05}, {0.0, 0.3}}};
  m.sigma_t = {0.17, 0.5};
  m.nu_sigma_f = {0.03, 0.5};
  m.chi = {1.0, 0.0};
  return m;
}

}  // namespace

TEST_SUITE("xs") {

TEST_CASE("shipped library loads with the benchmark materials") {
  const XsLibrary lib = load_library_file(kDefaultLib);
  CHECK(lib.groups.boundary_ev == 0.6);
  for (const char* name : {"fuel", "aluminum", "water", "cadmium"})
    CHECK(lib.materials.contains(name));
  CHECK(lib.source_digest != 0);
}

TEST_CASE("shipped library physics shape") {
  const XsLibrary lib = load_library_file(kDefaultLib);
  const MaterialXs& cd = lib.at("cadmium");
  CHECK(cd.sigma_a[kThermal] / cd.sigma_a[kFast] >= 100.0);
  const MaterialXs& w = lib.at("water");
  CHECK(w.sigma_s[kFast][kThermal] > w.sigma_a[kFast] + w.sigma_a[kThermal]);
  const MaterialXs& f = lib.at("fuel");
  CHECK(f.nu_sigma_f[kThermal] > f.nu_sigma_f[kFast]);
  CHECK(f.nu_sigma_f[kFast] > 0.0);
  CHECK(f.chi[kFast] == 1.0);
  CHECK(f.chi[kThermal] == 0.0);
  CHECK(f.sigma_s[kThermal][kFast] == 0.0);  // no upscatter shipped
}

TEST_CASE("cache counts parses and hits") {
  XsCache cache;
  auto a = load_library(kDefaultLib, cache);
  CHECK(cache.parse_count() == 1);
  CHECK(cache.hit_count() == 0);
  auto b = load_library(kDefaultLib, cache);
  CHECK(cache.parse_count() == 1);
  CHECK(cache.hit_count() == 1);
  CHECK(a.get() == b.get());
}

TEST_CASE("cache transparency: cached object equals a fresh parse") {
  XsCache cache;
  auto cached = load_library(kDefaultLib, cache);
  const XsLibrary fresh = load_library_file(kDefaultLib);
  CHECK(cached->materials == fresh.materials);
  CHECK(cached->source_digest == fresh.source_digest);
}

TEST_CASE("concurrent loads of one path parse exactly once") {
  XsCache cache;
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&]() { (void)load_library(kDefaultLib, cache); });
  for (auto& t : threads) t.join();
  CHECK(cache.parse_count() == 1);
  CHECK(cache.hit_count() == 7);
}

TEST_CASE("missing file is reported") {
  XsCache cache;
  CHECK_THROWS_AS((void)load_library("/nonexistent/nope.json", cache), XsError);
}

TEST_CASE("the group boundary is pinned at 0.6 eV") {
  CHECK_THROWS_WITH_AS((void)parse_library(R"({"boundary_ev": 1.0, "materials": {}})", "t"),
                       doctest::Contains("boundary_ev"), XsError);
}

TEST_CASE("consistency violation names the material and group") {
  // water sigma_t[thermal] = 1.0 while sigma_a + sum(sigma_s) = 0.9
  const std::string text = R"({
    "boundary_ev": 0.6,
    "materials": {
      "water": {
        "ref_density": 1.0,
        "sigma_t": [0.6, 1.0],
        "sigma_a": [0.1, 0.3],
        "nu_sigma_f": [0.0, 0.0],
        "sigma_s": [[0.3, 0.2], [0.0, 0.6]],
        "chi": [0.0, 0.0]
      }
    }
  })";
  try {
    (void)parse_library(text, "test");
    FAIL("expected XsError");
  } catch (const XsError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("water") != std::string::npos);
    CHECK(msg.find("thermal") != std::string::npos);
  }
}

TEST_CASE("malformed record names the material and field") {
  const std::string text = R"({
    "materials": {
      "fuel": { "ref_density": 19.0, "sigma_t": [1.0] }
    }
  })";
  try {
    (void)parse_library(text, "test");
    FAIL("expected XsError");
  } catch (const XsError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("fuel") != std::string::npos);
    CHECK(msg.find("sigma_t") != std::string::npos);
  }
}

TEST_CASE("library file must carry the four benchmark materials") {
  const fs::path p = write_temp("mtr_onlyfuel.json", R"({
    "materials": {
      "fuel": {
        "ref_density": 19.0,
        "sigma_t": [1.0, 1.0],
        "sigma_a": [0.5, 0.5],
        "nu_sigma_f": [1.0, 1.2],
        "sigma_s": [[0.4, 0.1], [0.0, 0.5]],
        "chi": [1.0, 0.0]
      }
    }
  })");
  CHECK_THROWS_WITH_AS((void)load_library_file(p), doctest::Contains("aluminum"), XsError);
  fs::remove(p);
}

TEST_CASE("density scaling: identity, vacuum, linearity") {
  const MaterialXs m = toy_material();
  CHECK(scale_to_density(m, m.ref_density) == m);

  const MaterialXs zero = scale_to_density(m, 0.0);
  for (int g = 0; g < kGroups; ++g) {
    CHECK(zero.sigma_t[g] == 0.0);
    CHECK(zero.sigma_a[g] == 0.0);
    CHECK(zero.nu_sigma_f[g] == 0.0);
  }

  MaterialXs two = toy_material();
  two.sigma_a[kThermal] = 0.2;
  const MaterialXs scaled = scale_to_density(two, 2.0);
  CHECK(scaled.sigma_a[kThermal] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(scaled.ref_density == 2.0);
}

TEST_CASE("scaling composes: scale(scale(m, a), b) == scale(m, b)") {
  const MaterialXs m = toy_material();
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(0.05, 20.0);
    const double b = rng.uniform(0.05, 20.0);
    const MaterialXs direct = scale_to_density(m, b);
    const MaterialXs composed = scale_to_density(scale_to_density(m, a), b);
    for (int g = 0; g < kGroups; ++g) {
      CHECK(composed.sigma_t[g] == doctest::Approx(direct.sigma_t[g]).epsilon(1e-12));
      CHECK(composed.sigma_a[g] == doctest::Approx(direct.sigma_a[g]).epsilon(1e-12));
    }
  }
}

TEST_CASE("negative density is rejected") {
  CHECK_THROWS_AS((void)scale_to_density(toy_material(), -1.0), XsError);
}

TEST_CASE("scaled materials stay consistent") {
  const XsLibrary lib = load_library_file(kDefaultLib);
  for (const auto& [name, mat] : lib.materials)
    for (double d : {0.001, 0.5, 7.3, 25.0})
      CHECK_NOTHROW(validate_material(scale_to_density(mat, d)));
}

}  // TEST_SUITE
