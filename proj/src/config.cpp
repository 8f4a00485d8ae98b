#include "mtr/config.hpp"

#include <cstdlib>
#include <fstream>

#include "mtr/fmt.hpp"

namespace mtr {

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_geometry(const nlohmann::json& j, GeometryConfig& g) {
  read_field(j, "n_fuel_plates", g.n_fuel_plates);
  read_field(j, "fuel_meat_cm", g.fuel_meat_cm);
  read_field(j, "clad_cm", g.clad_cm);
  read_field(j, "water_channel_cm", g.water_channel_cm);
  read_field(j, "side_plate_cm", g.side_plate_cm);
  read_field(j, "cadmium_cm", g.cadmium_cm);
  read_field(j, "water_gap_cm", g.water_gap_cm);
}

void parse_mc(const nlohmann::json& j, McConfig& mc) {
  read_field(j, "particles_per_batch", mc.particles_per_batch);
  read_field(j, "n_batches", mc.n_batches);
  read_field(j, "n_inactive", mc.n_inactive);
  read_field(j, "seed", mc.seed);
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": not valid JSON: " + e.what());
  }

  RunConfig cfg;
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  if (!j.contains("xs_library"))
    throw ConfigError(path.string() + ": missing 'xs_library'");
  cfg.xs_library = resolve(j.at("xs_library").get<std::string>());
  if (const char* env = std::getenv("MTRBENCH_XS_PATH"); env && *env)
    cfg.xs_library = env;
  if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());

  if (j.contains("geometry")) parse_geometry(j.at("geometry"), cfg.geometry);
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    read_field(b, "u_min", cfg.bounds.u_min);
    read_field(b, "u_max", cfg.bounds.u_max);
    read_field(b, "w_min", cfg.bounds.w_min);
    read_field(b, "w_max", cfg.bounds.w_max);
  }
  if (j.contains("mc")) parse_mc(j.at("mc"), cfg.mc);
  if (j.contains("speedup_mc")) parse_mc(j.at("speedup_mc"), cfg.speedup_mc);
  if (j.contains("objective")) {
    const auto& o = j.at("objective");
    read_field(o, "criticality_constant", cfg.objective.criticality_constant);
    read_field(o, "flux_constant", cfg.objective.flux_constant);
  }
  if (j.contains("jaya")) {
    const auto& a = j.at("jaya");
    read_field(a, "pop_size", cfg.jaya.pop_size);
    read_field(a, "max_evals", cfg.jaya.max_evals);
    read_field(a, "seed", cfg.jaya.seed);
  }
  if (j.contains("ppo_es")) {
    const auto& a = j.at("ppo_es");
    read_field(a, "es_pop", cfg.ppo_es.es_pop);
    read_field(a, "es_sigma", cfg.ppo_es.es_sigma);
    read_field(a, "es_elite_frac", cfg.ppo_es.es_elite_frac);
    read_field(a, "ppo_inner_iters", cfg.ppo_es.ppo_inner_iters);
    read_field(a, "ppo_clip_eps", cfg.ppo_es.ppo_clip_eps);
    read_field(a, "ppo_lr", cfg.ppo_es.ppo_lr);
    read_field(a, "steps_per_update", cfg.ppo_es.steps_per_update);
    read_field(a, "generations", cfg.ppo_es.generations);
    read_field(a, "seed", cfg.ppo_es.seed);
    read_field(a, "layer_sizes", cfg.ppo_es.layer_sizes);
  }
  if (j.contains("landscape")) {
    const auto& l = j.at("landscape");
    read_field(l, "n_u", cfg.landscape.n_u);
    read_field(l, "n_w", cfg.landscape.n_w);
    read_field(l, "tolerance", cfg.landscape.tolerance);
  }

  if (!std::filesystem::exists(cfg.xs_library))
    throw ConfigError("xs_library does not exist: " + cfg.xs_library.string());
  validate_geometry(cfg.geometry);
  validate_mc(cfg.mc);
  validate_mc(cfg.speedup_mc);
  validate_objective(cfg.objective);
  validate_jaya(cfg.jaya);
  validate_ppo_es(cfg.ppo_es);
  if (!(cfg.bounds.u_min < cfg.bounds.u_max && cfg.bounds.w_min < cfg.bounds.w_max))
    throw ConfigError("bounds: min must be below max");
  return cfg;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["xs_library"] = xs_library.string();
  j["output_dir"] = output_dir.string();
  j["geometry"] = {{"n_fuel_plates", geometry.n_fuel_plates},
                   {"fuel_meat_cm", geometry.fuel_meat_cm},
                   {"clad_cm", geometry.clad_cm},
                   {"water_channel_cm", geometry.water_channel_cm},
                   {"side_plate_cm", geometry.side_plate_cm},
                   {"cadmium_cm", geometry.cadmium_cm},
                   {"water_gap_cm", geometry.water_gap_cm}};
  j["bounds"] = {{"u_min", bounds.u_min},
                 {"u_max", bounds.u_max},
                 {"w_min", bounds.w_min},
                 {"w_max", bounds.w_max}};
  j["mc"] = {{"particles_per_batch", mc.particles_per_batch},
             {"n_batches", mc.n_batches},
             {"n_inactive", mc.n_inactive},
             {"seed", mc.seed}};
  j["objective"] = {{"criticality_constant", objective.criticality_constant},
                    {"flux_constant", objective.flux_constant}};
  j["jaya"] = {{"pop_size", jaya.pop_size},
               {"max_evals", jaya.max_evals},
               {"seed", jaya.seed}};
  j["ppo_es"] = {{"es_pop", ppo_es.es_pop},
                 {"es_sigma", ppo_es.es_sigma},
                 {"es_elite_frac", ppo_es.es_elite_frac},
                 {"ppo_inner_iters", ppo_es.ppo_inner_iters},
                 {"ppo_clip_eps", ppo_es.ppo_clip_eps},
                 {"ppo_lr", ppo_es.ppo_lr},
                 {"steps_per_update", ppo_es.steps_per_update},
                 {"generations", ppo_es.generations},
                 {"seed", ppo_es.seed},
                 {"layer_sizes", ppo_es.layer_sizes}};
  j["landscape"] = {{"n_u", landscape.n_u},
                    {"n_w", landscape.n_w},
                    {"tolerance", landscape.tolerance}};
  j["speedup_mc"] = {{"particles_per_batch", speedup_mc.particles_per_batch},
                     {"n_batches", speedup_mc.n_batches},
                     {"n_inactive", speedup_mc.n_inactive},
                     {"seed", speedup_mc.seed}};
  return j;
}

nlohmann::ordered_json evaluation_to_json(const Evaluation& ev) {
  nlohmann::ordered_json j;
  j["eval"] = ev.eval_index;
  j["u"] = ev.params.u_density;
  j["w"] = ev.params.w_density;
  j["k"] = ev.k;
  j["k_std"] = ev.k_std;
  j["flux"] = ev.fast_flux;
  j["fitness"] = ev.fitness;
  j["ms"] = ev.wall_time_ms;
  return j;
}

std::string history_line(const Evaluation& ev, const std::string& algo, int gen) {
  nlohmann::ordered_json j = evaluation_to_json(ev);
  j["algo"] = algo;
  j["gen"] = gen;
  return j.dump();
}

}  // namespace mtr
