#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "mtr/config.hpp"
#include "mtr/fmt.hpp"
#include "mtr/landscape.hpp"
#include "mtr/optimizers.hpp"
#include "mtr/rng.hpp"
#include "mtr/speedup.hpp"

namespace fs = std::filesystem;
using namespace mtr;

namespace {

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 2 : static_cast<int>(n);
}

// Runs land in deterministic seed-named subdirectories; an existing one is
// refused unless --force.
fs::path make_run_dir(const fs::path& root, const std::string& name, bool force) {
  const fs::path dir = root / name;
  if (fs::exists(dir)) {
    if (!force)
      throw std::runtime_error("output directory exists (use --force): " + dir.string());
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
  return dir;
}

// Per-worker evaluator pool behind the optimizer callback; each slot owns
// its own SlabModel. With batch logging on, every run's per-batch k and
// source entropy are collected (thread-safe, ordered by eval index later).
class EvaluatorPool {
 public:
  EvaluatorPool(const RunConfig& cfg, const XsLibrary& lib, const McConfig& mc, int slots,
                bool batch_log = false) {
    for (int i = 0; i < slots; ++i) {
      auto ev = std::make_unique<Evaluator>(cfg.geometry, cfg.bounds, lib, mc,
                                            cfg.objective);
      if (batch_log) {
        ev->set_batch_sink([this](std::uint64_t index, const std::vector<BatchDiag>& d) {
          std::lock_guard<std::mutex> lock(mutex_);
          batch_log_.emplace_back(index, d);
        });
      }
      evals_.push_back(std::move(ev));
    }
  }

  WorkerEval fn() {
    return [this](const ParamPoint& p, std::uint64_t index, int worker) {
      return (*evals_[static_cast<std::size_t>(worker) % evals_.size()])(p, index);
    };
  }

  void write_batch_log(const fs::path& path) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::sort(batch_log_.begin(), batch_log_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::ofstream out(path, std::ios::binary);
    for (const auto& [index, diags] : batch_log_) {
      for (const BatchDiag& d : diags) {
        nlohmann::ordered_json j;
        j["eval"] = index;
        j["batch"] = d.batch;
        j["k"] = d.k;
        j["entropy"] = d.entropy;
        j["bank"] = d.bank_size;
        out << j.dump() << '\n';
      }
    }
  }

 private:
  std::vector<std::unique_ptr<Evaluator>> evals_;
  std::mutex mutex_;
  std::vector<std::pair<std::uint64_t, std::vector<BatchDiag>>> batch_log_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_optimize(const fs::path& config_path, const std::string& algo,
                 std::uint64_t seed, bool seed_given, int threads,
                 const std::string& out_override, bool force, bool batch_log) {
  RunConfig cfg = load_run_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (seed_given) {
    cfg.jaya.seed = seed;
    cfg.ppo_es.seed = seed;
    cfg.mc.seed = seed;
  }
  XsCache cache;
  auto lib = load_library(cfg.xs_library, cache);

  const std::uint64_t run_seed = algo == "jaya" ? cfg.jaya.seed : cfg.ppo_es.seed;
  const fs::path dir =
      make_run_dir(cfg.output_dir, "optimize-" + algo + "-seed" + std::to_string(run_seed),
                   force);

  const int slots = std::max(threads, algo == "jaya" ? cfg.jaya.pop_size : cfg.ppo_es.es_pop);
  EvaluatorPool pool(cfg, *lib, cfg.mc, slots, batch_log);

  OptRun run;
  if (algo == "jaya") {
    run = jaya_run(cfg.jaya, pool.fn(), cfg.bounds, std::nullopt, threads);
  } else {
    run = ppo_es_run(cfg.ppo_es, pool.fn(), cfg.bounds, threads);
  }

  if (batch_log) pool.write_batch_log(dir / "batches.jsonl");
  write_text(dir / "config.json", cfg.to_json().dump(2) + "\n");
  {
    std::ofstream hist(dir / "history.jsonl", std::ios::binary);
    for (const OptRunEntry& e : run.history)
      hist << history_line(e.ev, run.algorithm, e.gen) << '\n';
  }
  {
    nlohmann::ordered_json best = evaluation_to_json(run.best);
    best["algo"] = run.algorithm;
    best["evals"] = run.history.size();
    if (!run.error.empty()) best["error"] = run.error;
    write_text(dir / "best.json", best.dump(2) + "\n");
  }
  std::cout << "best: U=" << format_double(run.best.params.u_density)
            << " W=" << format_double(run.best.params.w_density)
            << " k=" << format_double(run.best.k)
            << " flux=" << format_double(run.best.fast_flux)
            << " fitness=" << format_double(run.best.fitness) << "\n"
            << "run dir: " << dir.string() << "\n";
  if (!run.error.empty()) {
    // partial results are on disk; the failure decides the exit status
    std::cerr << "error: run aborted after " << run.history.size()
              << " evaluations: " << run.error << "\n";
    return 1;
  }
  return 0;
}

int cmd_landscape(const fs::path& config_path, const std::string& res,
                  std::uint64_t seed, bool seed_given, int threads,
                  const std::string& out_override, bool force) {
  RunConfig cfg = load_run_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (seed_given) cfg.mc.seed = seed;
  int n_u = cfg.landscape.n_u, n_w = cfg.landscape.n_w;
  if (!res.empty()) {
    const auto x = res.find('x');
    if (x == std::string::npos)
      throw std::runtime_error("--res expects <n_u>x<n_w>, e.g. 40x40");
    n_u = std::stoi(res.substr(0, x));
    n_w = std::stoi(res.substr(x + 1));
  }
  XsCache cache;
  auto lib = load_library(cfg.xs_library, cache);

  const fs::path dir = make_run_dir(
      cfg.output_dir,
      "landscape-" + std::to_string(n_u) + "x" + std::to_string(n_w) + "-seed" +
          std::to_string(cfg.mc.seed),
      force);

  const LandscapeMap map =
      grid_scan(cfg.geometry, cfg.bounds, n_u, n_w, *lib, cfg.mc, cfg.objective, threads);
  write_map_csv(map, dir / "map.csv");

  const CriticalRegionReport report = critical_regions(map, cfg.landscape.tolerance);
  nlohmann::ordered_json rj;
  rj["tolerance"] = report.tolerance;
  rj["component_count"] = report.component_count;
  rj["components"] = nlohmann::ordered_json::array();
  for (const CriticalComponent& comp : report.components) {
    const LandscapeCell& best = map.cells[comp.best_cell];
    rj["components"].push_back({{"cells", comp.cell_ids.size()},
                                {"u_min", comp.u_min},
                                {"u_max", comp.u_max},
                                {"w_min", comp.w_min},
                                {"w_max", comp.w_max},
                                {"best_cell",
                                 {{"u", best.u},
                                  {"w", best.w},
                                  {"k", best.k},
                                  {"flux", best.flux},
                                  {"fitness", best.fitness}}}});
  }
  if (report.component_count >= 2) rj["w_split"] = basin_split_w(report);
  write_text(dir / "critical_regions.json", rj.dump(2) + "\n");

  // render from the CSV so the plots are a pure function of the map file
  const LandscapeMap from_csv = read_map_csv(dir / "map.csv");
  render_heatmap(from_csv, MapField::K, dir / "heatmap_k.svg", nullptr,
                 cfg.landscape.tolerance);
  render_heatmap(from_csv, MapField::FastFlux, dir / "heatmap_flux.svg", nullptr,
                 cfg.landscape.tolerance);
  render_heatmap(from_csv, MapField::Fitness, dir / "heatmap_fitness.svg", nullptr,
                 cfg.landscape.tolerance);

  std::cout << "components at tol " << format_double(report.tolerance) << ": "
            << report.component_count << "\n"
            << "run dir: " << dir.string() << "\n";
  return 0;
}

int cmd_bench_speedup(const fs::path& config_path, int evals,
                      const std::string& out_override, bool force) {
  RunConfig cfg = load_run_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  const SpeedupReport report = bench_speedup(cfg, evals);
  const fs::path dir = make_run_dir(cfg.output_dir, "bench-speedup", force);
  write_text(dir / "speedup.json", report.to_json().dump(2) + "\n");

  std::cout << "pipeline            relative running time\n";
  std::cout << "baseline            100%\n";
  std::cout << "updating model      "
            << format_double(100.0 * report.relative_update) << "%\n";
  std::cout << "update + XS in RAM  "
            << format_double(100.0 * report.relative_update_cache) << "%\n";
  std::cout << "physics identical:  " << (report.physics_identical ? "yes" : "NO") << "\n";
  if (!report.physics_identical) return 1;
  return 0;
}

int cmd_validate(const fs::path& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  bool all_ok = true;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    all_ok = all_ok && ok;
  };

  XsLibrary lib;
  try {
    lib = load_library_file(cfg.xs_library);
    check("xs consistency", true, cfg.xs_library.filename().string());
  } catch (const std::exception& e) {
    check("xs consistency", false, e.what());
    return 1;
  }

  // oracle equivalence: each material as a homogeneous infinite medium
  for (const auto& [name, mat] : lib.materials) {
    SlabModel model;
    model.layers.push_back(Layer{Region::FuelMeat, name, 3.0, mat});
    model.tally_layer = 0;
    finalize_model(model);
    McConfig mc = cfg.mc;
    mc.seed = stream_seed(cfg.mc.seed, fnv1a64(name));
    try {
      const double k_ref = kinf_analytic(mat);
      const RunResult rr = run_keig(model, mc);
      const double tol = std::max(3.0 * rr.k_std, 1e-12);
      const bool ok = std::abs(rr.k_mean - k_ref) <= tol;
      check("oracle k_inf [" + name + "]", ok,
            "mc=" + format_double(rr.k_mean) + " analytic=" + format_double(k_ref) +
                " 3sigma=" + format_double(3.0 * rr.k_std));
    } catch (const std::exception& e) {
      check("oracle k_inf [" + name + "]", false, e.what());
    }
  }

  // gradient check on a seeded random net and rollout
  {
    PolicyNet net = PolicyNet::make({2, 8, 2}, 7);
    Rng rng(stream_seed(7, 0xabcu));
    std::vector<RolloutStep> rollout;
    for (int i = 0; i < 16; ++i) {
      RolloutStep s;
      s.state = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      std::vector<double> mean, sd;
      net.forward(s.state, mean, sd);
      s.action = {mean[0] + sd[0] * rng.normal(), mean[1] + sd[1] * rng.normal()};
      s.log_prob_old = net.log_prob(s.state, s.action);
      s.reward = rng.uniform(-1.0, 1.0);
      rollout.push_back(std::move(s));
    }
    const double err = gradient_check(net, rollout, 0.2);
    check("ppo gradient vs finite differences", err < 1e-4,
          "max rel err=" + format_double(err));
  }

  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MTR unit-cell reactor-optimization benchmark"};
  app.require_subcommand(1);

  std::string config;
  std::string algo = "jaya";
  std::string res;
  std::string out_override;
  std::uint64_t seed = 0;
  int threads = hardware_threads();
  int evals = 100;
  bool force = false;
  bool batch_log = false;

  auto add_common = [&](CLI::App* sub, bool with_threads = true) {
    sub->add_option("config", config, "run config JSON")->required();
    sub->add_option("--out", out_override, "override output directory");
    sub->add_flag("--force", force, "overwrite an existing run directory");
    if (with_threads) sub->add_option("--threads", threads, "worker pool size");
  };

  CLI::App* optimize = app.add_subcommand("optimize", "run one optimizer on the benchmark");
  add_common(optimize);
  optimize->add_option("--algo", algo, "jaya or ppo-es")
      ->check(CLI::IsMember({"jaya", "ppo-es"}));
  optimize->add_flag("--batch-log", batch_log,
                     "also write per-batch k/entropy diagnostics (batches.jsonl)");
  CLI::Option* opt_seed = optimize->add_option("--seed", seed, "optimizer + MC seed");

  CLI::App* landscape = app.add_subcommand("landscape", "grid-scan the (U, W) domain");
  add_common(landscape);
  landscape->add_option("--res", res, "grid resolution <n_u>x<n_w>");
  CLI::Option* land_seed = landscape->add_option("--seed", seed, "MC seed");

  CLI::App* bench = app.add_subcommand("bench-speedup", "time the model-handling pipelines");
  add_common(bench, false);
  bench->add_option("--evals", evals, "evaluations per pipeline")
      ->check(CLI::Range(20, 1000000));

  CLI::App* validate = app.add_subcommand("validate", "run the built-in verification checks");
  validate->add_option("config", config, "run config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(optimize))
      return cmd_optimize(config, algo, seed, opt_seed->count() > 0, threads, out_override,
                          force, batch_log);
    if (app.got_subcommand(landscape))
      return cmd_landscape(config, res, seed, land_seed->count() > 0, threads, out_override,
                           force);
    if (app.got_subcommand(bench)) return cmd_bench_speedup(config, evals, out_override, force);
    if (app.got_subcommand(validate)) return cmd_validate(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
