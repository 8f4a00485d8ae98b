#include "mtr/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "mtr/rng.hpp"

namespace mtr {

namespace {

constexpr std::uint64_t kTagInit = 0x1a17u;
constexpr std::uint64_t kTagStep = 0x57e9u;
constexpr std::uint64_t kTagPerturb = 0xe5c0u;
constexpr std::uint64_t kTagRollout = 0x7011u;

// Broad initial action spread: with the tanh squash this samples the whole
// box including its edges, which is what lets the policy discover basins
// that sit against a parameter bound.
constexpr double kInitialLogStd = 0.7;

struct EvalRequest {
  ParamPoint params;
  std::uint64_t index = 0;
};

struct BatchResult {
  std::vector<Evaluation> evals;                 // request order
  std::vector<std::exception_ptr> errors;        // per request, null on success
  std::optional<std::size_t> first_failed;       // lowest failed request index
};

// Evaluates a batch of requests, possibly across threads. Results come back
// in request order; worker ids are thread slots. Exceptions are captured
// per request so a failing evaluation never tears down the pool.
BatchResult eval_batch(const WorkerEval& eval, const std::vector<EvalRequest>& reqs,
                       int threads) {
  BatchResult out;
  out.evals.resize(reqs.size());
  out.errors.resize(reqs.size());
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(reqs.size())));
  auto run_one = [&](std::size_t i, int worker) {
    try {
      out.evals[i] = eval(reqs[i].params, reqs[i].index, worker);
    } catch (...) {
      out.errors[i] = std::current_exception();
    }
  };
  if (n_workers == 1) {
    for (std::size_t i = 0; i < reqs.size(); ++i) run_one(i, 0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = static_cast<std::size_t>(w); i < reqs.size();
             i += static_cast<std::size_t>(n_workers))
          run_one(i, w);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    if (out.errors[i]) {
      out.first_failed = i;
      break;
    }
  }
  return out;
}

const Evaluation* best_of(const std::vector<OptRunEntry>& history) {
  const Evaluation* best = nullptr;
  for (const OptRunEntry& e : history)
    if (!best || e.ev.fitness < best->fitness) best = &e.ev;
  return best;
}

}  // namespace

void validate_jaya(const JayaConfig& cfg) {
  if (cfg.pop_size < 4) throw std::runtime_error("jaya: pop_size must be >= 4");
  if (cfg.max_evals < cfg.pop_size)
    throw std::runtime_error("jaya: max_evals must be >= pop_size");
}

void validate_ppo_es(const PpoEsConfig& cfg) {
  if (cfg.es_pop < 4) throw std::runtime_error("ppo-es: es_pop must be >= 4");
  if (!(cfg.es_elite_frac > 0.0 && cfg.es_elite_frac <= 1.0))
    throw std::runtime_error("ppo-es: es_elite_frac must be in (0, 1]");
  if (!(cfg.ppo_clip_eps > 0.0 && cfg.ppo_clip_eps < 1.0))
    throw std::runtime_error("ppo-es: ppo_clip_eps must be in (0, 1)");
  if (cfg.ppo_inner_iters < 1 || cfg.steps_per_update < 1 || cfg.generations < 1)
    throw std::runtime_error("ppo-es: iteration counts must be >= 1");
  if (cfg.es_sigma < 0.0) throw std::runtime_error("ppo-es: es_sigma must be >= 0");
}

std::vector<Individual> jaya_step(const std::vector<Individual>& pop,
                                  const Individual& best, const Individual& worst,
                                  const Bounds& bounds, std::uint64_t step_seed,
                                  const WorkerEval& eval, std::uint64_t base_index,
                                  int budget, int threads,
                                  std::vector<OptRunEntry>* history, int gen) {
  const int n_candidates = std::min<int>(static_cast<int>(pop.size()), budget);
  std::vector<EvalRequest> reqs;
  reqs.reserve(static_cast<std::size_t>(n_candidates));
  for (int i = 0; i < n_candidates; ++i) {
    Rng rng(stream_seed(step_seed, static_cast<std::uint64_t>(i), kTagStep));
    const Individual& x = pop[static_cast<std::size_t>(i)];
    const double xs[2] = {x.params.u_density, x.params.w_density};
    const double bs[2] = {best.params.u_density, best.params.w_density};
    const double ws[2] = {worst.params.u_density, worst.params.w_density};
    double cand[2];
    for (int j = 0; j < 2; ++j) {
      const double r1 = rng.uniform();
      const double r2 = rng.uniform();
      cand[j] = xs[j] + r1 * (bs[j] - std::abs(xs[j])) - r2 * (ws[j] - std::abs(xs[j]));
    }
    reqs.push_back({bounds.clip({cand[0], cand[1]}), base_index + static_cast<std::uint64_t>(i)});
  }

  const BatchResult batch = eval_batch(eval, reqs, threads);
  const std::size_t usable =
      batch.first_failed.value_or(static_cast<std::size_t>(n_candidates));
  std::vector<Individual> next = pop;
  for (std::size_t i = 0; i < usable; ++i) {
    const Evaluation& ev = batch.evals[i];
    if (history) history->push_back({ev, gen});
    if (ev.fitness < pop[i].fitness)  // strictly better
      next[i] = {ev.params, ev.fitness, true};
  }
  if (batch.first_failed)  // abort, keeping the history prefix before the failure
    std::rethrow_exception(batch.errors[*batch.first_failed]);
  return next;
}

OptRun jaya_run(const JayaConfig& cfg, const WorkerEval& eval, const Bounds& bounds,
                std::optional<Bounds> init_bounds, int threads) {
  validate_jaya(cfg);
  const Bounds init = init_bounds.value_or(bounds);

  OptRun run;
  run.algorithm = "jaya";

  try {
    // initial population uniform over the init box
    std::vector<EvalRequest> reqs;
    Rng rng(stream_seed(cfg.seed, kTagInit));
    for (int i = 0; i < cfg.pop_size; ++i) {
      ParamPoint p{rng.uniform(init.u_min, init.u_max), rng.uniform(init.w_min, init.w_max)};
      reqs.push_back({p, static_cast<std::uint64_t>(i)});
    }
    const BatchResult batch = eval_batch(eval, reqs, threads);
    const std::size_t usable =
        batch.first_failed.value_or(static_cast<std::size_t>(cfg.pop_size));
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < usable; ++i) {
      run.history.push_back({batch.evals[i], 0});
      pop.push_back({batch.evals[i].params, batch.evals[i].fitness, true});
    }
    if (batch.first_failed) std::rethrow_exception(batch.errors[*batch.first_failed]);

    int evals_used = cfg.pop_size;
    int gen = 1;
    while (evals_used < cfg.max_evals) {
      auto [mn, mx] = std::minmax_element(
          pop.begin(), pop.end(),
          [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });
      pop = jaya_step(pop, *mn, *mx, bounds,
                      stream_seed(cfg.seed, static_cast<std::uint64_t>(gen)), eval,
                      static_cast<std::uint64_t>(evals_used), cfg.max_evals - evals_used,
                      threads, &run.history, gen);
      evals_used = static_cast<int>(run.history.size());
      ++gen;
    }
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  if (const Evaluation* best = best_of(run.history)) run.best = *best;
  return run;
}

ParamPoint squash_action(const std::vector<double>& action, const Bounds& bounds) {
  const double tu = 0.5 * (std::tanh(action[0]) + 1.0);
  const double tw = 0.5 * (std::tanh(action[1]) + 1.0);
  return {bounds.u_min + tu * (bounds.u_max - bounds.u_min),
          bounds.w_min + tw * (bounds.w_max - bounds.w_min)};
}

std::vector<double> normalize_params(const ParamPoint& p, const Bounds& bounds) {
  return {2.0 * (p.u_density - bounds.u_min) / (bounds.u_max - bounds.u_min) - 1.0,
          2.0 * (p.w_density - bounds.w_min) / (bounds.w_max - bounds.w_min) - 1.0};
}

namespace {

struct WorkerOutcome {
  PolicyNet policy;
  double score = -std::numeric_limits<double>::infinity();
  bool failed = false;
  std::vector<Evaluation> evals;
};

// One ES worker: perturb the central policy, then run PPO updates on its own
// one-step-episode rollouts. Everything is seeded from (seed, gen, worker).
WorkerOutcome run_worker(const PpoEsConfig& cfg, const PolicyNet& central, int gen,
                         int w, const WorkerEval& eval, const Bounds& bounds,
                         std::uint64_t index_base, int worker_slot) {
  WorkerOutcome out;
  out.policy = central;
  Rng perturb_rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(gen),
                              static_cast<std::uint64_t>(w), kTagPerturb));
  for (double& v : out.policy.weights) v += cfg.es_sigma * perturb_rng.normal();

  // The rollout stream is keyed on the perturbed weights: workers with
  // identical policies (es_sigma == 0) share one stream and stay in
  // lockstep, distinct perturbations get independent streams.
  const std::uint64_t policy_tag = fnv1a64(std::string_view(
      reinterpret_cast<const char*>(out.policy.weights.data()),
      out.policy.weights.size() * sizeof(double)));
  Rng roll_rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(gen), policy_tag,
                           kTagRollout));
  std::vector<double> state = normalize_params(bounds.center(), bounds);
  std::vector<double> mean, sd;
  const PpoSettings settings{cfg.ppo_clip_eps, cfg.ppo_lr, 4};

  try {
    std::uint64_t index = index_base;
    for (int it = 0; it < cfg.ppo_inner_iters; ++it) {
      std::vector<RolloutStep> rollout;
      rollout.reserve(static_cast<std::size_t>(cfg.steps_per_update));
      for (int st = 0; st < cfg.steps_per_update; ++st) {
        out.policy.forward(state, mean, sd);
        std::vector<double> action(mean.size());
        for (std::size_t d = 0; d < mean.size(); ++d)
          action[d] = mean[d] + sd[d] * roll_rng.normal();
        const ParamPoint params = squash_action(action, bounds);
        const Evaluation ev = eval(params, index++, worker_slot);
        out.evals.push_back(ev);
        RolloutStep step;
        step.state = state;
        step.action = std::move(action);
        step.log_prob_old = out.policy.log_prob(step.state, step.action);
        step.reward = -ev.fitness;
        rollout.push_back(std::move(step));
        state = normalize_params(params, bounds);
      }
      ppo_update(out.policy, rollout, settings);
    }
  } catch (const std::exception&) {
    out.failed = true;
    return out;
  }
  double sum = 0.0;
  for (const Evaluation& ev : out.evals) sum += -ev.fitness;
  out.score = sum / static_cast<double>(out.evals.size());
  return out;
}

}  // namespace

OptRun ppo_es_run(const PpoEsConfig& cfg, const WorkerEval& eval, const Bounds& bounds,
                  int threads) {
  validate_ppo_es(cfg);
  OptRun run;
  run.algorithm = "ppo-es";

  PolicyNet central = PolicyNet::make(cfg.layer_sizes, cfg.seed);
  std::fill(central.log_std.begin(), central.log_std.end(), kInitialLogStd);
  const std::uint64_t evals_per_worker =
      static_cast<std::uint64_t>(cfg.ppo_inner_iters) *
      static_cast<std::uint64_t>(cfg.steps_per_update);
  const int n_elite =
      std::max(1, static_cast<int>(std::ceil(cfg.es_elite_frac * cfg.es_pop)));

  try {
    for (int gen = 0; gen < cfg.generations; ++gen) {
      std::vector<WorkerOutcome> outcomes(static_cast<std::size_t>(cfg.es_pop));
      const std::uint64_t gen_base = static_cast<std::uint64_t>(gen) *
                                     static_cast<std::uint64_t>(cfg.es_pop) *
                                     evals_per_worker;
      const int n_threads = std::max(1, std::min(threads, cfg.es_pop));
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(n_threads));
      for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
          for (int w = t; w < cfg.es_pop; w += n_threads)
            outcomes[static_cast<std::size_t>(w)] =
                run_worker(cfg, central, gen, w, eval, bounds,
                           gen_base + static_cast<std::uint64_t>(w) * evals_per_worker, t);
        });
      }
      for (auto& th : pool) th.join();

      // barrier: history in worker order, then elite recombination
      for (int w = 0; w < cfg.es_pop; ++w)
        for (const Evaluation& ev : outcomes[static_cast<std::size_t>(w)].evals)
          run.history.push_back({ev, gen});

      std::vector<int> order(static_cast<std::size_t>(cfg.es_pop));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return outcomes[static_cast<std::size_t>(a)].score >
               outcomes[static_cast<std::size_t>(b)].score;
      });
      std::vector<int> elite;
      for (int idx : order) {
        if (outcomes[static_cast<std::size_t>(idx)].failed) continue;
        elite.push_back(idx);
        if (static_cast<int>(elite.size()) == n_elite) break;
      }
      if (elite.empty()) throw std::runtime_error("ppo-es: every worker failed");

      const double inv = 1.0 / static_cast<double>(elite.size());
      std::fill(central.weights.begin(), central.weights.end(), 0.0);
      std::fill(central.log_std.begin(), central.log_std.end(), 0.0);
      for (int idx : elite) {
        const PolicyNet& p = outcomes[static_cast<std::size_t>(idx)].policy;
        for (std::size_t i = 0; i < central.weights.size(); ++i)
          central.weights[i] += inv * p.weights[i];
        for (std::size_t d = 0; d < central.log_std.size(); ++d)
          central.log_std[d] += inv * p.log_std[d];
      }
      central.clamp_log_std();
    }
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  if (const Evaluation* best = best_of(run.history)) run.best = *best;
  return run;
}

}  // namespace mtr
