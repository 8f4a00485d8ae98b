#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mtr {

// Small feed-forward Gaussian policy: tanh hidden layers, linear output
// mean, state-independent log standard deviation per action dimension.
// The flat weight vector is shared by PPO (analytic gradient updates) and
// ES (weight perturbation).
struct PolicyNet {
  std::vector<int> layer_sizes;   // e.g. {2, 32, 32, 2}
  std::vector<double> weights;    // [W0 | b0 | W1 | b1 | ...]
  std::vector<double> log_std;    // one per action dimension, in [-5, 2]

  static PolicyNet make(std::vector<int> sizes, std::uint64_t seed);

  std::size_t weight_count() const;
  int state_dim() const { return layer_sizes.front(); }
  int action_dim() const { return layer_sizes.back(); }

  // action_mean and action_std for one state
  void forward(std::span<const double> state, std::vector<double>& mean,
               std::vector<double>& std) const;

  double log_prob(std::span<const double> state, std::span<const double> action) const;

  void clamp_log_std();
};

struct RolloutStep {
  std::vector<double> state;
  std::vector<double> action;
  double log_prob_old = 0.0;
  double reward = 0.0;
};

struct PpoSettings {
  double clip_eps = 0.2;
  double lr = 3e-3;
  int grad_steps = 4;
};

struct PpoUpdateStats {
  double loss = 0.0;       // surrogate loss after the last step
  bool rejected = false;   // non-finite loss or gradient; net left unchanged
};

// Clipped-surrogate PPO update on one rollout. Advantages are rewards minus
// the batch mean (one-step episodes). Performs grad_steps gradient-descent
// steps of size lr; the whole update is rejected if anything goes
// non-finite.
PpoUpdateStats ppo_update(PolicyNet& net, std::span<const RolloutStep> rollout,
                          const PpoSettings& settings);

// Compares the analytic surrogate-loss gradient against central finite
// differences (step 1e-5) over every weight and log_std entry; returns the
// maximum relative error.
double gradient_check(const PolicyNet& net, std::span<const RolloutStep> rollout,
                      double clip_eps);

}  // namespace mtr
