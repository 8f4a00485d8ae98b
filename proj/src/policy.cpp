#include "mtr/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtr/rng.hpp"

namespace mtr {

namespace {

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.9189385332046727418;

}  // namespace

std::size_t PolicyNet::weight_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += static_cast<std::size_t>(layer_sizes[l] + 1) *
         static_cast<std::size_t>(layer_sizes[l + 1]);
  return n;
}

PolicyNet PolicyNet::make(std::vector<int> sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw std::runtime_error("PolicyNet needs at least two layers");
  PolicyNet net;
  net.layer_sizes = std::move(sizes);
  net.weights.resize(net.weight_count());
  net.log_std.assign(static_cast<std::size_t>(net.action_dim()), 0.0);
  Rng rng(stream_seed(seed, 0x9017u));
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int fan_in = net.layer_sizes[l];
    const int fan_out = net.layer_sizes[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < fan_in * fan_out; ++i) net.weights[at++] = scale * rng.normal();
    for (int i = 0; i < fan_out; ++i) net.weights[at++] = 0.0;  // biases
  }
  return net;
}

void PolicyNet::clamp_log_std() {
  for (double& v : log_std) v = std::clamp(v, kLogStdMin, kLogStdMax);
}

namespace {

// Forward pass keeping post-activation values per layer for backprop.
void forward_cached(const PolicyNet& net, std::span<const double> state,
                    std::vector<std::vector<double>>& acts) {
  acts.assign(net.layer_sizes.size(), {});
  acts[0].assign(state.begin(), state.end());
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int fan_in = net.layer_sizes[l];
    const int fan_out = net.layer_sizes[l + 1];
    const bool last = l + 2 == net.layer_sizes.size();
    auto& out = acts[l + 1];
    out.assign(static_cast<std::size_t>(fan_out), 0.0);
    const double* W = net.weights.data() + at;
    const double* b = W + static_cast<std::size_t>(fan_in) * fan_out;
    for (int j = 0; j < fan_out; ++j) {
      double z = b[j];
      for (int i = 0; i < fan_in; ++i)
        z += acts[l][static_cast<std::size_t>(i)] * W[i * fan_out + j];
      out[static_cast<std::size_t>(j)] = last ? z : std::tanh(z);
    }
    at += static_cast<std::size_t>(fan_in + 1) * fan_out;
  }
}

// Accumulates dL/dweights given dL/d(output mean) for one sample.
void backward(const PolicyNet& net, const std::vector<std::vector<double>>& acts,
              std::vector<double> d_out, std::vector<double>& grad_w) {
  const std::size_t n_layers = net.layer_sizes.size();
  // walk layers backwards; offsets recomputed per layer
  std::vector<std::size_t> offsets(n_layers - 1);
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    offsets[l] = at;
    at += static_cast<std::size_t>(net.layer_sizes[l] + 1) * net.layer_sizes[l + 1];
  }
  for (std::size_t l = n_layers - 1; l-- > 0;) {
    const int fan_in = net.layer_sizes[l];
    const int fan_out = net.layer_sizes[l + 1];
    const bool last = l + 2 == n_layers;
    const double* W = net.weights.data() + offsets[l];
    double* gW = grad_w.data() + offsets[l];
    double* gb = gW + static_cast<std::size_t>(fan_in) * fan_out;

    // d z_j: through tanh for hidden layers, identity for the output
    std::vector<double> dz(static_cast<std::size_t>(fan_out));
    for (int j = 0; j < fan_out; ++j) {
      const double a = acts[l + 1][static_cast<std::size_t>(j)];
      dz[static_cast<std::size_t>(j)] =
          last ? d_out[static_cast<std::size_t>(j)]
               : d_out[static_cast<std::size_t>(j)] * (1.0 - a * a);
    }
    for (int j = 0; j < fan_out; ++j) {
      gb[j] += dz[static_cast<std::size_t>(j)];
      for (int i = 0; i < fan_in; ++i)
        gW[i * fan_out + j] +=
            acts[l][static_cast<std::size_t>(i)] * dz[static_cast<std::size_t>(j)];
    }
    if (l == 0) break;
    std::vector<double> d_prev(static_cast<std::size_t>(fan_in), 0.0);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j)
        d_prev[static_cast<std::size_t>(i)] +=
            W[i * fan_out + j] * dz[static_cast<std::size_t>(j)];
    d_out = std::move(d_prev);
  }
}

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_w;
  std::vector<double> grad_log_std;
};

std::vector<double> advantages(std::span<const RolloutStep> rollout) {
  double mean = 0.0;
  for (const RolloutStep& s : rollout) mean += s.reward;
  mean /= static_cast<double>(rollout.size());
  std::vector<double> adv(rollout.size());
  for (std::size_t i = 0; i < rollout.size(); ++i) adv[i] = rollout[i].reward - mean;
  return adv;
}

LossGrad surrogate_loss(const PolicyNet& net, std::span<const RolloutStep> rollout,
                        std::span<const double> adv, double clip_eps,
                        bool want_grad) {
  LossGrad out;
  out.grad_w.assign(net.weights.size(), 0.0);
  out.grad_log_std.assign(net.log_std.size(), 0.0);
  const int ad = net.action_dim();
  const double inv_n = 1.0 / static_cast<double>(rollout.size());
  std::vector<std::vector<double>> acts;

  for (std::size_t i = 0; i < rollout.size(); ++i) {
    const RolloutStep& s = rollout[i];
    forward_cached(net, s.state, acts);
    const std::vector<double>& mean = acts.back();

    double lp = 0.0;
    for (int d = 0; d < ad; ++d) {
      const double sd = std::exp(net.log_std[static_cast<std::size_t>(d)]);
      const double z = (s.action[static_cast<std::size_t>(d)] -
                        mean[static_cast<std::size_t>(d)]) / sd;
      lp += -0.5 * z * z - net.log_std[static_cast<std::size_t>(d)] - kHalfLog2Pi;
    }
    const double ratio = std::exp(lp - s.log_prob_old);
    const double a = adv[i];
    const double unclipped = ratio * a;
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * a;
    out.loss += -std::min(unclipped, clipped) * inv_n;

    if (!want_grad) continue;
    // the clipped branch has zero gradient through ratio
    const bool ratio_active =
        (a >= 0.0 && ratio <= 1.0 + clip_eps) || (a < 0.0 && ratio >= 1.0 - clip_eps);
    if (!ratio_active || a == 0.0) continue;
    const double coeff = -inv_n * a * ratio;  // dL/d log_prob_new
    std::vector<double> d_mean(static_cast<std::size_t>(ad));
    for (int d = 0; d < ad; ++d) {
      const double sd = std::exp(net.log_std[static_cast<std::size_t>(d)]);
      const double diff = s.action[static_cast<std::size_t>(d)] -
                          mean[static_cast<std::size_t>(d)];
      // d lp / d mean_d = diff / sd^2 ; d lp / d log_std_d = diff^2/sd^2 - 1
      d_mean[static_cast<std::size_t>(d)] = coeff * diff / (sd * sd);
      out.grad_log_std[static_cast<std::size_t>(d)] +=
          coeff * (diff * diff / (sd * sd) - 1.0);
    }
    backward(net, acts, std::move(d_mean), out.grad_w);
  }
  return out;
}

}  // namespace

void PolicyNet::forward(std::span<const double> state, std::vector<double>& mean,
                        std::vector<double>& std_out) const {
  std::vector<std::vector<double>> acts;
  forward_cached(*this, state, acts);
  mean = acts.back();
  std_out.resize(log_std.size());
  for (std::size_t d = 0; d < log_std.size(); ++d) std_out[d] = std::exp(log_std[d]);
}

double PolicyNet::log_prob(std::span<const double> state,
                           std::span<const double> action) const {
  std::vector<double> mean, sd;
  forward(state, mean, sd);
  double lp = 0.0;
  for (std::size_t d = 0; d < sd.size(); ++d) {
    const double z = (action[d] - mean[d]) / sd[d];
    lp += -0.5 * z * z - log_std[d] - kHalfLog2Pi;
  }
  return lp;
}

PpoUpdateStats ppo_update(PolicyNet& net, std::span<const RolloutStep> rollout,
                          const PpoSettings& settings) {
  if (rollout.empty()) throw std::runtime_error("ppo_update: empty rollout");
  const std::vector<double> adv = advantages(rollout);
  const PolicyNet backup = net;
  PpoUpdateStats stats;
  for (int step = 0; step < settings.grad_steps; ++step) {
    LossGrad lg = surrogate_loss(net, rollout, adv, settings.clip_eps, true);
    bool finite = std::isfinite(lg.loss);
    for (double g : lg.grad_w) finite = finite && std::isfinite(g);
    for (double g : lg.grad_log_std) finite = finite && std::isfinite(g);
    if (!finite) {
      net = backup;
      stats.rejected = true;
      return stats;
    }
    for (std::size_t i = 0; i < net.weights.size(); ++i)
      net.weights[i] -= settings.lr * lg.grad_w[i];
    for (std::size_t d = 0; d < net.log_std.size(); ++d)
      net.log_std[d] -= settings.lr * lg.grad_log_std[d];
    net.clamp_log_std();
    stats.loss = lg.loss;
  }
  return stats;
}

double gradient_check(const PolicyNet& net, std::span<const RolloutStep> rollout,
                      double clip_eps) {
  const std::vector<double> adv = advantages(rollout);
  const LossGrad analytic = surrogate_loss(net, rollout, adv, clip_eps, true);

  PolicyNet probe = net;
  const double h = 1e-5;
  double max_rel = 0.0;
  auto probe_loss = [&]() {
    return surrogate_loss(probe, rollout, adv, clip_eps, false).loss;
  };
  auto check = [&](double& param, double g_analytic) {
    const double saved = param;
    param = saved + h;
    const double lp = probe_loss();
    param = saved - h;
    const double lm = probe_loss();
    param = saved;
    const double g_fd = (lp - lm) / (2.0 * h);
    const double rel = std::abs(g_analytic - g_fd) /
                       std::max({std::abs(g_analytic), std::abs(g_fd), 1e-6});
    max_rel = std::max(max_rel, rel);
  };
  for (std::size_t i = 0; i < probe.weights.size(); ++i)
    check(probe.weights[i], analytic.grad_w[i]);
  for (std::size_t d = 0; d < probe.log_std.size(); ++d)
    check(probe.log_std[d], analytic.grad_log_std[d]);
  return max_rel;
}

}  // namespace mtr
