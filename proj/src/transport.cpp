#include "mtr/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtr/rng.hpp"

namespace mtr {

namespace {

constexpr double kVoidSigma = 1e-10;
constexpr double kMuEps = 1e-14;
constexpr long kMaxEventsPerHistory = 2'000'000;

// A group that particles can reach must have a collision somewhere in the
// slab, otherwise streaming never terminates.
void check_degenerate(const SlabModel& model) {
  double optical[kGroups] = {0.0, 0.0};
  bool thermal_reachable = false;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    for (int g = 0; g < kGroups; ++g) optical[g] += l.xs.sigma_t[g] * l.thickness_cm;
    if (l.xs.sigma_s[kFast][kThermal] > 0.0) thermal_reachable = true;
    if (l.xs.chi[kThermal] > 0.0 && l.xs.fissile()) thermal_reachable = true;
  }
  if (optical[kFast] < kVoidSigma)
    throw TransportError("degenerate medium: fast group has zero total cross section everywhere");
  if (thermal_reachable && optical[kThermal] < kVoidSigma)
    throw TransportError("degenerate medium: thermal group reachable but void everywhere");
}

struct HistoryResult {
  double tally_fast = 0.0;
  double tally_thermal = 0.0;
};

// Tracks one history to absorption; fission sites are appended to `sites`.
HistoryResult track_history(const SlabModel& model, double x0, Rng& rng,
                            std::vector<double>& sites) {
  HistoryResult res;
  const std::vector<LayerKernel>& kernels = model.kernels;
  double x = x0;
  double mu = rng.uniform(-1.0, 1.0);
  int group = rng.uniform() < model.source_chi_fast ? kFast : kThermal;

  std::size_t li = 0;
  while (li + 1 < kernels.size() && x >= kernels[li].x_right) ++li;

  const std::size_t last = kernels.size() - 1;
  const std::size_t tally = model.tally_layer;
  long events = 0;
  for (;;) {
    if (++events > kMaxEventsPerHistory)
      throw TransportError("history exceeded event budget (degenerate medium?)");
    const LayerKernel& L = kernels[li];

    // distance (3-D path length) to the layer edge along the flight
    double d_edge;
    bool to_right;
    if (mu > kMuEps) {
      d_edge = (L.x_right - x) / mu;
      to_right = true;
    } else if (mu < -kMuEps) {
      d_edge = (L.x_left - x) / mu;
      to_right = false;
    } else {
      d_edge = std::numeric_limits<double>::infinity();
      to_right = false;
    }

    double d_coll = std::numeric_limits<double>::infinity();
    if (!L.is_void[group])
      d_coll = -std::log(1.0 - rng.uniform()) * L.inv_sigma_t[group];

    if (d_coll < d_edge) {
      // collide inside this layer
      if (li == tally) {
        if (group == kFast) res.tally_fast += d_coll;
        else res.tally_thermal += d_coll;
      }
      x += d_coll * mu;
      if (rng.uniform() < L.p_abs[group]) {
        // absorption; implicit fission production with stochastic rounding
        const double yield = L.fission_yield[group];
        if (yield > 0.0) {
          int n = static_cast<int>(yield);
          if (rng.uniform() < yield - n) ++n;
          for (int i = 0; i < n; ++i) sites.push_back(x);
        }
        return res;
      }
      // scatter: sample outgoing group, isotropic direction
      group = rng.uniform() < L.p_scatter_to_fast[group] ? kFast : kThermal;
      mu = rng.uniform(-1.0, 1.0);
      continue;
    }

    // stream to the layer edge
    if (li == tally && std::isfinite(d_edge)) {
      if (group == kFast) res.tally_fast += d_edge;
      else res.tally_thermal += d_edge;
    }
    if (to_right) {
      x = L.x_right;
      if (li == last) mu = -mu;  // reflective boundary
      else ++li;
    } else {
      x = L.x_left;
      if (li == 0) mu = -mu;
      else --li;
    }
  }
}

// O(1) inverse-CDF draw from the model's precomputed source table.
double sample_source_x(const SlabModel& model, Rng& rng) {
  const std::vector<double>& cdf = model.source_cdf;
  const double u = rng.uniform() * static_cast<double>(cdf.size() - 1);
  const auto node = std::min(static_cast<std::size_t>(u), cdf.size() - 2);
  const double frac = u - static_cast<double>(node);
  return cdf[node] + frac * (cdf[node + 1] - cdf[node]);
}

}  // namespace

void validate_mc(const McConfig& cfg) {
  if (cfg.particles_per_batch < 100)
    throw TransportError("McConfig: particles_per_batch must be >= 100");
  if (cfg.n_inactive < 1) throw TransportError("McConfig: n_inactive must be >= 1");
  if (cfg.n_batches <= cfg.n_inactive)
    throw TransportError("McConfig: n_batches must exceed n_inactive");
}

double kinf_analytic(const MaterialXs& mat) {
  validate_material(mat);
  if (!(mat.chi[kFast] == 1.0 && mat.chi[kThermal] == 0.0) && mat.fissile())
    throw TransportError("kinf_analytic requires chi == (1, 0)");
  if (mat.sigma_s[kThermal][kFast] != 0.0)
    throw TransportError("kinf_analytic requires no upscatter");
  const double s12 = mat.sigma_s[kFast][kThermal];
  const double a1 = mat.sigma_a[kFast];
  const double a2 = mat.sigma_a[kThermal];
  if (a2 == 0.0 && s12 > 0.0)
    throw TransportError("degenerate medium: thermal absorption zero with downscatter present");
  const double thermal_production = s12 > 0.0 ? mat.nu_sigma_f[kThermal] * s12 / a2 : 0.0;
  const double removal = a1 + s12;
  if (removal == 0.0) return 0.0;
  return (mat.nu_sigma_f[kFast] + thermal_production) / removal;
}

double shannon_entropy(std::span<const double> site_x, int n_bins, double x_min,
                       double x_max) {
  if (site_x.empty() || n_bins < 1 || !(x_max > x_min)) return 0.0;
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);
  const double inv_w = n_bins / (x_max - x_min);
  for (double x : site_x) {
    auto b = static_cast<long>((x - x_min) * inv_w);
    b = std::clamp<long>(b, 0, n_bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double n = static_cast<double>(site_x.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

RunResult run_keig(const SlabModel& model, const McConfig& cfg,
                   std::vector<BatchDiag>* diag) {
  validate_mc(cfg);
  if (model.kernels.size() != model.layers.size() || model.source_cdf.size() < 2)
    throw TransportError("model has no derived kernels (was it built by build_unit_cell?)");
  check_degenerate(model);
  const int n = cfg.particles_per_batch;
  const double tally_volume =
      model.layers[model.tally_layer].thickness_cm;  // per unit area

  // initial source: uniform over the fuel layers
  std::vector<double> source(static_cast<std::size_t>(n));
  {
    Rng src_rng(stream_seed(cfg.seed, 0x5af3u, 0, 0));
    for (int i = 0; i < n; ++i)
      source[static_cast<std::size_t>(i)] = sample_source_x(model, src_rng);
  }

  std::vector<double> bank;
  std::vector<std::vector<double>> history_sites(static_cast<std::size_t>(n));
  std::vector<double> k_hist, fast_hist, thermal_hist;
  k_hist.reserve(static_cast<std::size_t>(cfg.n_batches));

  for (int b = 0; b < cfg.n_batches; ++b) {
    double fast_sum = 0.0, thermal_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      auto& sites = history_sites[static_cast<std::size_t>(i)];
      sites.clear();
      Rng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(b) + 1,
                          static_cast<std::uint64_t>(i), 0x7a11u));
      const HistoryResult hr =
          track_history(model, source[static_cast<std::size_t>(i)], rng, sites);
      fast_sum += hr.tally_fast;
      thermal_sum += hr.tally_thermal;
    }
    // deterministic reduction in particle-index order
    bank.clear();
    for (int i = 0; i < n; ++i)
      bank.insert(bank.end(), history_sites[static_cast<std::size_t>(i)].begin(),
                  history_sites[static_cast<std::size_t>(i)].end());

    const double k_batch = static_cast<double>(bank.size()) / n;
    if (b >= cfg.n_inactive) {
      k_hist.push_back(k_batch);
      fast_hist.push_back(fast_sum / (tally_volume * n));
      thermal_hist.push_back(thermal_sum / (tally_volume * n));
    }
    if (diag) {
      diag->push_back(BatchDiag{b, k_batch,
                                shannon_entropy(bank, 32, 0.0, model.total_thickness_cm),
                                bank.size()});
    }
    if (bank.empty()) break;  // source extinction: nothing left to transport

    // resample exactly n sites from the bank, with replacement
    Rng resample_rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(b) + 1, 0xba2cu, 0));
    for (int i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(resample_rng.uniform() *
                                              static_cast<double>(bank.size()));
      source[static_cast<std::size_t>(i)] = bank[std::min(j, bank.size() - 1)];
    }
  }

  RunResult out;
  out.batches_used = static_cast<int>(k_hist.size());
  auto mean_std = [](const std::vector<double>& v, double& mean, double& std_err) {
    mean = 0.0;
    std_err = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std_err = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                        static_cast<double>(v.size()));
  };
  mean_std(k_hist, out.k_mean, out.k_std);
  double dummy = 0.0;
  mean_std(fast_hist, out.fast_flux, out.fast_flux_std);
  mean_std(thermal_hist, out.thermal_flux, dummy);
  return out;
}

}  // namespace mtr
