#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtr/model.hpp"

namespace mtr {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct McConfig {
  int particles_per_batch = 2000;
  int n_batches = 60;
  int n_inactive = 10;
  std::uint64_t seed = 1;

  bool operator==(const McConfig&) const = default;
};

void validate_mc(const McConfig& cfg);

struct RunResult {
  double k_mean = 0.0;
  double k_std = 0.0;        // standard error over active batches
  double fast_flux = 0.0;    // track-length flux in the tally gap, per source neutron
  double fast_flux_std = 0.0;
  double thermal_flux = 0.0;
  int batches_used = 0;

  bool operator==(const RunResult&) const = default;
};

struct BatchDiag {
  int batch = 0;
  double k = 0.0;
  double entropy = 0.0;  // Shannon source entropy, bits
  std::size_t bank_size = 0;
};

// Two-group Monte Carlo k-eigenvalue power iteration over the slab model.
// Deterministic for a fixed (model, cfg): every particle owns an RNG stream
// derived from (seed, batch, particle index). When `diag` is given, one
// entry per batch is appended.
RunResult run_keig(const SlabModel& model, const McConfig& cfg,
                   std::vector<BatchDiag>* diag = nullptr);

// Exact two-group infinite-medium multiplication factor for a single
// consistent material with chi == (1, 0) and no upscatter:
//   k_inf = (nu_sigma_f1 + nu_sigma_f2 * s12 / sigma_a2) / (sigma_a1 + s12)
double kinf_analytic(const MaterialXs& mat);

// Shannon entropy (bits) of site positions binned uniformly over
// [x_min, x_max].
double shannon_entropy(std::span<const double> site_x, int n_bins, double x_min,
                       double x_max);

}  // namespace mtr
