#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "mtr/objective.hpp"

namespace mtr {

struct LandscapeCell {
  double u = 0.0, w = 0.0;
  double k = 0.0, k_std = 0.0;
  double flux = 0.0, flux_std = 0.0;
  double fitness = 0.0;
  bool ok = true;
};

// Full-bounds rectilinear map, row-major in (u, w): cell(iu, iw) at
// cells[iu * w_grid.size() + iw].
struct LandscapeMap {
  std::vector<double> u_grid;
  std::vector<double> w_grid;
  std::vector<LandscapeCell> cells;

  const LandscapeCell& at(std::size_t iu, std::size_t iw) const {
    return cells[iu * w_grid.size() + iw];
  }
};

LandscapeMap grid_scan(const GeometryConfig& geom, const Bounds& bounds, int n_u,
                       int n_w, const XsLibrary& lib, const McConfig& mc,
                       const ObjectiveConfig& obj, int threads = 1);

struct CriticalComponent {
  std::vector<std::size_t> cell_ids;
  std::size_t best_cell = 0;  // min-fitness cell of the component
  double u_min = 0.0, u_max = 0.0;
  double w_min = 0.0, w_max = 0.0;
};

struct CriticalRegionReport {
  double tolerance = 0.0;
  int component_count = 0;
  std::vector<CriticalComponent> components;  // sorted by ascending w_min
};

// Marks cells with |k - 1| <= tol and groups them into 4-connected
// components on the (u, w) grid. Failed cells are excluded.
CriticalRegionReport critical_regions(const LandscapeMap& map, double tol);

// Midpoint in W between the two basins (max W of the low-W component and
// min W of the high-W one). Requires component_count >= 2.
double basin_split_w(const CriticalRegionReport& report);

void write_map_csv(const LandscapeMap& map, const std::filesystem::path& path);
LandscapeMap read_map_csv(const std::filesystem::path& path);

enum class MapField { Fitness, FastFlux, K };

// Self-contained SVG heatmap. Log color scale for flux, linear for k and
// fitness. Cells with |k - 1| <= crit_tol get circular markers; optional
// sampled-history overlay draws one cross per evaluation.
void render_heatmap(const LandscapeMap& map, MapField field,
                    const std::filesystem::path& out,
                    const std::vector<Evaluation>* overlay = nullptr,
                    double crit_tol = 0.05);

}  // namespace mtr
