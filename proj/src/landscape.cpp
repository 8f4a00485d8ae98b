#include "mtr/landscape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include "mtr/fmt.hpp"

namespace mtr {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + i * h;
  v.back() = hi;
  return v;
}

}  // namespace

LandscapeMap grid_scan(const GeometryConfig& geom, const Bounds& bounds, int n_u,
                       int n_w, const XsLibrary& lib, const McConfig& mc,
                       const ObjectiveConfig& obj, int threads) {
  if (n_u < 2 || n_w < 2) throw std::runtime_error("grid_scan: resolution must be >= 2x2");
  LandscapeMap map;
  map.u_grid = linspace(bounds.u_min, bounds.u_max, n_u);
  map.w_grid = linspace(bounds.w_min, bounds.w_max, n_w);
  map.cells.resize(static_cast<std::size_t>(n_u) * static_cast<std::size_t>(n_w));

  const std::size_t total = map.cells.size();
  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(1, threads);

  auto worker = [&]() {
    Evaluator eval(geom, bounds, lib, mc, obj);
    for (;;) {
      const std::size_t id = next.fetch_add(1);
      if (id >= total) return;
      const std::size_t iu = id / static_cast<std::size_t>(n_w);
      const std::size_t iw = id % static_cast<std::size_t>(n_w);
      LandscapeCell& cell = map.cells[id];
      cell.u = map.u_grid[iu];
      cell.w = map.w_grid[iw];
      try {
        // eval_index == cell id gives every cell its deterministic seed
        McConfig cell_mc = mc;
        cell_mc.seed = evaluation_seed(mc.seed, id);
        SlabModel model = build_unit_cell(geom, {cell.u, cell.w}, lib, bounds);
        const RunResult rr = run_keig(model, cell_mc);
        cell.k = rr.k_mean;
        cell.k_std = rr.k_std;
        cell.flux = rr.fast_flux;
        cell.flux_std = rr.fast_flux_std;
        cell.fitness = fitness(rr.k_mean, rr.fast_flux, obj);
        cell.ok = true;
      } catch (const std::exception&) {
        cell.ok = false;
      }
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return map;
}

CriticalRegionReport critical_regions(const LandscapeMap& map, double tol) {
  const std::size_t nu = map.u_grid.size();
  const std::size_t nw = map.w_grid.size();
  CriticalRegionReport report;
  report.tolerance = tol;

  std::vector<char> critical(map.cells.size(), 0);
  for (std::size_t i = 0; i < map.cells.size(); ++i)
    critical[i] = map.cells[i].ok && std::abs(map.cells[i].k - 1.0) <= tol;

  std::vector<int> label(map.cells.size(), -1);
  for (std::size_t start = 0; start < map.cells.size(); ++start) {
    if (!critical[start] || label[start] >= 0) continue;
    CriticalComponent comp;
    const int id = static_cast<int>(report.components.size());
    std::deque<std::size_t> queue{start};
    label[start] = id;
    while (!queue.empty()) {
      const std::size_t c = queue.front();
      queue.pop_front();
      comp.cell_ids.push_back(c);
      const std::size_t iu = c / nw, iw = c % nw;
      const std::size_t nbrs[4] = {
          iu > 0 ? c - nw : c, iu + 1 < nu ? c + nw : c,
          iw > 0 ? c - 1 : c, iw + 1 < nw ? c + 1 : c};
      for (std::size_t nb : nbrs) {
        if (nb == c || !critical[nb] || label[nb] >= 0) continue;
        label[nb] = id;
        queue.push_back(nb);
      }
    }
    std::sort(comp.cell_ids.begin(), comp.cell_ids.end());
    comp.best_cell = comp.cell_ids.front();
    comp.u_min = comp.u_max = map.cells[comp.best_cell].u;
    comp.w_min = comp.w_max = map.cells[comp.best_cell].w;
    for (std::size_t c : comp.cell_ids) {
      const LandscapeCell& cell = map.cells[c];
      if (cell.fitness < map.cells[comp.best_cell].fitness) comp.best_cell = c;
      comp.u_min = std::min(comp.u_min, cell.u);
      comp.u_max = std::max(comp.u_max, cell.u);
      comp.w_min = std::min(comp.w_min, cell.w);
      comp.w_max = std::max(comp.w_max, cell.w);
    }
    report.components.push_back(std::move(comp));
  }
  std::sort(report.components.begin(), report.components.end(),
            [](const CriticalComponent& a, const CriticalComponent& b) {
              return a.w_min < b.w_min;
            });
  report.component_count = static_cast<int>(report.components.size());
  return report;
}

double basin_split_w(const CriticalRegionReport& report) {
  if (report.component_count < 2)
    throw std::runtime_error("basin_split_w: need at least two critical components");
  const CriticalComponent& low = report.components.front();
  const CriticalComponent& high = report.components.back();
  return 0.5 * (low.w_max + high.w_min);
}

void write_map_csv(const LandscapeMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "u,w,k,k_std,flux,flux_std,fitness\n";
  for (const LandscapeCell& c : map.cells) {
    out << format_double(c.u) << ',' << format_double(c.w) << ',' << format_double(c.k)
        << ',' << format_double(c.k_std) << ',' << format_double(c.flux) << ','
        << format_double(c.flux_std) << ',' << format_double(c.fitness) << '\n';
  }
}

LandscapeMap read_map_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("u,w,k", 0) != 0)
    throw std::runtime_error(path.string() + ": not a landscape CSV");

  LandscapeMap map;
  std::vector<LandscapeCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LandscapeCell c;
    std::istringstream ss(line);
    char comma;
    if (!(ss >> c.u >> comma >> c.w >> comma >> c.k >> comma >> c.k_std >> comma >>
          c.flux >> comma >> c.flux_std >> comma >> c.fitness))
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    cells.push_back(c);
  }
  // reconstruct the grids from the row-major cell order
  for (const LandscapeCell& c : cells) {
    if (map.w_grid.empty() || c.w > map.w_grid.back())
      map.w_grid.push_back(c.w);
    else
      break;
  }
  const std::size_t nw = map.w_grid.size();
  if (nw == 0 || cells.size() % nw != 0)
    throw std::runtime_error(path.string() + ": grid shape is inconsistent");
  for (std::size_t i = 0; i < cells.size(); i += nw) map.u_grid.push_back(cells[i].u);
  map.cells = std::move(cells);
  return map;
}

namespace {

// five-stop blue->yellow colormap
void colormap(double t, int& r, int& g, int& b) {
  static const double stops[5][3] = {{68, 1, 84},     {59, 82, 139},  {33, 145, 140},
                                     {94, 201, 98},   {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  r = static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]));
  g = static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]));
  b = static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]));
}

double field_value(const LandscapeCell& c, MapField f) {
  switch (f) {
    case MapField::Fitness: return c.fitness;
    case MapField::FastFlux: return c.flux;
    case MapField::K: return c.k;
  }
  return 0.0;
}

}  // namespace

void render_heatmap(const LandscapeMap& map, MapField field,
                    const std::filesystem::path& out,
                    const std::vector<Evaluation>* overlay, double crit_tol) {
  const std::size_t nu = map.u_grid.size();
  const std::size_t nw = map.w_grid.size();
  const double cell_px = std::max(4.0, 640.0 / static_cast<double>(std::max(nu, nw)));
  const double margin = 40.0;
  const double width = margin * 2 + cell_px * static_cast<double>(nw);
  const double height = margin * 2 + cell_px * static_cast<double>(nu);

  const bool log_scale = field == MapField::FastFlux;
  double lo = 0.0, hi = 1.0;
  bool first = true;
  for (const LandscapeCell& c : map.cells) {
    if (!c.ok) continue;
    double v = field_value(c, field);
    if (log_scale) v = std::log10(std::max(v, 1e-12));
    if (first) {
      lo = hi = v;
      first = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;

  std::ofstream svg(out, std::ios::binary);
  if (!svg) throw std::runtime_error("cannot write " + out.string());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width)
      << "\" height=\"" << format_double(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // u along the vertical axis (low at the bottom), w along the horizontal
  auto cx = [&](std::size_t iw) { return margin + cell_px * static_cast<double>(iw); };
  auto cy = [&](std::size_t iu) {
    return height - margin - cell_px * static_cast<double>(iu + 1);
  };

  for (std::size_t iu = 0; iu < nu; ++iu) {
    for (std::size_t iw = 0; iw < nw; ++iw) {
      const LandscapeCell& c = map.at(iu, iw);
      int r = 128, g = 128, b = 128;
      if (c.ok) {
        double v = field_value(c, field);
        if (log_scale) v = std::log10(std::max(v, 1e-12));
        colormap((v - lo) / (hi - lo), r, g, b);
      }
      svg << "<rect x=\"" << format_double(cx(iw)) << "\" y=\"" << format_double(cy(iu))
          << "\" width=\"" << format_double(cell_px) << "\" height=\""
          << format_double(cell_px) << "\" fill=\"rgb(" << r << ',' << g << ',' << b
          << ")\"/>\n";
    }
  }
  // criticality markers (the "red circles")
  for (std::size_t iu = 0; iu < nu; ++iu) {
    for (std::size_t iw = 0; iw < nw; ++iw) {
      const LandscapeCell& c = map.at(iu, iw);
      if (!c.ok || std::abs(c.k - 1.0) > crit_tol) continue;
      svg << "<circle cx=\"" << format_double(cx(iw) + 0.5 * cell_px) << "\" cy=\""
          << format_double(cy(iu) + 0.5 * cell_px) << "\" r=\""
          << format_double(0.3 * cell_px)
          << "\" fill=\"none\" stroke=\"red\" stroke-width=\"1\"/>\n";
    }
  }
  if (overlay) {
    const double u0 = map.u_grid.front(), u1 = map.u_grid.back();
    const double w0 = map.w_grid.front(), w1 = map.w_grid.back();
    const double plot_w = cell_px * static_cast<double>(nw);
    const double plot_h = cell_px * static_cast<double>(nu);
    for (const Evaluation& ev : *overlay) {
      const double px = margin + (ev.params.w_density - w0) / (w1 - w0) * plot_w;
      const double py = height - margin - (ev.params.u_density - u0) / (u1 - u0) * plot_h;
      const double s = 2.5;
      svg << "<path d=\"M" << format_double(px - s) << ' ' << format_double(py - s)
          << " L" << format_double(px + s) << ' ' << format_double(py + s) << " M"
          << format_double(px - s) << ' ' << format_double(py + s) << " L"
          << format_double(px + s) << ' ' << format_double(py - s)
          << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
  }
  svg << "<text x=\"" << format_double(margin) << "\" y=\"20\" font-size=\"13\">"
      << (field == MapField::Fitness ? "fitness"
          : field == MapField::FastFlux ? "fast flux (log color)" : "k")
      << ", U vertical [" << format_double(map.u_grid.front()) << ", "
      << format_double(map.u_grid.back()) << "] g/cc, W horizontal ["
      << format_double(map.w_grid.front()) << ", " << format_double(map.w_grid.back())
      << "] g/cc</text>\n";
  svg << "</svg>\n";
}

}  // namespace mtr
