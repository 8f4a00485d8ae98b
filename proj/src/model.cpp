#include "mtr/model.hpp"

#include <algorithm>
#include <sstream>

namespace mtr {

const char* region_name(Region r) {
  switch (r) {
    case Region::WaterGap: return "water_gap";
    case Region::SidePlate: return "side_plate";
    case Region::Clad: return "clad";
    case Region::FuelMeat: return "fuel_meat";
    case Region::WaterChannel: return "water_channel";
    case Region::Cadmium: return "cadmium";
  }
  return "?";
}

void validate_geometry(const GeometryConfig& geom) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ModelError(std::string("geometry: ") + what + " must be > 0");
  };
  if (geom.n_fuel_plates < 1) throw ModelError("geometry: n_fuel_plates must be >= 1");
  positive(geom.fuel_meat_cm, "fuel_meat_cm");
  positive(geom.clad_cm, "clad_cm");
  positive(geom.water_channel_cm, "water_channel_cm");
  positive(geom.side_plate_cm, "side_plate_cm");
  positive(geom.cadmium_cm, "cadmium_cm");
  positive(geom.water_gap_cm, "water_gap_cm");
}

ParamPoint Bounds::clip(const ParamPoint& p) const {
  return {std::clamp(p.u_density, u_min, u_max), std::clamp(p.w_density, w_min, w_max)};
}

namespace {

constexpr double kVoidSigma = 1e-10;
constexpr std::size_t kSourceCdfNodes = 8192;

void check_params(const ParamPoint& p, const Bounds& b) {
  if (!b.contains(p)) {
    std::ostringstream os;
    os << "params (U=" << p.u_density << ", W=" << p.w_density
       << ") outside bounds U:[" << b.u_min << ", " << b.u_max << "] W:[" << b.w_min
       << ", " << b.w_max << "]";
    throw ModelError(os.str());
  }
}

void refresh_kernel(LayerKernel& k, const Layer& layer) {
  for (int g = 0; g < kGroups; ++g) {
    const double st = layer.xs.sigma_t[g];
    k.sigma_t[g] = st;
    k.is_void[g] = st < kVoidSigma;
    k.inv_sigma_t[g] = k.is_void[g] ? 0.0 : 1.0 / st;
    k.p_abs[g] = k.is_void[g] ? 0.0 : layer.xs.sigma_a[g] / st;
    k.fission_yield[g] =
        layer.xs.sigma_a[g] > 0.0 ? layer.xs.nu_sigma_f[g] / layer.xs.sigma_a[g] : 0.0;
    const double row = layer.xs.sigma_s[g][0] + layer.xs.sigma_s[g][1];
    k.p_scatter_to_fast[g] = row > 0.0 ? layer.xs.sigma_s[g][0] / row : 1.0;
  }
}

// Equiprobable-node inverse CDF of a source uniform over the fuel volume;
// falls back to the whole slab when there is no fuel.
void build_source_cdf(SlabModel& model) {
  std::vector<std::pair<double, double>> spans;
  double total = 0.0;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (model.layers[i].region != Region::FuelMeat) continue;
    spans.emplace_back(model.kernels[i].x_left, model.kernels[i].x_right);
    total += model.kernels[i].x_right - model.kernels[i].x_left;
  }
  if (spans.empty()) {
    spans.emplace_back(0.0, model.total_thickness_cm);
    total = model.total_thickness_cm;
  }
  model.source_cdf.resize(kSourceCdfNodes + 1);
  std::size_t span = 0;
  double used = 0.0;  // source length consumed from spans[0..span)
  for (std::size_t n = 0; n <= kSourceCdfNodes; ++n) {
    double target = total * static_cast<double>(n) / kSourceCdfNodes;
    while (span + 1 < spans.size() &&
           target > used + (spans[span].second - spans[span].first)) {
      used += spans[span].second - spans[span].first;
      ++span;
    }
    model.source_cdf[n] = std::min(spans[span].first + (target - used), spans[span].second);
  }
}

void refresh_all_kernels(SlabModel& model) {
  model.kernels.resize(model.layers.size());
  double x = 0.0;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    model.kernels[i].x_left = x;
    x += model.layers[i].thickness_cm;
    model.kernels[i].x_right = x;
    refresh_kernel(model.kernels[i], model.layers[i]);
    if (model.layers[i].region == Region::FuelMeat)
      model.source_chi_fast = model.layers[i].xs.chi[kFast];
  }
}

}  // namespace

SlabModel build_unit_cell(const GeometryConfig& geom, const ParamPoint& params,
                          const XsLibrary& lib, const Bounds& bounds) {
  validate_geometry(geom);
  check_params(params, bounds);

  const MaterialXs fuel = scale_to_density(lib.at("fuel"), params.u_density);
  const MaterialXs water = scale_to_density(lib.at("water"), params.w_density);
  const MaterialXs& aluminum = lib.at("aluminum");
  const MaterialXs& cadmium = lib.at("cadmium");

  SlabModel model;
  model.params = params;
  model.layers.reserve(4 + static_cast<std::size_t>(geom.n_fuel_plates) * 4);

  auto add = [&](Region r, const std::string& mat_name, double t, const MaterialXs& xs) {
    model.layers.push_back(Layer{r, mat_name, t, xs});
  };

  add(Region::WaterGap, "water", geom.water_gap_cm, water);
  model.tally_layer = 0;
  add(Region::SidePlate, "aluminum", geom.side_plate_cm, aluminum);
  for (int p = 0; p < geom.n_fuel_plates; ++p) {
    add(Region::Clad, "aluminum", geom.clad_cm, aluminum);
    add(Region::FuelMeat, "fuel", geom.fuel_meat_cm, fuel);
    add(Region::Clad, "aluminum", geom.clad_cm, aluminum);
    if (p + 1 < geom.n_fuel_plates)
      add(Region::WaterChannel, "water", geom.water_channel_cm, water);
  }
  add(Region::SidePlate, "aluminum", geom.side_plate_cm, aluminum);
  add(Region::Cadmium, "cadmium", geom.cadmium_cm, cadmium);

  finalize_model(model);
  return model;
}

void finalize_model(SlabModel& model) {
  if (model.layers.empty()) throw ModelError("model has no layers");
  model.total_thickness_cm = 0.0;
  for (const Layer& l : model.layers) model.total_thickness_cm += l.thickness_cm;
  refresh_all_kernels(model);
  build_source_cdf(model);
}

void update_densities(SlabModel& model, const ParamPoint& params,
                      const XsLibrary& lib, const Bounds& bounds) {
  check_params(params, bounds);
  const MaterialXs fuel = scale_to_density(lib.at("fuel"), params.u_density);
  const MaterialXs water = scale_to_density(lib.at("water"), params.w_density);
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    Layer& l = model.layers[i];
    switch (l.region) {
      case Region::FuelMeat: l.xs = fuel; break;
      case Region::WaterGap:
      case Region::WaterChannel: l.xs = water; break;
      default: continue;  // aluminum and cadmium are never touched
    }
    refresh_kernel(model.kernels[i], l);
  }
  model.params = params;
}

}  // namespace mtr
