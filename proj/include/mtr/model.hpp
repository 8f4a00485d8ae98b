#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mtr/xs.hpp"

namespace mtr {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// MTR unit-cell layer thicknesses in cm. Defaults are representative
// plate-fuel dimensions; the acceptance tests pin the behavior of these
// shipped values only.
struct GeometryConfig {
  int n_fuel_plates = 3;
  double fuel_meat_cm = 0.07;
  double clad_cm = 0.04;
  double water_channel_cm = 0.30;
  double side_plate_cm = 0.50;
  double cadmium_cm = 0.10;
  double water_gap_cm = 1.00;

  bool operator==(const GeometryConfig&) const = default;
};

void validate_geometry(const GeometryConfig& geom);

// The two free parameters of the benchmark: fuel meat density and the
// density shared by all water regions (channels and tally gap).
struct ParamPoint {
  double u_density = 0.0;  // g/cc
  double w_density = 0.0;  // g/cc

  bool operator==(const ParamPoint&) const = default;
};

struct Bounds {
  double u_min = 0.1, u_max = 19.0;
  double w_min = 0.001, w_max = 25.0;

  bool contains(const ParamPoint& p) const {
    return p.u_density >= u_min && p.u_density <= u_max &&
           p.w_density >= w_min && p.w_density <= w_max;
  }
  ParamPoint clip(const ParamPoint& p) const;
  ParamPoint center() const { return {0.5 * (u_min + u_max), 0.5 * (w_min + w_max)}; }

  bool operator==(const Bounds&) const = default;
};

enum class Region { WaterGap, SidePlate, Clad, FuelMeat, WaterChannel, Cadmium };

const char* region_name(Region r);

struct Layer {
  Region region;
  std::string material;
  double thickness_cm = 0.0;
  MaterialXs xs;  // scaled to the layer's current density

  bool operator==(const Layer&) const = default;
};

// Per-layer, per-group quantities the tracking loop consumes, derived from
// the layer cross sections when the model is built or updated.
struct LayerKernel {
  double x_left = 0.0, x_right = 0.0;
  std::array<double, kGroups> sigma_t{};
  std::array<double, kGroups> inv_sigma_t{};
  std::array<double, kGroups> p_abs{};              // sigma_a / sigma_t
  std::array<double, kGroups> fission_yield{};      // nu_sigma_f / sigma_a
  std::array<double, kGroups> p_scatter_to_fast{};  // row-normalized sigma_s
  std::array<bool, kGroups> is_void{};

  bool operator==(const LayerKernel&) const = default;
};

// 1-D slab with reflective boundaries at both ends. Layer order:
// [gap][side plate][{clad, fuel, clad, channel} x n, last channel omitted]
// [side plate][cadmium], so the tally gap sits opposite the cadmium plate.
//
// Building a model also derives everything the transport loop needs: the
// per-layer kernels and an inverse-CDF table for sampling the initial
// source uniformly over the fuel. update_densities refreshes only the
// kernels of fuel and water layers; geometry-derived data is untouched.
struct SlabModel {
  std::vector<Layer> layers;
  std::size_t tally_layer = 0;  // index of the water gap
  double total_thickness_cm = 0.0;
  ParamPoint params;
  std::vector<LayerKernel> kernels;
  std::vector<double> source_cdf;  // equiprobable source positions over fuel
  double source_chi_fast = 1.0;

  bool operator==(const SlabModel&) const = default;
};

SlabModel build_unit_cell(const GeometryConfig& geom, const ParamPoint& params,
                          const XsLibrary& lib, const Bounds& bounds = Bounds{});

// Recomputes total thickness, layer kernels and the source table from
// model.layers. build_unit_cell calls this; hand-assembled models (single
// material slabs in the verification suite) need it before transport.
void finalize_model(SlabModel& model);

// Replaces only the fuel and water layer cross sections; geometry, layer
// order and tally region stay untouched. The result is bit-identical to a
// fresh build_unit_cell with the same parameters.
void update_densities(SlabModel& model, const ParamPoint& params,
                      const XsLibrary& lib, const Bounds& bounds = Bounds{});

}  // namespace mtr
