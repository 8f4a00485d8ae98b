#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtr {

// Group indexing used everywhere in the project: 0 = fast (above the
// boundary energy), 1 = thermal.
inline constexpr int kFast = 0;
inline constexpr int kThermal = 1;
inline constexpr int kGroups = 2;

struct XsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroupStructure {
  int n_groups = 2;
  double boundary_ev = 0.6;
};

// Two-group macroscopic cross sections for one material at a reference
// mass density. All values in 1/cm.
struct MaterialXs {
  std::string name;
  double ref_density = 0.0;                       // g/cc
  std::array<double, kGroups> sigma_t{};          // total
  std::array<double, kGroups> sigma_a{};          // absorption
  std::array<double, kGroups> nu_sigma_f{};       // fission production
  std::array<std::array<double, kGroups>, kGroups> sigma_s{};  // g -> g'
  std::array<double, kGroups> chi{};              // fission spectrum

  bool fissile() const { return nu_sigma_f[kFast] > 0.0 || nu_sigma_f[kThermal] > 0.0; }

  bool operator==(const MaterialXs&) const = default;
};

// Validates the internal consistency of one material; throws XsError with
// the material name and offending field/group in the message.
void validate_material(const MaterialXs& mat);

// Linear density scaling of all macroscopic cross sections. The returned
// material has ref_density == density.
MaterialXs scale_to_density(const MaterialXs& mat, double density);

struct XsLibrary {
  GroupStructure groups;
  std::map<std::string, MaterialXs> materials;
  std::uint64_t source_digest = 0;  // FNV-1a of the file bytes

  const MaterialXs& at(const std::string& name) const;
};

// Parses a library from JSON text; `origin` is used in error messages.
// Checks every material's consistency invariants.
XsLibrary parse_library(std::string_view text, std::string_view origin);

// Reads, digests and parses a library file. Requires the four benchmark
// materials (fuel, aluminum, water, cadmium) to be present.
XsLibrary load_library_file(const std::filesystem::path& path);

// In-memory library cache keyed by path. Concurrent loads of the same path
// result in exactly one parse.
class XsCache {
 public:
  std::shared_ptr<const XsLibrary> load(const std::filesystem::path& path);

  std::uint64_t parse_count() const;
  std::uint64_t hit_count() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const XsLibrary>> entries_;
  std::uint64_t parse_count_ = 0;
  std::uint64_t hit_count_ = 0;
};

// Cache-aware load: first call for a path parses the file, later calls
// return the cached library.
std::shared_ptr<const XsLibrary> load_library(const std::filesystem::path& path,
                                              XsCache& cache);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mtr
