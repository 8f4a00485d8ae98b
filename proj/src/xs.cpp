#include "mtr/xs.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mtr {

namespace {

constexpr double kConsistencyRelTol = 1e-9;

const char* group_name(int g) { return g == kFast ? "fast" : "thermal"; }

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void validate_material(const MaterialXs& mat) {
  auto fail = [&](const std::string& what) {
    throw XsError("material '" + mat.name + "': " + what);
  };
  if (!(mat.ref_density > 0.0)) fail("ref_density must be > 0");
  for (int g = 0; g < kGroups; ++g) {
    if (mat.sigma_t[g] < 0.0) fail(std::string("sigma_t negative in group ") + group_name(g));
    if (mat.sigma_a[g] < 0.0) fail(std::string("sigma_a negative in group ") + group_name(g));
    if (mat.nu_sigma_f[g] < 0.0) fail(std::string("nu_sigma_f negative in group ") + group_name(g));
    if (mat.chi[g] < 0.0) fail(std::string("chi negative in group ") + group_name(g));
    for (int gp = 0; gp < kGroups; ++gp)
      if (mat.sigma_s[g][gp] < 0.0) fail(std::string("sigma_s negative in group ") + group_name(g));
    const double sum = mat.sigma_a[g] + mat.sigma_s[g][0] + mat.sigma_s[g][1];
    const double scale = std::max({mat.sigma_t[g], sum, 1.0});
    if (std::abs(mat.sigma_t[g] - sum) > kConsistencyRelTol * scale) {
      std::ostringstream os;
      os << "sigma_t != sigma_a + sum(sigma_s) in group " << group_name(g)
         << " (sigma_t=" << mat.sigma_t[g] << ", sum=" << sum << ")";
      fail(os.str());
    }
  }
  if (mat.fissile()) {
    const double chi_sum = mat.chi[0] + mat.chi[1];
    if (std::abs(chi_sum - 1.0) > 1e-12)
      fail("chi must sum to 1 for fissile material");
  }
}

MaterialXs scale_to_density(const MaterialXs& mat, double density) {
  if (density < 0.0)
    throw XsError("material '" + mat.name + "': negative density " + std::to_string(density));
  const double f = density / mat.ref_density;
  MaterialXs out = mat;
  out.ref_density = density;
  for (int g = 0; g < kGroups; ++g) {
    out.sigma_t[g] = mat.sigma_t[g] * f;
    out.sigma_a[g] = mat.sigma_a[g] * f;
    out.nu_sigma_f[g] = mat.nu_sigma_f[g] * f;
    for (int gp = 0; gp < kGroups; ++gp) out.sigma_s[g][gp] = mat.sigma_s[g][gp] * f;
  }
  return out;
}

const MaterialXs& XsLibrary::at(const std::string& name) const {
  auto it = materials.find(name);
  if (it == materials.end()) throw XsError("library has no material '" + name + "'");
  return it->second;
}

namespace {

double field_number(const nlohmann::json& j, const std::string& mat,
                    const std::string& field) {
  if (!j.contains(field))
    throw XsError("material '" + mat + "': missing field '" + field + "'");
  if (!j.at(field).is_number())
    throw XsError("material '" + mat + "': field '" + field + "' is not a number");
  return j.at(field).get<double>();
}

std::array<double, kGroups> field_pair(const nlohmann::json& j, const std::string& mat,
                                       const std::string& field) {
  if (!j.contains(field))
    throw XsError("material '" + mat + "': missing field '" + field + "'");
  const auto& arr = j.at(field);
  if (!arr.is_array() || arr.size() != kGroups)
    throw XsError("material '" + mat + "': field '" + field + "' must be [fast, thermal]");
  std::array<double, kGroups> out{};
  for (int g = 0; g < kGroups; ++g) {
    if (!arr[g].is_number())
      throw XsError("material '" + mat + "': field '" + field + "' is not numeric");
    out[g] = arr[g].get<double>();
  }
  return out;
}

}  // namespace

XsLibrary parse_library(std::string_view text, std::string_view origin) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw XsError(std::string(origin) + ": not valid JSON: " + e.what());
  }
  if (!root.is_object() || !root.contains("materials") || !root.at("materials").is_object())
    throw XsError(std::string(origin) + ": expected object with a 'materials' map");

  XsLibrary lib;
  lib.groups.boundary_ev = root.value("boundary_ev", 0.6);
  if (lib.groups.boundary_ev != 0.6)
    throw XsError(std::string(origin) +
                  ": boundary_ev must be 0.6 (the fast/thermal split is fixed)");
  lib.source_digest = fnv1a64(text);

  for (const auto& [name, m] : root.at("materials").items()) {
    MaterialXs mat;
    mat.name = name;
    mat.ref_density = field_number(m, name, "ref_density");
    mat.sigma_t = field_pair(m, name, "sigma_t");
    mat.sigma_a = field_pair(m, name, "sigma_a");
    mat.nu_sigma_f = field_pair(m, name, "nu_sigma_f");
    mat.chi = field_pair(m, name, "chi");
    if (!m.contains("sigma_s") || !m.at("sigma_s").is_array() || m.at("sigma_s").size() != kGroups)
      throw XsError("material '" + name + "': field 'sigma_s' must be a 2x2 matrix");
    for (int g = 0; g < kGroups; ++g) {
      const auto& row = m.at("sigma_s")[g];
      if (!row.is_array() || row.size() != kGroups)
        throw XsError("material '" + name + "': field 'sigma_s' must be a 2x2 matrix");
      for (int gp = 0; gp < kGroups; ++gp) {
        if (!row[gp].is_number())
          throw XsError("material '" + name + "': field 'sigma_s' is not numeric");
        mat.sigma_s[g][gp] = row[gp].get<double>();
      }
    }
    validate_material(mat);
    lib.materials.emplace(name, std::move(mat));
  }
  return lib;
}

XsLibrary load_library_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw XsError("cannot open cross-section library '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  XsLibrary lib = parse_library(buf.str(), path.string());
  for (const char* required : {"fuel", "aluminum", "water", "cadmium"}) {
    if (!lib.materials.contains(required))
      throw XsError(path.string() + ": missing benchmark material '" + std::string(required) + "'");
  }
  return lib;
}

std::shared_ptr<const XsLibrary> XsCache::load(const std::filesystem::path& path) {
  const std::string key = path.string();
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    ++hit_count_;
    return it->second;
  }
  auto lib = std::make_shared<const XsLibrary>(load_library_file(path));
  ++parse_count_;
  entries_.emplace(key, lib);
  return lib;
}

std::uint64_t XsCache::parse_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return parse_count_;
}

std::uint64_t XsCache::hit_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return hit_count_;
}

std::shared_ptr<const XsLibrary> load_library(const std::filesystem::path& path,
                                              XsCache& cache) {
  return cache.load(path);
}

}  // namespace mtr
