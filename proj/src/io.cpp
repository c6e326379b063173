#include "nvdnp/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace nvdnp {

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256_hex: digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string format_17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trace_csv(const std::vector<TraceRow>& rows, const std::string& config_hash) {
  std::string out = "# config_sha256=" + config_hash + "\n";
  out += "cycle,time_ms,bulk_polarization,frozen_core_polarization\n";
  for (const auto& r : rows) {
    out += std::to_string(r.cycle) + "," + format_17(r.time_ms) + "," + format_17(r.bulk) + "," +
           format_17(r.frozen_core) + "\n";
  }
  return out;
}

std::string angle_csv(const std::vector<AngleSweepPoint>& points, const std::string& config_hash) {
  std::string out = "# config_sha256=" + config_hash + "\n";
  out += "theta_deg,enhancement_mean,enhancement_stderr,n_samples\n";
  for (const auto& p : points) {
    out += format_17(p.theta * 180.0 / std::numbers::pi) + "," + format_17(p.enhancement_mean) + "," +
           format_17(p.enhancement_stderr) + "," + std::to_string(p.n_samples) + "\n";
  }
  return out;
}

nlohmann::ordered_json bath_to_json(const BathSample& bath) {
  nlohmann::ordered_json j;
  j["seed"] = bath.seed;
  j["radius_nm"] = bath.radius;
  j["abundance"] = bath.abundance;
  j["nv_axis"] = {bath.nv_axis.x(), bath.nv_axis.y(), bath.nv_axis.z()};
  j["core_threshold_mhz"] = bath.core_threshold;
  j["frozen_core_members"] = bath.frozen_core_members;
  auto spins = nlohmann::ordered_json::array();
  for (const auto& s : bath.spins) {
    spins.push_back({{"position_nm", {s.position.x(), s.position.y(), s.position.z()}},
                     {"a_z_mhz", s.a_z},
                     {"a_x_mhz", s.a_x}});
  }
  j["spins"] = std::move(spins);
  return j;
}

BathSample bath_from_json(const nlohmann::ordered_json& j) {
  const auto vec3 = [](const nlohmann::ordered_json& v) {
    if (!v.is_array() || v.size() != 3) throw std::invalid_argument("bath_from_json: expected a 3-vector");
    return Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  };
  try {
    BathSample bath;
    bath.seed = j.at("seed").get<std::uint64_t>();
    bath.radius = j.at("radius_nm").get<double>();
    bath.abundance = j.at("abundance").get<double>();
    bath.nv_axis = vec3(j.at("nv_axis"));
    bath.core_threshold = j.at("core_threshold_mhz").get<double>();
    bath.frozen_core_members = j.at("frozen_core_members").get<std::vector<std::size_t>>();
    for (const auto& s : j.at("spins")) {
      bath.spins.push_back({vec3(s.at("position_nm")), s.at("a_z_mhz").get<double>(), s.at("a_x_mhz").get<double>()});
    }
    for (auto i : bath.frozen_core_members) {
      if (i >= bath.spins.size()) throw std::invalid_argument("bath_from_json: core member out of range");
    }
    return bath;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bath_from_json: ") + e.what());
  }
}

}  // namespace nvdnp
