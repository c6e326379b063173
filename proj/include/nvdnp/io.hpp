#pragma once

// Result serialization: CSV traces and angle curves (17 significant digits,
// LF endings, '#' provenance line), JSON records of baths, and SHA-256
// digests used to tie every output to its configuration.

#include "nvdnp/bath.hpp"
#include "nvdnp/instrument.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nvdnp {

/// Hex SHA-256 of `text`.
std::string sha256_hex(const std::string& text);

/// "%.17g"
std::string format_17(double value);

struct TraceRow {
  std::size_t cycle = 0;
  double time_ms = 0.0;
  double bulk = 0.0;
  double frozen_core = 0.0;
};

/// cycle,time_ms,bulk_polarization,frozen_core_polarization
std::string trace_csv(const std::vector<TraceRow>& rows, const std::string& config_hash);

/// theta_deg,enhancement_mean,enhancement_stderr,n_samples
std::string angle_csv(const std::vector<AngleSweepPoint>& points, const std::string& config_hash);

/// Positions (nm), couplings (MHz), seed, radius, abundance, NV axis, core
/// threshold and members.
nlohmann::ordered_json bath_to_json(const BathSample& bath);

/// Inverse of bath_to_json. Throws std::invalid_argument on malformed input.
BathSample bath_from_json(const nlohmann::ordered_json& j);

}  // namespace nvdnp
