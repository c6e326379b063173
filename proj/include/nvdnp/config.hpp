#pragma once

// Run configuration for the command-line driver: a flat key = value file
// with '#' comments. Every key, its unit and its default live in one table
// (config_keys()), which also drives print-defaults and the config hash.

#include "nvdnp/hamiltonian.hpp"
#include "nvdnp/instrument.hpp"
#include "nvdnp/protocols.hpp"

#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvdnp {

enum class ProtocolKind { novel, ise };

struct RunConfig {
  ProtocolKind protocol = ProtocolKind::ise;

  // Spin system
  double zfs_mhz = constants::zero_field_splitting;
  double gamma_e_mhz_per_t = constants::gamma_e;
  double gamma_n_mhz_per_t = constants::gamma_13c;
  double field_t = constants::default_field;
  double theta_deg = 0.0;
  double hyperfine_shift_scale = 0.5;

  // ISE sweep; the centre sits sweep_offset_mhz above the aligned line
  double ise_rabi_mhz = 1.0;
  double sweep_rate_mhz_per_us = 0.3;
  double sweep_range_mhz = 100.0;
  double sweep_offset_mhz = 44.0;
  bool sweep_downward = false;

  // NOVEL spin lock
  double lock_rabi_mhz = 4.87;
  double lock_duration_ms = 0.2;
  double t1rho_ms = 0.465;

  // Instrument; the resonator centre is relative to the aligned line
  double resonator_hwhm_mhz = 100.0;
  double resonator_offset_mhz = 0.0;
  ResonatorShape resonator_shape = ResonatorShape::amplitude;
  double reset_fidelity = 0.96;
  double pump_rate_khz = 1.0;

  // Bath and diffusion
  std::size_t bath_spins = 500;
  double abundance = constants::natural_abundance_13c;
  double core_threshold_khz = 10.0;
  double diffusion_linewidth_khz = 2.0;
  double diffusion_window_ms = 10.0;

  // Build-up
  double t1n_s = 300.0;
  std::size_t n_cycles = 29000;
  std::size_t record_every = 100;
  std::size_t n_seeds = 20;
  bool stochastic = false;
  bool keep_per_spin = false;
  bool write_baths = false;
  std::vector<double> angles_deg{0.0, 2.0, 4.0, 6.0, 8.0, 10.0};

  std::uint64_t master_seed = 1;

  [[nodiscard]] double bath_radius_nm() const;
  [[nodiscard]] SystemSpec system_spec() const;
  /// |0> <-> |-1> line at theta = 0 for the ISE drive, MHz.
  [[nodiscard]] double aligned_line_mhz() const;
  [[nodiscard]] IseSweep ise_sweep() const;
  [[nodiscard]] NovelSequence novel_sequence() const;
  [[nodiscard]] Protocol protocol_value() const;
  [[nodiscard]] ResonatorModel resonator() const;
  [[nodiscard]] LaserModel laser() const;
  [[nodiscard]] CycleOptions cycle_options() const;
};

/// Configuration problem, reported with the location of the offending value
/// ("run.cfg:12", "--seed", "default").
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;
  std::string unit;
  std::string description;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

/// All keys in canonical order.
const std::vector<ConfigKey>& config_keys();

/// Where each key's value came from, for error messages.
using ConfigOrigins = std::map<std::string, std::string>;

/// Reads key = value lines on top of `config`. Unknown or repeated keys and
/// unparsable values throw ConfigError naming `source:line`.
void read_config(std::istream& in, const std::string& source, RunConfig& config, ConfigOrigins& origins);

/// Sets one key, recording `origin` (throws ConfigError).
void set_config_value(RunConfig& config, const std::string& key, const std::string& value, const std::string& origin,
                      ConfigOrigins& origins);

/// Range and consistency checks; throws ConfigError naming the origin.
void validate_config(const RunConfig& config, const ConfigOrigins& origins);

/// "key = value" for every key in canonical order.
std::string canonical_config(const RunConfig& config);

/// Commented listing of every key with its default, unit and meaning, plus
/// derived quantities.
std::string defaults_listing();

/// Shortest round-trip decimal form; "inf" for infinity.
std::string format_number(double value);

}  // namespace nvdnp
