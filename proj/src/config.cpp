#include "nvdnp/config.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace nvdnp {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) throw std::invalid_argument("expected a number");
  if (std::isnan(value)) throw std::invalid_argument("expected a number");
  return value;
}

template <typename Int>
Int parse_unsigned(const std::string& text) {
  Int value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) throw std::invalid_argument("expected a non-negative integer");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw std::invalid_argument("expected true or false");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list of numbers");
  return out;
}

ConfigKey number(std::string name, double RunConfig::*member, std::string unit, std::string description) {
  return {std::move(name), std::move(unit), std::move(description),
          [member](RunConfig& c, const std::string& v) { c.*member = parse_double(v); },
          [member](const RunConfig& c) { return format_number(c.*member); }};
}

ConfigKey count(std::string name, std::size_t RunConfig::*member, std::string description) {
  return {std::move(name), "", std::move(description),
          [member](RunConfig& c, const std::string& v) { c.*member = parse_unsigned<std::size_t>(v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

ConfigKey flag(std::string name, bool RunConfig::*member, std::string description) {
  return {std::move(name), "", std::move(description),
          [member](RunConfig& c, const std::string& v) { c.*member = parse_bool(v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> keys;
  keys.push_back({"protocol", "", "novel or ise",
                  [](RunConfig& c, const std::string& v) {
                    if (v == "ise") {
                      c.protocol = ProtocolKind::ise;
                    } else if (v == "novel") {
                      c.protocol = ProtocolKind::novel;
                    } else {
                      throw std::invalid_argument("expected novel or ise");
                    }
                  },
                  [](const RunConfig& c) { return std::string(c.protocol == ProtocolKind::ise ? "ise" : "novel"); }});
  keys.push_back(number("zfs_mhz", &RunConfig::zfs_mhz, "MHz", "zero-field splitting D"));
  keys.push_back(number("gamma_e_mhz_per_t", &RunConfig::gamma_e_mhz_per_t, "MHz/T", "electron gyromagnetic ratio"));
  keys.push_back(number("gamma_n_mhz_per_t", &RunConfig::gamma_n_mhz_per_t, "MHz/T", "13C gyromagnetic ratio"));
  keys.push_back(number("field_t", &RunConfig::field_t, "T", "static field"));
  keys.push_back(number("theta_deg", &RunConfig::theta_deg, "deg", "NV axis to field angle"));
  keys.push_back(number("hyperfine_shift_scale", &RunConfig::hyperfine_shift_scale, "",
                        "A in B_eff = gamma_n B - A, in units of a_z"));
  keys.push_back(number("ise_rabi_mhz", &RunConfig::ise_rabi_mhz, "MHz", "ISE drive Omega before the resonator"));
  keys.push_back(number("sweep_rate_mhz_per_us", &RunConfig::sweep_rate_mhz_per_us, "MHz/us", "ISE sweep rate nu"));
  keys.push_back(number("sweep_range_mhz", &RunConfig::sweep_range_mhz, "MHz", "ISE sweep range"));
  keys.push_back(number("sweep_offset_mhz", &RunConfig::sweep_offset_mhz, "MHz",
                        "sweep centre above the theta = 0 line"));
  keys.push_back(flag("sweep_downward", &RunConfig::sweep_downward, "sweep from high to low frequency"));
  keys.push_back(number("lock_rabi_mhz", &RunConfig::lock_rabi_mhz, "MHz", "NOVEL spin-lock Rabi frequency"));
  keys.push_back(number("lock_duration_ms", &RunConfig::lock_duration_ms, "ms", "NOVEL spin-lock duration"));
  keys.push_back(number("t1rho_ms", &RunConfig::t1rho_ms, "ms", "NV rotating-frame T1"));
  keys.push_back(number("resonator_hwhm_mhz", &RunConfig::resonator_hwhm_mhz, "MHz",
                        "resonator half width at half maximum, inf disables"));
  keys.push_back(number("resonator_offset_mhz", &RunConfig::resonator_offset_mhz, "MHz",
                        "resonator centre relative to the theta = 0 line"));
  keys.push_back({"resonator_shape", "", "amplitude or power Lorentzian",
                  [](RunConfig& c, const std::string& v) {
                    if (v == "amplitude") {
                      c.resonator_shape = ResonatorShape::amplitude;
                    } else if (v == "power") {
                      c.resonator_shape = ResonatorShape::power;
                    } else {
                      throw std::invalid_argument("expected amplitude or power");
                    }
                  },
                  [](const RunConfig& c) {
                    return std::string(c.resonator_shape == ResonatorShape::amplitude ? "amplitude" : "power");
                  }});
  keys.push_back(number("reset_fidelity", &RunConfig::reset_fidelity, "", "m_s = 0 population after the laser"));
  keys.push_back(number("pump_rate_khz", &RunConfig::pump_rate_khz, "kHz", "optical pumping rate"));
  keys.push_back(count("bath_spins", &RunConfig::bath_spins, "expected 13C count, sets the bath radius"));
  keys.push_back(number("abundance", &RunConfig::abundance, "", "13C fraction"));
  keys.push_back(number("core_threshold_khz", &RunConfig::core_threshold_khz, "kHz", "frozen-core coupling threshold"));
  keys.push_back(number("diffusion_linewidth_khz", &RunConfig::diffusion_linewidth_khz, "kHz",
                        "flip-flop linewidth"));
  keys.push_back(number("diffusion_window_ms", &RunConfig::diffusion_window_ms, "ms",
                        "transfer window per cycle with the NV in m_s = 0"));
  keys.push_back(number("t1n_s", &RunConfig::t1n_s, "s", "13C T1, inf disables"));
  keys.push_back(count("n_cycles", &RunConfig::n_cycles, "polarization cycles"));
  keys.push_back(count("record_every", &RunConfig::record_every, "cycles between trace rows"));
  keys.push_back(count("n_seeds", &RunConfig::n_seeds, "bath samples"));
  keys.push_back(flag("stochastic", &RunConfig::stochastic, "sampled instead of expected-value transfer"));
  keys.push_back(flag("keep_per_spin", &RunConfig::keep_per_spin, "per-spin vectors in the JSON result"));
  keys.push_back(flag("write_baths", &RunConfig::write_baths, "write sampled baths to baths.json"));
  keys.push_back({"angles_deg", "deg", "angle-sweep angles",
                  [](RunConfig& c, const std::string& v) { c.angles_deg = parse_list(v); },
                  [](const RunConfig& c) {
                    std::string out;
                    for (std::size_t i = 0; i < c.angles_deg.size(); ++i) {
                      if (i > 0) out += ",";
                      out += format_number(c.angles_deg[i]);
                    }
                    return out;
                  }});
  keys.push_back({"master_seed", "", "seed of all bath and sampling streams",
                  [](RunConfig& c, const std::string& v) { c.master_seed = parse_unsigned<std::uint64_t>(v); },
                  [](const RunConfig& c) { return std::to_string(c.master_seed); }});
  return keys;
}

const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

double RunConfig::bath_radius_nm() const { return radius_for_count(static_cast<double>(bath_spins), abundance); }

SystemSpec RunConfig::system_spec() const {
  SystemSpec s;
  s.zfs = zfs_mhz;
  s.gamma_e = gamma_e_mhz_per_t;
  s.gamma_n = gamma_n_mhz_per_t;
  s.field = field_t;
  s.theta = theta_deg * std::numbers::pi / 180.0;
  s.hyperfine_shift_scale = hyperfine_shift_scale;
  return s;
}

double RunConfig::aligned_line_mhz() const {
  SystemSpec aligned = system_spec();
  aligned.theta = 0.0;
  return transition_frequency(aligned);
}

IseSweep RunConfig::ise_sweep() const {
  IseSweep w;
  w.center_freq = aligned_line_mhz() + sweep_offset_mhz;
  w.range = sweep_range_mhz;
  w.rate = sweep_rate_mhz_per_us;
  w.rabi = ise_rabi_mhz;
  w.downward = sweep_downward;
  return w;
}

NovelSequence RunConfig::novel_sequence() const {
  NovelSequence n;
  n.lock_rabi = lock_rabi_mhz;
  n.lock_duration = lock_duration_ms * 1e3;
  return n;
}

Protocol RunConfig::protocol_value() const {
  if (protocol == ProtocolKind::ise) return ise_sweep();
  return novel_sequence();
}

ResonatorModel RunConfig::resonator() const {
  ResonatorModel m;
  m.center_freq = aligned_line_mhz() + resonator_offset_mhz;
  m.hwhm = resonator_hwhm_mhz;
  m.shape = resonator_shape;
  return m;
}

LaserModel RunConfig::laser() const { return {reset_fidelity, pump_rate_khz}; }

CycleOptions RunConfig::cycle_options() const {
  CycleOptions o;
  o.n_cycles = n_cycles;
  o.diffusion_window = diffusion_window_ms;
  o.t1n = t1n_s;
  o.reset_fidelity = reset_fidelity;
  o.t1rho = t1rho_ms * 1e3;
  o.stochastic = stochastic;
  o.record_every = record_every;
  o.keep_per_spin = keep_per_spin;
  o.diffusion.linewidth = diffusion_linewidth_khz * 1e-3;
  return o;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value, const std::string& origin,
                      ConfigOrigins& origins) {
  const ConfigKey* k = find_key(key);
  if (k == nullptr) throw ConfigError(origin + ": unknown key '" + key + "'");
  try {
    k->parse(config, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + key + " = '" + value + "': " + e.what());
  }
  origins[key] = origin;
}

void read_config(std::istream& in, const std::string& source, RunConfig& config, ConfigOrigins& origins) {
  std::set<std::string> seen;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number);
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + ": key '" + key + "' given twice");
    set_config_value(config, key, value, where, origins);
  }
}

void validate_config(const RunConfig& c, const ConfigOrigins& origins) {
  const auto fail = [&](const std::string& key, const std::string& message) {
    const auto it = origins.find(key);
    const std::string where = it == origins.end() ? "default" : it->second;
    throw ConfigError(where + ": " + key + " " + message);
  };
  const auto positive = [&](const std::string& key, double v) {
    if (!(v > 0.0)) fail(key, "must be positive");
  };
  positive("zfs_mhz", c.zfs_mhz);
  positive("gamma_e_mhz_per_t", c.gamma_e_mhz_per_t);
  positive("gamma_n_mhz_per_t", c.gamma_n_mhz_per_t);
  positive("field_t", c.field_t);
  if (!(c.gamma_e_mhz_per_t * c.field_t > 2.0 * c.zfs_mhz)) {
    fail("field_t", "too weak: gamma_e B must exceed 2 D for the rotating-frame model");
  }
  if (!(c.theta_deg >= 0.0 && c.theta_deg <= 90.0)) fail("theta_deg", "must lie in [0, 90]");
  if (!std::isfinite(c.hyperfine_shift_scale)) fail("hyperfine_shift_scale", "must be finite");
  if (!(c.ise_rabi_mhz >= 0.0) || !std::isfinite(c.ise_rabi_mhz)) fail("ise_rabi_mhz", "must be finite, >= 0");
  positive("sweep_rate_mhz_per_us", c.sweep_rate_mhz_per_us);
  positive("sweep_range_mhz", c.sweep_range_mhz);
  if (!std::isfinite(c.sweep_range_mhz)) fail("sweep_range_mhz", "must be finite");
  if (!std::isfinite(c.sweep_offset_mhz)) fail("sweep_offset_mhz", "must be finite");
  positive("lock_rabi_mhz", c.lock_rabi_mhz);
  if (!(c.lock_duration_ms >= 0.0) || !std::isfinite(c.lock_duration_ms)) {
    fail("lock_duration_ms", "must be finite, >= 0");
  }
  positive("t1rho_ms", c.t1rho_ms);
  positive("resonator_hwhm_mhz", c.resonator_hwhm_mhz);
  if (!std::isfinite(c.resonator_offset_mhz)) fail("resonator_offset_mhz", "must be finite");
  if (!(c.reset_fidelity >= 0.0 && c.reset_fidelity <= 1.0)) fail("reset_fidelity", "must lie in [0, 1]");
  if (!(c.pump_rate_khz >= 0.0)) fail("pump_rate_khz", "must be >= 0");
  if (c.bath_spins < 1) fail("bath_spins", "must be at least 1");
  if (!(c.abundance > 0.0 && c.abundance <= 1.0)) fail("abundance", "must lie in (0, 1]");
  if (c.bath_radius_nm() < 0.5) fail("bath_spins", "gives a bath radius below 0.5 nm");
  positive("core_threshold_khz", c.core_threshold_khz);
  positive("diffusion_linewidth_khz", c.diffusion_linewidth_khz);
  if (!(c.diffusion_window_ms >= 0.0) || !std::isfinite(c.diffusion_window_ms)) {
    fail("diffusion_window_ms", "must be finite, >= 0");
  }
  positive("t1n_s", c.t1n_s);
  if (c.n_cycles < 1) fail("n_cycles", "must be at least 1");
  if (c.record_every < 1) fail("record_every", "must be at least 1");
  if (c.n_seeds < 1) fail("n_seeds", "must be at least 1");
  for (double a : c.angles_deg) {
    if (!(a >= 0.0 && a <= 90.0)) fail("angles_deg", "entries must lie in [0, 90]");
  }
}

std::string canonical_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.format(config) + "\n";
  return out;
}

std::string defaults_listing() {
  const RunConfig defaults;
  std::ostringstream out;
  out << "# nvdnp defaults\n";
  for (const auto& k : config_keys()) {
    out << k.name << " = " << k.format(defaults) << "  # ";
    if (!k.unit.empty()) out << "[" << k.unit << "] ";
    out << k.description << "\n";
  }
  const SystemSpec s = defaults.system_spec();
  char larmor[32];
  std::snprintf(larmor, sizeof larmor, "%.3g", s.nuclear_larmor());
  char radius[32];
  std::snprintf(radius, sizeof radius, "%.3g", defaults.bath_radius_nm());
  out << "# derived: nuclear_larmor_mhz = " << larmor << "\n";
  out << "# derived: bath_radius_nm = " << radius << "\n";
  return out.str();
}

}  // namespace nvdnp
