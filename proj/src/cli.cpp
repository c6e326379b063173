#include "nvdnp/cli.hpp"

#include "nvdnp/io.hpp"
#include "nvdnp/parallel.hpp"
#include "nvdnp/random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#ifndef NVDNP_VERSION
#define NVDNP_VERSION "0.0.0"
#endif

namespace nvdnp {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr double deg = std::numbers::pi / 180.0;

struct Options {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t threads = 1;
  std::string out_dir = ".";
  std::string format = "both";
  std::string angles;
};

struct Loaded {
  RunConfig config;
  ConfigOrigins origins;
};

Loaded load(const Options& opt) {
  Loaded l;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError(opt.config_path + ": cannot open config file");
    read_config(in, opt.config_path, l.config, l.origins);
  }
  if (opt.seed_given) {
    l.config.master_seed = opt.seed;
    l.origins["master_seed"] = "--seed";
  }
  if (!opt.angles.empty()) set_config_value(l.config, "angles_deg", opt.angles, "--angles", l.origins);
  validate_config(l.config, l.origins);
  return l;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << body;
  f.close();
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir);
  return fs::path(dir);
}

Json config_echo(const RunConfig& config) {
  Json j;
  for (const auto& k : config_keys()) {
    const std::string v = k.format(config);
    const char* end = v.data() + v.size();
    std::uint64_t whole = 0;
    double number = 0.0;
    if (v == "true" || v == "false") {
      j[k.name] = v == "true";
    } else if (auto [p, ec] = std::from_chars(v.data(), end, whole); ec == std::errc() && p == end) {
      j[k.name] = whole;
    } else if (auto [q, ec2] = std::from_chars(v.data(), end, number); ec2 == std::errc() && q == end) {
      j[k.name] = number;
    } else {
      j[k.name] = v;
    }
  }
  return j;
}

struct Output {
  std::string file;
  std::string body;
};

void emit(const fs::path& dir, const std::string& command, const RunConfig& config, const std::string& hash,
          std::size_t threads, double wall_s, const std::vector<Output>& outputs) {
  Json manifest;
  manifest["tool"] = "nvdnp";
  manifest["version"] = NVDNP_VERSION;
  manifest["command"] = command;
  manifest["config_sha256"] = hash;
  manifest["master_seed"] = config.master_seed;
  manifest["threads"] = threads;
  manifest["wall_time_s"] = wall_s;
  manifest["config"] = config_echo(config);
  auto files = Json::array();
  for (const auto& o : outputs) {
    write_file(dir / o.file, o.body);
    files.push_back({{"file", o.file}, {"sha256", sha256_hex(o.body)}});
  }
  manifest["outputs"] = std::move(files);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

bool wants_csv(const std::string& format) { return format == "csv" || format == "both"; }
bool wants_json(const std::string& format) { return format == "json" || format == "both"; }

std::vector<std::uint64_t> bath_seeds(const RunConfig& config) {
  std::vector<std::uint64_t> seeds(config.n_seeds);
  for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = derive_seed(config.master_seed, k);
  return seeds;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Protocol with the drive passed through the resonator at the configured angle.
Protocol filtered_protocol(const RunConfig& config) {
  SystemSpec spec = config.system_spec();
  const ResonatorModel res = config.resonator();
  if (config.protocol == ProtocolKind::ise) {
    IseSweep w = config.ise_sweep();
    spec.rabi = w.rabi;
    w.rabi = effective_rabi(spec, res);
    return w;
  }
  NovelSequence n = config.novel_sequence();
  spec.rabi = n.lock_rabi;
  n.lock_rabi = effective_rabi(spec, res);
  return n;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded l = load(opt);
  const RunConfig& config = l.config;
  const fs::path dir = prepare_out_dir(opt.out_dir);
  const std::string hash = sha256_hex(canonical_config(config));

  const SystemSpec spec = config.system_spec();
  const Protocol protocol = filtered_protocol(config);
  const double duration = protocol_duration(protocol);
  const auto seeds = bath_seeds(config);
  const double radius = config.bath_radius_nm();
  const double threshold = config.core_threshold_khz * 1e-3;

  std::vector<BathSample> baths(seeds.size());
  std::vector<PolarizationTrace> traces(seeds.size());
  parallel_for(seeds.size(), opt.threads, [&](std::size_t k) {
    baths[k] = sample_bath(seeds[k], radius, config.abundance, threshold);
    CycleOptions cycles = config.cycle_options();
    cycles.stochastic_seed = derive_seed(seeds[k], 0);
    const auto probs = transfer_probabilities(baths[k], spec, protocol, cycles);
    traces[k] = CycleEngine(baths[k], cycles).run(probs, duration);
  });

  const std::size_t n_rows = traces.front().records.size();
  std::vector<TraceRow> rows;
  Json cycles_json = Json::array();
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<double> bulk;
    std::vector<double> core;
    for (const auto& t : traces) {
      bulk.push_back(t.records[r].bulk);
      core.push_back(t.records[r].frozen_core);
    }
    const auto& rec = traces.front().records[r];
    rows.push_back({rec.cycle, rec.time_ms, mean_of(bulk), mean_of(core)});
    cycles_json.push_back({{"cycle", rec.cycle},
                           {"time_ms", rec.time_ms},
                           {"bulk_mean", mean_of(bulk)},
                           {"bulk_stderr", stderr_of(bulk)},
                           {"frozen_core_mean", mean_of(core)},
                           {"frozen_core_stderr", stderr_of(core)}});
  }

  std::vector<double> final_bulk;
  std::vector<double> final_core;
  Json per_seed = Json::array();
  for (std::size_t k = 0; k < traces.size(); ++k) {
    final_bulk.push_back(traces[k].final_bulk());
    final_core.push_back(traces[k].records.back().frozen_core);
    Json s{{"seed", seeds[k]},
           {"bath_size", baths[k].size()},
           {"frozen_core_size", baths[k].frozen_core_members.size()},
           {"final_bulk", final_bulk.back()},
           {"final_frozen_core", final_core.back()}};
    if (config.keep_per_spin) {
      s["transfer_probabilities"] = traces[k].transfer_probabilities;
      s["final_polarization"] = traces[k].final_polarization;
      auto recs = Json::array();
      for (const auto& rec : traces[k].records) recs.push_back({{"cycle", rec.cycle}, {"per_spin", rec.per_spin}});
      s["records"] = std::move(recs);
    }
    per_seed.push_back(std::move(s));
  }

  Json result;
  result["config_sha256"] = hash;
  result["protocol"] = config.protocol == ProtocolKind::ise ? "ise" : "novel";
  result["master_seed"] = config.master_seed;
  result["n_seeds"] = seeds.size();
  result["cycle_time_ms"] = traces.front().cycle_time_ms;
  result["final_bulk_mean"] = mean_of(final_bulk);
  result["final_bulk_stderr"] = stderr_of(final_bulk);
  result["final_frozen_core_mean"] = mean_of(final_core);
  result["per_seed"] = std::move(per_seed);
  result["cycles"] = std::move(cycles_json);

  std::vector<Output> outputs;
  if (wants_csv(opt.format)) outputs.push_back({"trace.csv", trace_csv(rows, hash)});
  if (wants_json(opt.format)) outputs.push_back({"result.json", result.dump(2) + "\n"});
  if (config.write_baths) {
    Json b{{"config_sha256", hash}, {"baths", Json::array()}};
    for (const auto& bath : baths) b["baths"].push_back(bath_to_json(bath));
    outputs.push_back({"baths.json", b.dump(2) + "\n"});
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(dir, "simulate", config, hash, opt.threads, wall, outputs);
  out << "simulate: " << seeds.size() << " seeds, " << config.n_cycles << " cycles, final bulk polarization "
      << format_17(mean_of(final_bulk)) << " +- " << format_17(stderr_of(final_bulk)) << "\n";
  return exit_code::success;
}

int cmd_angle_sweep(const Options& opt, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded l = load(opt);
  const RunConfig& config = l.config;
  const auto origin = [&](const std::string& key) {
    const auto it = l.origins.find(key);
    return it == l.origins.end() ? std::string("default") : it->second;
  };
  if (config.angles_deg.size() < 2) throw ConfigError(origin("angles_deg") + ": angles_deg needs at least 2 angles");
  if (config.protocol != ProtocolKind::ise) throw ConfigError(origin("protocol") + ": angle-sweep runs the ise protocol");
  const fs::path dir = prepare_out_dir(opt.out_dir);
  const std::string hash = sha256_hex(canonical_config(config));

  std::vector<double> angles;
  for (double a : config.angles_deg) angles.push_back(a * deg);
  SystemSpec base = config.system_spec();
  base.theta = 0.0;
  CycleOptions cycles = config.cycle_options();
  cycles.record_every = cycles.n_cycles;
  const auto seeds = bath_seeds(config);
  const auto sweep = angle_enhancement_sweep(angles, base, config.ise_sweep(), seeds, config.bath_radius_nm(),
                                             config.abundance, config.core_threshold_khz * 1e-3, cycles,
                                             config.resonator(), config.laser(), opt.threads);

  Json points = Json::array();
  for (std::size_t a = 0; a < sweep.points.size(); ++a) {
    const auto& p = sweep.points[a];
    std::vector<double> bulk;
    for (const auto& row : sweep.bulk) bulk.push_back(row[a]);
    points.push_back({{"theta_deg", config.angles_deg[a]},
                      {"enhancement_mean", p.enhancement_mean},
                      {"enhancement_stderr", p.enhancement_stderr},
                      {"n_samples", p.n_samples},
                      {"effective_rabi_mhz", p.effective_rabi},
                      {"crossings", p.crossings},
                      {"bulk_polarization", bulk}});
  }
  Json result;
  result["config_sha256"] = hash;
  result["master_seed"] = config.master_seed;
  result["seeds"] = seeds;
  result["reference_bulk_polarization"] = sweep.reference;
  result["points"] = std::move(points);

  std::vector<Output> outputs;
  if (wants_csv(opt.format)) outputs.push_back({"angle_sweep.csv", angle_csv(sweep.points, hash)});
  if (wants_json(opt.format)) outputs.push_back({"angle_sweep.json", result.dump(2) + "\n"});
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(dir, "angle-sweep", config, hash, opt.threads, wall, outputs);
  for (const auto& p : sweep.points) {
    out << "theta " << format_number(p.theta / deg) << " deg: enhancement " << format_17(p.enhancement_mean) << " +- "
        << format_17(p.enhancement_stderr) << "\n";
  }
  return exit_code::success;
}

int cmd_validate(const Options& opt, std::ostream& out) {
  const Loaded l = load(opt);
  bool ok = true;
  for (const auto& r : run_oracles(l.config)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": measured " << format_17(r.measured) << ", limit "
        << format_17(r.limit);
    if (!r.detail.empty()) out << " (" << r.detail << ")";
    out << "\n";
    ok = ok && r.passed;
  }
  return ok ? exit_code::success : exit_code::oracle_failure;
}

}  // namespace

std::vector<OracleResult> run_oracles(const RunConfig& config) {
  std::vector<OracleResult> results;

  {
    double worst = 0.0;
    for (double mu : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      worst = std::max(worst, std::abs(lz_two_level_numeric(mu) - lz_probability(mu)));
    }
    results.push_back({"lz_grid", worst, 0.02, worst <= 0.02, "max |exp(-2 pi mu) - numeric|, mu in [0.01, 1]"});
  }
  {
    const double mu = std::numbers::ln2 / (2.0 * std::numbers::pi);
    const double dev = std::abs(ise_transfer_analytic(lz_probability(mu)) - 0.5);
    results.push_back({"pbar_maximum", dev, 1e-9, dev <= 1e-9, "|P bar(ln2 / 2 pi) - 1/2|"});
  }
  {
    SystemSpec pair = config.system_spec();
    pair.theta = 0.0;
    pair.a_x = 0.1;
    IseSweep w = config.ise_sweep();
    w.center_freq = config.aligned_line_mhz();
    const auto r = ise_transfer_numeric(pair, w);
    results.push_back({"propagator_unitarity", r.max_unitarity_defect, 1e-9, r.max_unitarity_defect <= 1e-9,
                       std::to_string(r.segments) + " ISE segments"});
  }
  {
    SystemSpec pair = config.system_spec();
    pair.theta = 0.0;
    pair.a_x = 0.1;
    NovelSequence seq;
    seq.lock_rabi = pair.effective_nuclear_field();
    seq.lock_duration = 1.0 / pair.a_x;
    const double dev = std::abs(novel_transfer(pair, seq) - 1.0);
    results.push_back({"novel_flip_flop", dev, 1e-4, dev <= 1e-4, "|1 - transfer| at t = 1/a_x"});
  }
  {
    const double khz = nn_dipolar_coupling(constants::bond_length) * 1e3;
    const double rel = std::abs(khz - 2.1) / 2.1;
    results.push_back({"nn_dipolar", rel, 0.15, rel <= 0.15, format_17(khz) + " kHz at 0.154 nm"});
  }
  return results;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"NV-13C dynamic nuclear polarization simulator", "nvdnp"};
  app.require_subcommand(1);
  Options opt;
  opt.threads = std::max(1U, std::thread::hardware_concurrency());

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key = value configuration file");
    sub->add_option("--seed", opt.seed, "master seed (overrides master_seed)");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--format", opt.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  };
  auto* simulate = app.add_subcommand("simulate", "polarization build-up over bath samples");
  add_common(simulate);
  auto* sweep = app.add_subcommand("angle-sweep", "ISE enhancement against misalignment angle");
  add_common(sweep);
  sweep->add_option("--angles", opt.angles, "comma-separated angles in degrees");
  auto* validate = app.add_subcommand("validate", "run the built-in oracle suite");
  add_common(validate);
  auto* defaults = app.add_subcommand("print-defaults", "print every configuration key with its default");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    opt.seed_given = simulate->count("--seed") + sweep->count("--seed") + validate->count("--seed") > 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::success : exit_code::invalid_config;
  }

  try {
    if (*defaults) {
      out << defaults_listing();
      return exit_code::success;
    }
    if (*simulate) return cmd_simulate(opt, out);
    if (*sweep) return cmd_angle_sweep(opt, out);
    return cmd_validate(opt, out);
  } catch (const ConfigError& e) {
    err << "nvdnp: " << e.what() << "\n";
    return exit_code::invalid_config;
  } catch (const std::exception& e) {
    err << "nvdnp: " << e.what() << "\n";
    return exit_code::runtime_error;
  }
}

}  // namespace nvdnp
