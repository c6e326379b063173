#include "nvdnp/protocols.hpp"

#include "nvdnp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nvdnp {

namespace {

using C = std::complex<double>;

// Affine cycle map p -> g p + h.
struct AffineMap {
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
};

// Apply `first`, then `second`.
AffineMap then(const AffineMap& first, const AffineMap& second) {
  return {second.g * first.g, second.g * first.h + second.h};
}

AffineMap power(const AffineMap& map, std::size_t k) {
  const auto n = map.h.size();
  AffineMap result{Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
  AffineMap base = map;
  while (k > 0) {
    if (k & 1U) result = then(result, base);
    k >>= 1U;
    if (k > 0) base = then(base, base);
  }
  return result;
}

// <2 Iz> change for a pure electron state times a diagonal nuclear density.
double nuclear_polarization_change(const ComplexMatrix& u, const Eigen::Vector2cd& electron, double nuclear_pol) {
  const std::array<double, 2> weights{0.5 * (1.0 + nuclear_pol), 0.5 * (1.0 - nuclear_pol)};
  const std::array<double, 2> iz2{1.0, -1.0};
  double change = 0.0;
  for (int n = 0; n < 2; ++n) {
    ComplexVector psi = ComplexVector::Zero(4);
    psi(n) = electron(0);
    psi(2 + n) = electron(1);
    const ComplexVector out = u * psi;
    const double after = std::norm(out(0)) + std::norm(out(2)) - std::norm(out(1)) - std::norm(out(3));
    change += weights[n] * (after - iz2[n]);
  }
  return change;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(what);
}

}  // namespace

void NovelSequence::validate() const {
  if (!(lock_rabi > 0.0)) throw std::invalid_argument("NovelSequence: lock Rabi frequency must be positive");
  if (!(lock_duration >= 0.0) || !std::isfinite(lock_duration)) {
    throw std::invalid_argument("NovelSequence: lock duration must be finite and non-negative");
  }
}

void IseSweep::validate() const {
  if (!(rate > 0.0)) throw std::invalid_argument("IseSweep: sweep rate must be positive");
  if (!(range > 0.0)) throw std::invalid_argument("IseSweep: sweep range must be positive");
  if (!(rabi >= 0.0)) throw std::invalid_argument("IseSweep: Rabi frequency must be non-negative");
  if (!std::isfinite(center_freq)) throw std::invalid_argument("IseSweep: center frequency must be finite");
}

double protocol_duration(const Protocol& protocol) {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NovelSequence>) {
          return p.lock_duration;
        } else {
          return p.duration();
        }
      },
      protocol);
}

SweepPropagation propagate_linear_sweep(const ComplexMatrix& fixed, const ComplexMatrix& term, double x_start,
                                        double x_end, double rate, const std::function<double(double)>& spread_bound,
                                        const PropagationOptions& options) {
  if (!(rate > 0.0)) throw std::invalid_argument("propagate_linear_sweep: rate must be positive");
  if (!(options.steps_per_period > 0.0)) {
    throw std::invalid_argument("propagate_linear_sweep: steps_per_period must be positive");
  }
  const double direction = x_end >= x_start ? 1.0 : -1.0;
  const double total = std::abs(x_end - x_start) / rate;
  const auto x_at = [&](double t) { return x_start + direction * rate * t; };
  const auto max_step = [&](double x) {
    const double f = spread_bound(x);
    return f > 0.0 ? 1.0 / (options.steps_per_period * f) : total;
  };

  SweepPropagation out;
  out.unitary = ComplexMatrix::Identity(fixed.rows(), fixed.cols());
  double t = 0.0;
  while (t < total) {
    // The bound is taken at both ends of a trial step, covering |x| growth.
    const double trial = std::min(max_step(x_at(t)), total - t);
    const double dt = std::min({trial, max_step(x_at(t + trial)), total - t});
    const ComplexMatrix segment = propagator(fixed + x_at(t + 0.5 * dt) * term, dt);
    out.max_unitarity_defect = std::max(out.max_unitarity_defect, unitarity_defect(segment));
    out.unitary = segment * out.unitary;
    if (++out.segments > options.max_segments) {
      throw std::runtime_error("propagate_linear_sweep: segment budget exceeded");
    }
    t = (total - t - dt) <= 1e-12 * total ? total : t + dt;
  }
  return out;
}

double novel_transfer(const SystemSpec& spec, const NovelSequence& seq, double nuclear_polarization) {
  seq.validate();
  if (!(nuclear_polarization >= -1.0 && nuclear_polarization <= 1.0)) {
    throw std::invalid_argument("novel_transfer: nuclear polarization outside [-1, 1]");
  }
  SystemSpec locked = spec;
  locked.rabi = seq.lock_rabi;
  const ComplexMatrix u = propagator(build_htrans(locked, 0.0), seq.lock_duration);
  return nuclear_polarization_change(u, Eigen::Vector2cd(1.0, 0.0), nuclear_polarization);
}

double novel_transfer_two_level(double a_x, double mismatch, double duration) {
  const double a2 = a_x * a_x;
  const double d2 = mismatch * mismatch;
  if (a2 == 0.0) return 0.0;
  const double amplitude = a2 / (a2 + 4.0 * d2);
  const double s = std::sin(std::numbers::pi * std::sqrt(d2 + 0.25 * a2) * duration);
  return amplitude * s * s;
}

double lz_mu(double rabi, double a_x_eff, double rate, double nuclear_larmor) {
  if (!(rate > 0.0)) throw std::invalid_argument("lz_mu: sweep rate must be positive");
  if (!(rabi >= 0.0) || !(rabi < nuclear_larmor)) {
    throw std::domain_error("lz_mu: requires 0 <= Omega < gamma_n B");
  }
  const double root = std::sqrt((nuclear_larmor - rabi) * (nuclear_larmor + rabi));
  const double linear = rabi * rabi * a_x_eff * a_x_eff / (16.0 * rate * nuclear_larmor * root);
  return 2.0 * std::numbers::pi * linear;
}

double lz_probability(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("lz_probability: mu must be non-negative");
  return std::exp(-2.0 * std::numbers::pi * mu);
}

double ise_transfer_analytic(double p_lz) {
  check_probability(p_lz, "ise_transfer_analytic: P_LZ outside [0, 1]");
  return 2.0 * p_lz * (1.0 - p_lz);
}

double ise_transfer_covered(double p_lz, int crossings) {
  check_probability(p_lz, "ise_transfer_covered: P_LZ outside [0, 1]");
  switch (crossings) {
    case 0:
      return 0.0;
    case 1:
      return 1.0 - p_lz;
    case 2:
      return ise_transfer_analytic(p_lz);
    default:
      throw std::invalid_argument("ise_transfer_covered: crossings must be 0, 1 or 2");
  }
}

int ise_crossings_covered(const SystemSpec& spec, const IseSweep& sweep) {
  const double larmor = spec.nuclear_larmor();
  if (!(sweep.rabi < larmor)) return 0;
  const auto points = resonance_detunings(sweep.rabi, larmor);
  SystemSpec driven = spec;
  driven.rabi = sweep.rabi;
  const double line = transition_frequency(driven);
  int count = 0;
  for (double d : {points.a1, points.a2}) {
    const double f = line + d;
    if (f >= sweep.low_freq() && f <= sweep.high_freq()) ++count;
  }
  return count;
}

IseNumericResult ise_transfer_numeric(const SystemSpec& spec, const IseSweep& sweep,
                                      const PropagationOptions& options) {
  sweep.validate();
  SystemSpec driven = spec;
  driven.rabi = sweep.rabi;
  const auto terms = htrans_terms(driven);
  const double line = transition_frequency(driven);
  const double lo = sweep.low_freq() - line;
  const double hi = sweep.high_freq() - line;
  const double start = sweep.downward ? hi : lo;
  const double end = sweep.downward ? lo : hi;

  const double static_part =
      std::abs(driven.effective_nuclear_field()) + 0.5 * std::abs(driven.a_z) + 0.5 * std::abs(driven.a_x);
  const auto bound = [&](double delta) { return std::hypot(driven.rabi, delta) + static_part; };

  const auto prop = propagate_linear_sweep(terms.fixed, terms.detuning_term, start, end, sweep.rate, bound, options);
  const Eigen::Vector2cd nv_zero = Eigen::Vector2cd(1.0, 1.0) / std::sqrt(2.0);
  IseNumericResult out;
  out.polarization_change = nuclear_polarization_change(prop.unitary, nv_zero, 0.0);
  out.transfer = std::abs(out.polarization_change);
  out.segments = prop.segments;
  out.max_unitarity_defect = prop.max_unitarity_defect;
  return out;
}

double lz_two_level_numeric(double mu, double half_span, const PropagationOptions& options) {
  if (!(mu >= 0.0)) throw std::invalid_argument("lz_two_level_numeric: mu must be non-negative");
  if (!(half_span > 0.0)) throw std::invalid_argument("lz_two_level_numeric: half span must be positive");
  // Diabatic levels +-x/2 separate at 1 MHz/us, coupling element V = g/2 and
  // exp(-4 pi^2 V^2 / rate) = exp(-2 pi mu).
  constexpr double rate = 1.0;
  const double g = std::sqrt(2.0 * mu * rate / std::numbers::pi);
  const auto s = spin_operators(2);
  const ComplexMatrix fixed = g * s.x;
  const auto bound = [g](double x) { return std::hypot(x, g); };
  const auto prop = propagate_linear_sweep(fixed, s.z, -half_span, half_span, rate, bound, options);
  return std::norm(prop.unitary(0, 0));
}

std::vector<double> transfer_probabilities(const BathSample& bath, const SystemSpec& spec, const Protocol& protocol,
                                           const CycleOptions& options) {
  std::vector<double> out(bath.size(), 0.0);
  if (const auto* sweep = std::get_if<IseSweep>(&protocol)) {
    sweep->validate();
    const int crossings = ise_crossings_covered(spec, *sweep);
    if (crossings == 0) return out;
    const double larmor = spec.nuclear_larmor();
    for (std::size_t i = 0; i < bath.size(); ++i) {
      const double mu = lz_mu(sweep->rabi, bath.spins[i].a_x, sweep->rate, larmor);
      out[i] = ise_transfer_covered(lz_probability(mu), crossings);
    }
  } else {
    const auto& seq = std::get<NovelSequence>(protocol);
    seq.validate();
    const double envelope = std::isfinite(options.t1rho) ? std::exp(-seq.lock_duration / options.t1rho) : 1.0;
    for (std::size_t i = 0; i < bath.size(); ++i) {
      SystemSpec pair = spec;
      pair.a_z = bath.spins[i].a_z;
      const double mismatch = seq.lock_rabi - pair.effective_nuclear_field();
      out[i] = envelope * novel_transfer_two_level(bath.spins[i].a_x, mismatch, seq.lock_duration);
    }
  }
  return out;
}

CycleEngine::CycleEngine(const BathSample& bath, CycleOptions options)
    : size_(bath.size()), options_(std::move(options)), core_(bath.core_mask()) {
  if (options_.n_cycles < 1) throw std::invalid_argument("polarization_cycle_run: n_cycles must be at least 1");
  if (!(options_.diffusion_window >= 0.0)) {
    throw std::invalid_argument("polarization_cycle_run: diffusion window must be non-negative");
  }
  if (!(options_.t1n > 0.0)) throw std::invalid_argument("polarization_cycle_run: T1n must be positive");
  check_probability(options_.reset_fidelity, "polarization_cycle_run: reset fidelity outside [0, 1]");
  if (options_.record_every < 1) throw std::invalid_argument("polarization_cycle_run: record_every must be >= 1");
  if (!options_.initial.empty() && options_.initial.size() != size_) {
    throw std::invalid_argument("polarization_cycle_run: initial polarization size does not match the bath");
  }
  for (double p : options_.initial) {
    if (!(p >= -1.0 && p <= 1.0)) throw std::invalid_argument("polarization_cycle_run: initial value outside [-1, 1]");
  }
  if (options_.diffusion_window > 0.0 && size_ > 1) {
    window_ = DiffusionModel(bath, options_.diffusion).transfer_matrix(options_.diffusion_window, true);
  }
}

PolarizationTrace CycleEngine::run(std::span<const double> transfer, double protocol_duration_us) const {
  if (transfer.size() != size_) throw std::invalid_argument("polarization_cycle_run: one probability per spin");
  for (double p : transfer) check_probability(p, "polarization_cycle_run: transfer probability outside [0, 1]");
  if (!(protocol_duration_us >= 0.0)) throw std::invalid_argument("polarization_cycle_run: negative protocol time");

  const auto n = static_cast<Eigen::Index>(size_);
  const double cycle_ms = protocol_duration_us * 1e-3 + options_.diffusion_window;
  const double decay = std::isfinite(options_.t1n) ? std::exp(-cycle_ms * 1e-3 / options_.t1n) : 1.0;
  const double p_nv = options_.reset_fidelity;
  const Eigen::Map<const Eigen::VectorXd> prob(transfer.data(), n);

  PolarizationTrace trace;
  trace.cycle_time_ms = cycle_ms;
  trace.transfer_probabilities.assign(transfer.begin(), transfer.end());

  Eigen::VectorXd p = options_.initial.empty()
                          ? Eigen::VectorXd::Zero(n)
                          : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(options_.initial.data(), n));

  const std::size_t core_count = static_cast<std::size_t>(std::count(core_.begin(), core_.end(), true));
  const auto record = [&](std::size_t cycle) {
    const Eigen::VectorXd clamped = p.cwiseMax(-1.0).cwiseMin(1.0);
    CycleRecord r;
    r.cycle = cycle;
    r.time_ms = static_cast<double>(cycle) * cycle_ms;
    r.bulk = n > 0 ? clamped.mean() : 0.0;
    double core_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (core_[i]) core_sum += clamped(i);
    }
    r.frozen_core = core_count > 0 ? core_sum / static_cast<double>(core_count) : 0.0;
    if (options_.keep_per_spin) r.per_spin.assign(clamped.data(), clamped.data() + n);
    trace.records.push_back(std::move(r));
  };

  const std::size_t total = options_.n_cycles;
  const std::size_t every = options_.record_every;

  if (options_.stochastic) {
    auto engine = make_engine(options_.stochastic_seed);
    for (std::size_t c = 1; c <= total; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (uniform01(engine) < prob(i)) p(i) = p_nv;
      }
      if (window_.size() > 0) p = window_ * p;
      p *= decay;
      if (c % every == 0 || c == total) record(c);
    }
  } else {
    // One cycle: decay * W * (diag(1 - P) p + P p_nv).
    AffineMap cycle;
    const Eigen::VectorXd keep = (1.0 - prob.array()).matrix();
    if (window_.size() > 0) {
      cycle.g = decay * (window_ * keep.asDiagonal());
      cycle.h = decay * (window_ * (prob * p_nv));
    } else {
      cycle.g = decay * Eigen::MatrixXd(keep.asDiagonal());
      cycle.h = decay * p_nv * prob;
    }
    const AffineMap stride = power(cycle, every);
    std::size_t c = 0;
    while (c + every <= total) {
      p = stride.g * p + stride.h;
      c += every;
      record(c);
    }
    if (c < total) {
      const AffineMap rest = power(cycle, total - c);
      p = rest.g * p + rest.h;
      record(total);
    }
  }

  const Eigen::VectorXd clamped = p.cwiseMax(-1.0).cwiseMin(1.0);
  trace.final_polarization.assign(clamped.data(), clamped.data() + n);
  return trace;
}

PolarizationTrace polarization_cycle_run(const BathSample& bath, std::span<const double> transfer,
                                         double protocol_duration_us, const CycleOptions& options) {
  return CycleEngine(bath, options).run(transfer, protocol_duration_us);
}

PolarizationTrace polarization_cycle_run(const BathSample& bath, const SystemSpec& spec, const Protocol& protocol,
                                         const CycleOptions& options) {
  const auto probs = transfer_probabilities(bath, spec, protocol, options);
  return polarization_cycle_run(bath, probs, protocol_duration(protocol), options);
}

double steady_state_polarization(double gamma_pol, double t1n) {
  if (!(gamma_pol >= 0.0)) throw std::invalid_argument("steady_state_polarization: rate must be non-negative");
  if (!(t1n > 0.0)) throw std::invalid_argument("steady_state_polarization: T1n must be positive");
  if (std::isinf(t1n)) return gamma_pol > 0.0 ? 1.0 : 0.0;
  const double x = gamma_pol * t1n;
  return x / (1.0 + x);
}

double homogenized_rate(double transfer_probability, double cycle_time_ms) {
  check_probability(transfer_probability, "homogenized_rate: probability outside [0, 1]");
  if (!(cycle_time_ms > 0.0)) throw std::invalid_argument("homogenized_rate: cycle time must be positive");
  return -std::log1p(-transfer_probability) / (cycle_time_ms * 1e-3);
}

}  // namespace nvdnp
