#pragma once

// Polarization transfer protocols between the NV electron and 13C spins:
// spin-locking at the Hartmann-Hahn condition (NOVEL) and the swept-frequency
// integrated solid effect (ISE), each as closed-form transfer probabilities
// and as time-dependent propagation of the rotating-frame pair Hamiltonian,
// plus the multi-cycle build-up engine over a bath.
//
// Frequencies in MHz, sweep rates in MHz/us, propagation times in us,
// cycle bookkeeping in ms, nuclear T1 in s.

#include "nvdnp/bath.hpp"
#include "nvdnp/hamiltonian.hpp"
#include "nvdnp/spinops.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace nvdnp {

/// Rotating-frame T1 of the NV under spin locking, us.
inline constexpr double default_t1rho = 465.0;

struct NovelSequence {
  double lock_rabi = 4.87;       // MHz
  double lock_duration = 200.0;  // us
  bool laser_continuous = true;

  void validate() const;
  /// Lock longer than the rotating-frame T1 budget.
  [[nodiscard]] bool exceeds_t1rho(double t1rho = default_t1rho) const { return lock_duration > t1rho; }
};

struct IseSweep {
  double center_freq = 0.0;  // MHz
  double range = 100.0;      // MHz
  double rate = 0.3;         // nu, MHz/us
  double rabi = 1.0;         // Omega, MHz
  bool downward = false;

  void validate() const;
  [[nodiscard]] double duration() const { return range / rate; }  // us
  [[nodiscard]] double low_freq() const { return center_freq - 0.5 * range; }
  [[nodiscard]] double high_freq() const { return center_freq + 0.5 * range; }
};

using Protocol = std::variant<NovelSequence, IseSweep>;

/// Time on the NV for one application of the protocol, us.
double protocol_duration(const Protocol& protocol);

struct PropagationOptions {
  // Piecewise-constant segments no longer than 1 / (steps_per_period f_max).
  double steps_per_period = 50.0;
  std::size_t max_segments = 50'000'000;
};

struct SweepPropagation {
  ComplexMatrix unitary;
  std::size_t segments = 0;
  double max_unitarity_defect = 0.0;
};

/// Propagator of H(t) = fixed + x(t) term with x ramped linearly from x_start
/// to x_end at |dx/dt| = rate. Each segment holds H at its midpoint and is
/// exponentiated exactly; the step follows `spread_bound(x)`, an upper bound
/// on the eigenvalue spread of H at x. Throws std::runtime_error past
/// max_segments.
SweepPropagation propagate_linear_sweep(const ComplexMatrix& fixed, const ComplexMatrix& term, double x_start,
                                        double x_end, double rate, const std::function<double(double)>& spread_bound,
                                        const PropagationOptions& options = {});

/// Change of <2 Iz> of an initially unpolarized (or `nuclear_polarization`)
/// 13C after spin locking: the electron starts in |+>, the locked state after
/// an ideal pi/2 pulse, and evolves under H_trans with Delta = 0 and
/// Omega = lock_rabi.
double novel_transfer(const SystemSpec& spec, const NovelSequence& seq, double nuclear_polarization = 0.0);

/// Flip-flop probability of the resonant two-level subspace:
/// a_x^2/(a_x^2 + 4 d^2) sin^2(pi sqrt(d^2 + a_x^2/4) t), d = Omega - B_eff.
double novel_transfer_two_level(double a_x, double mismatch, double duration);

/// Landau-Zener adiabaticity of one ISE crossing,
/// mu = Omega^2 a^2 / (16 nu L sqrt(L^2 - Omega^2)) evaluated in angular
/// units (rad/us), i.e. 2 pi times the same expression in MHz and MHz/us.
/// Throws std::domain_error unless 0 < Omega < L, std::invalid_argument
/// unless nu > 0.
double lz_mu(double rabi, double a_x_eff, double rate, double nuclear_larmor);

/// exp(-2 pi mu)
double lz_probability(double mu);

/// Transfer after both crossings, 2 P (1 - P).
double ise_transfer_analytic(double p_lz);

/// Transfer for a sweep that passes `crossings` (0, 1 or 2) resonance points.
double ise_transfer_covered(double p_lz, int crossings);

struct IseNumericResult {
  double transfer = 0.0;             // |change of <2 Iz>|
  double polarization_change = 0.0;  // signed change of <2 Iz>
  std::size_t segments = 0;
  double max_unitarity_defect = 0.0;
};

/// Propagates H_trans through the sweep with the NV starting in |0> and the
/// 13C unpolarized. Omega is taken from the sweep. Only the sweep's own
/// range is traversed, so a sweep covering one resonance yields
/// single-crossing transfer.
IseNumericResult ise_transfer_numeric(const SystemSpec& spec, const IseSweep& sweep,
                                      const PropagationOptions& options = {});

/// Number of ISE resonance points inside the sweep range.
int ise_crossings_covered(const SystemSpec& spec, const IseSweep& sweep);

/// Diabatic passage probability of the two-level crossing
/// H = x sz + g sx swept at 1 MHz/us, with g chosen so that the textbook
/// result is exp(-2 pi mu). The sweep spans |x| <= half_span.
double lz_two_level_numeric(double mu, double half_span = 100.0, const PropagationOptions& options = {});

struct CycleOptions {
  std::size_t n_cycles = 1;
  double diffusion_window = 10.0;  // ms, NV in m_s = 0
  double t1n = std::numeric_limits<double>::infinity();  // s
  double reset_fidelity = 0.96;
  double t1rho = default_t1rho;  // us, damping of the NOVEL transfer
  bool stochastic = false;
  std::uint64_t stochastic_seed = 0;
  std::size_t record_every = 1;
  bool keep_per_spin = false;
  DiffusionParams diffusion;
  std::vector<double> initial;  // per-spin start values; empty means zero
};

struct CycleRecord {
  std::size_t cycle = 0;
  double time_ms = 0.0;
  double bulk = 0.0;         // mean over all bath spins
  double frozen_core = 0.0;  // mean over frozen-core members, 0 if none
  std::vector<double> per_spin;
};

struct PolarizationTrace {
  std::vector<CycleRecord> records;
  std::vector<double> final_polarization;
  std::vector<double> transfer_probabilities;
  double cycle_time_ms = 0.0;

  [[nodiscard]] double final_bulk() const { return records.empty() ? 0.0 : records.back().bulk; }
};

/// Per-spin transfer probability of one protocol application, from the
/// closed forms. `spec` carries the field, angle and detuning geometry.
std::vector<double> transfer_probabilities(const BathSample& bath, const SystemSpec& spec, const Protocol& protocol,
                                           const CycleOptions& options);

/// Repeated cycles of optical reset, transfer p <- p + P (p_NV - p),
/// diffusion with the NV in m_s = 0 and nuclear T1 decay over the cycle.
///
/// In expected-value mode one cycle is an affine map p -> G p + h, so
/// stretches of cycles between records are applied as powers of that map.
/// The diffusion window matrix is computed once per engine and shared by
/// every run on the same bath.
class CycleEngine {
 public:
  CycleEngine(const BathSample& bath, CycleOptions options);

  [[nodiscard]] PolarizationTrace run(std::span<const double> transfer, double protocol_duration_us) const;
  [[nodiscard]] const CycleOptions& options() const { return options_; }

 private:
  std::size_t size_ = 0;
  CycleOptions options_;
  Eigen::MatrixXd window_;  // empty when the window is zero
  std::vector<bool> core_;
};

PolarizationTrace polarization_cycle_run(const BathSample& bath, std::span<const double> transfer,
                                         double protocol_duration_us, const CycleOptions& options);

PolarizationTrace polarization_cycle_run(const BathSample& bath, const SystemSpec& spec, const Protocol& protocol,
                                         const CycleOptions& options);

/// Fixed point of dp/dt = gamma (1 - p) - p / T1n.
double steady_state_polarization(double gamma_pol, double t1n);

/// Continuous-time rate equivalent to a per-cycle transfer probability.
double homogenized_rate(double transfer_probability, double cycle_time_ms);

}  // namespace nvdnp
