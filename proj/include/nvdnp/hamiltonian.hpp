#pragma once

// Rotating-frame NV / 13C pair Hamiltonian on the {|0>, |-1>} electron
// subspace, its dressed states and resonance points, and the lab-frame
// spin-1 Hamiltonian used to check the angle-dependent zero-field terms.
//
// Electron basis of the rotating-frame operators: (|+>, |->) with
// |+-> = (|0> +- |-1>)/sqrt(2); sigma_x, sigma_z are half-Pauli matrices in
// that basis. Nuclear basis: (up, down).

#include "nvdnp/constants.hpp"
#include "nvdnp/spinops.hpp"

#include <array>

namespace nvdnp {

struct SystemSpec {
  double zfs = constants::zero_field_splitting;  // D, MHz
  double gamma_e = constants::gamma_e;           // MHz/T
  double gamma_n = constants::gamma_13c;         // MHz/T
  double field = constants::default_field;       // B, T
  double theta = 0.0;                            // NV axis vs field, rad
  double rabi = 0.0;                             // Omega, MHz
  double drive_freq = 0.0;                       // omega_M, MHz
  double a_z = 0.0;                              // secular hyperfine, MHz
  double a_x = 0.0;                              // pseudo-secular hyperfine, MHz
  // A in B_eff = gamma_n B - A, as a multiple of a_z.
  double hyperfine_shift_scale = 0.5;

  /// Throws std::invalid_argument on unphysical values.
  void validate() const;

  [[nodiscard]] bool strong_field() const { return gamma_e * field > 2.0 * zfs; }
  [[nodiscard]] double electron_larmor() const { return gamma_e * field; }
  [[nodiscard]] double nuclear_larmor() const { return gamma_n * field; }
  [[nodiscard]] double effective_nuclear_field() const {
    return nuclear_larmor() - hyperfine_shift_scale * a_z;
  }
};

struct ZfsShift {
  double d_theta = 0.0;      // D(theta), MHz
  double delta_theta = 0.0;  // delta(theta), MHz
};

/// Angle-dependent zero-field terms in the strong-field limit. The
/// |0> <-> |-1> line sits at gamma_e B - D(theta) + delta(theta).
/// Throws std::domain_error when gamma_e B <= 2 D; use
/// lab_transition_frequency() there.
ZfsShift zfs_shift(double zfs, double gamma_e_field, double theta);

/// |0> <-> |-1> ESR transition frequency from the perturbative shifts, MHz.
double transition_frequency(const SystemSpec& spec);

/// Delta = D(theta) - delta(theta) - gamma_e B + omega_M.
double detuning(const SystemSpec& spec);

/// H_trans split as fixed + Delta * detuning_term, so that sweeps only
/// rescale one matrix.
struct HtransTerms {
  ComplexMatrix fixed;
  ComplexMatrix detuning_term;

  [[nodiscard]] ComplexMatrix at(double delta) const { return fixed + delta * detuning_term; }
};

HtransTerms htrans_terms(const SystemSpec& spec);

/// 4x4 rotating-frame Hamiltonian in MHz:
/// Omega sz + Delta sx + B_eff Iz + a_z sz Iz + a_x sx Ix.
ComplexMatrix build_htrans(const SystemSpec& spec);

/// Same with an explicit detuning instead of the one implied by drive_freq.
ComplexMatrix build_htrans(const SystemSpec& spec, double delta);

struct DressedState {
  double mixing_angle = 0.0;          // zeta, rad
  std::array<double, 2> energies{};   // {upper, lower}, MHz
  std::array<Eigen::Vector2cd, 2> states;  // {upper, lower} in (|+>, |->)
};

/// Eigenstates of Omega sz + Delta sx. The upper state is
/// cos(zeta)|+> + sin(zeta)|->, the lower one -sin(zeta)|+> + cos(zeta)|->,
/// with zeta in (-pi/2, pi/2]. Throws std::invalid_argument if both vanish.
DressedState dressed_states(double delta, double rabi);

struct ResonancePoints {
  double a1 = 0.0;  // negative-detuning crossing, MHz
  double a2 = 0.0;  // positive-detuning crossing, MHz
};

/// Detunings at which the dressed splitting sqrt(Omega^2 + Delta^2) equals
/// the nuclear Larmor frequency. Throws std::domain_error if Omega exceeds it.
ResonancePoints resonance_detunings(double rabi, double nuclear_larmor);

/// 6x6 lab-frame Hamiltonian on spin-1 (x) spin-1/2, field along z and the NV
/// axis tilted by theta in the x-z plane:
/// D (n.S)^2 + gamma_e B Sz + gamma_n B Iz + a_z Sz Iz + a_x Sz Ix.
/// Basis: (|+1>, |0>, |-1>) (x) (up, down).
ComplexMatrix full_lab_hamiltonian(const SystemSpec& spec);

/// |0> <-> |-1> transition frequency (nuclear spin up manifold) by exact
/// diagonalization of full_lab_hamiltonian(). Valid at any field.
double lab_transition_frequency(const SystemSpec& spec);

}  // namespace nvdnp
