#include "nvdnp/hamiltonian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nvdnp {

namespace {

using C = std::complex<double>;

// Half-Pauli operators in the (|+>, |->) dressed basis and the nuclear ones.
struct PairOperators {
  ComplexMatrix sz, sx, iz, ix;
};

const PairOperators& pair_operators() {
  static const PairOperators ops = [] {
    const auto half = spin_operators(2);
    const ComplexMatrix id2 = identity(2);
    return PairOperators{kron(half.z, id2), kron(half.x, id2), kron(id2, half.z), kron(id2, half.x)};
  }();
  return ops;
}

}  // namespace

void SystemSpec::validate() const {
  if (!(zfs > 0.0)) throw std::invalid_argument("SystemSpec: D must be positive");
  if (!(field >= 0.0)) throw std::invalid_argument("SystemSpec: B must be non-negative");
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2 + 1e-15)) {
    throw std::invalid_argument("SystemSpec: theta must lie in [0, pi/2]");
  }
  if (!(rabi >= 0.0)) throw std::invalid_argument("SystemSpec: Omega must be non-negative");
  if (!std::isfinite(drive_freq) || !std::isfinite(a_z) || !std::isfinite(a_x) ||
      !std::isfinite(gamma_e) || !std::isfinite(gamma_n) || !std::isfinite(hyperfine_shift_scale)) {
    throw std::invalid_argument("SystemSpec: non-finite parameter");
  }
}

ZfsShift zfs_shift(double zfs, double gamma_e_field, double theta) {
  if (!(gamma_e_field > 2.0 * zfs)) {
    throw std::domain_error(
        "zfs_shift: strong-field condition gamma_e B > 2 D violated; use lab_transition_frequency");
  }
  const double s2 = std::sin(theta) * std::sin(theta);
  const double c2 = 1.0 - s2;
  const double w = gamma_e_field;
  const double d_theta = zfs * (3.0 * c2 - 1.0) / 2.0;
  // Second order in the off-axis zero-field terms, with the Delta m = 1
  // denominators corrected by the first-order D(theta) shift.
  const double dm1 = 0.5 * zfs * zfs * s2 * c2 * (2.0 * d_theta / (w * w - d_theta * d_theta) + 1.0 / (w - d_theta));
  const double dm2 = zfs * zfs * s2 * s2 / (8.0 * w);
  return {d_theta, dm1 + dm2};
}

double transition_frequency(const SystemSpec& spec) {
  const auto shift = zfs_shift(spec.zfs, spec.electron_larmor(), spec.theta);
  return spec.electron_larmor() - shift.d_theta + shift.delta_theta;
}

double detuning(const SystemSpec& spec) {
  const auto shift = zfs_shift(spec.zfs, spec.electron_larmor(), spec.theta);
  return shift.d_theta - shift.delta_theta - spec.electron_larmor() + spec.drive_freq;
}

HtransTerms htrans_terms(const SystemSpec& spec) {
  spec.validate();
  const auto& op = pair_operators();
  HtransTerms terms;
  terms.fixed = spec.rabi * op.sz + spec.effective_nuclear_field() * op.iz + spec.a_z * (op.sz * op.iz) +
                spec.a_x * (op.sx * op.ix);
  terms.detuning_term = op.sx;
  return terms;
}

ComplexMatrix build_htrans(const SystemSpec& spec, double delta) { return htrans_terms(spec).at(delta); }

ComplexMatrix build_htrans(const SystemSpec& spec) { return build_htrans(spec, detuning(spec)); }

DressedState dressed_states(double delta, double rabi) {
  if (delta == 0.0 && rabi == 0.0) {
    throw std::invalid_argument("dressed_states: Delta = Omega = 0 is degenerate");
  }
  Eigen::Matrix2d h;
  h << 0.5 * rabi, 0.5 * delta, 0.5 * delta, -0.5 * rabi;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h);
  // Eigen sorts ascending: column 1 is the upper state.
  Eigen::Vector2d upper = eig.eigenvectors().col(1);
  // Gauge: positive |+> amplitude, or positive |-> amplitude if |+> vanishes.
  if (upper(0) < 0.0 || (upper(0) == 0.0 && upper(1) < 0.0)) upper = -upper;
  const double zeta = std::atan2(upper(1), upper(0));
  const Eigen::Vector2d lower(-upper(1), upper(0));

  DressedState out;
  out.mixing_angle = zeta;
  out.energies = {eig.eigenvalues()(1), eig.eigenvalues()(0)};
  out.states = {upper.cast<C>(), lower.cast<C>()};
  return out;
}

ResonancePoints resonance_detunings(double rabi, double nuclear_larmor) {
  if (!(nuclear_larmor > 0.0) || !(rabi >= 0.0)) {
    throw std::invalid_argument("resonance_detunings: need Omega >= 0 and a positive Larmor frequency");
  }
  if (rabi > nuclear_larmor) {
    throw std::domain_error("resonance_detunings: Omega exceeds the nuclear Larmor frequency; no crossing");
  }
  const double d = std::sqrt((nuclear_larmor - rabi) * (nuclear_larmor + rabi));
  return {-d, d};
}

ComplexMatrix full_lab_hamiltonian(const SystemSpec& spec) {
  spec.validate();
  const auto s = spin_operators(3);
  const auto i = spin_operators(2);
  const ComplexMatrix id3 = identity(3);
  const ComplexMatrix id2 = identity(2);
  const ComplexMatrix sn = std::sin(spec.theta) * s.x + std::cos(spec.theta) * s.z;
  const ComplexMatrix electron = spec.zfs * (sn * sn) + spec.electron_larmor() * s.z;
  ComplexMatrix h = kron(electron, id2) + spec.nuclear_larmor() * kron(id3, i.z) +
                    spec.a_z * kron(s.z, i.z) + spec.a_x * kron(s.z, i.x);
  return h;
}

double lab_transition_frequency(const SystemSpec& spec) {
  const ComplexMatrix h = full_lab_hamiltonian(spec);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  // Basis index of |m, up>: 2 * (1 - m).
  constexpr Eigen::Index zero_up = 2;
  constexpr Eigen::Index minus_up = 4;
  Eigen::Index best_zero = 0;
  Eigen::Index best_minus = 0;
  double w_zero = -1.0;
  double w_minus = -1.0;
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    const double wz = std::norm(eig.eigenvectors()(zero_up, k));
    const double wm = std::norm(eig.eigenvectors()(minus_up, k));
    if (wz > w_zero) {
      w_zero = wz;
      best_zero = k;
    }
    if (wm > w_minus) {
      w_minus = wm;
      best_minus = k;
    }
  }
  return eig.eigenvalues()(best_zero) - eig.eigenvalues()(best_minus);
}

}  // namespace nvdnp
