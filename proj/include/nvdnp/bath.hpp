#pragma once

// 13C bath around an NV centre: lattice sampling at a given abundance,
// point-dipole couplings, frozen-core partition and the pairwise
// flip-flop rate model for spin diffusion.
//
// Lengths in nm, couplings in MHz, diffusion times in ms.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace nvdnp {

struct LatticeSite {
  Eigen::Vector3d position;  // nm, relative to the vacancy
  bool occupied = false;
};

struct BathSpin {
  Eigen::Vector3d position;
  double a_z = 0.0;
  double a_x = 0.0;

  [[nodiscard]] double coupling_magnitude() const;
};

struct BathSample {
  std::vector<BathSpin> spins;
  std::uint64_t seed = 0;
  double radius = 0.0;
  double abundance = 0.0;
  Eigen::Vector3d nv_axis = Eigen::Vector3d::UnitZ();
  double core_threshold = 0.0;  // MHz
  std::vector<std::size_t> frozen_core_members;

  [[nodiscard]] std::size_t size() const { return spins.size(); }
  [[nodiscard]] std::vector<bool> core_mask() const;
};

struct HyperfineCoupling {
  double a_z = 0.0;
  double a_x = 0.0;
};

/// Closest a site may be to the vacancy, nm.
inline constexpr double vacancy_exclusion = 0.15;
/// Default frozen-core threshold on sqrt(a_z^2 + a_x^2), MHz.
inline constexpr double default_core_threshold = 0.010;

/// Unit vector along [111], the NV axis of the sampled lattice.
Eigen::Vector3d nv_axis_111();

/// Diamond lattice sites within `radius` of the vacancy, excluding the
/// vacancy itself and the adjacent nitrogen along [111]. Sorted by distance
/// then by coordinates.
std::vector<Eigen::Vector3d> lattice_sites(double radius);

/// Every lattice site in the ball flagged occupied with probability
/// `abundance`, drawn from the stream of `seed`.
std::vector<LatticeSite> occupy_sites(std::uint64_t seed, double radius, double abundance);

/// Radius whose expected 13C count at `abundance` is `count`.
double radius_for_count(double count, double abundance);

/// Throws std::invalid_argument if radius < 0.5 nm or abundance is outside
/// (0, 1], std::runtime_error if no spin was drawn.
BathSample sample_bath(std::uint64_t seed, double radius, double abundance,
                       double core_threshold = default_core_threshold);

/// Point-dipole NV-13C coupling, a_z = b (1 - 3 cos^2), a_x = 3 b sin cos
/// with b = (mu0/4pi) h gamma_e gamma_n / r^3. Rejects |position| < 0.15 nm.
HyperfineCoupling hyperfine_coupling(const Eigen::Vector3d& position, const Eigen::Vector3d& nv_axis);

/// Homonuclear 13C-13C dipolar prefactor (mu0/4pi) h gamma_n^2 / r^3, MHz.
double nn_dipolar_coupling(double r);

/// Indices with sqrt(a_z^2 + a_x^2) >= threshold.
std::vector<std::size_t> frozen_core_partition(const BathSample& bath, double threshold);

struct DiffusionParams {
  double linewidth = 0.002;  // MHz, sets the flip-flop lineshape
};

/// Flip-flop rate between two 13C spins in 1/s,
/// W = 4 pi c^2 / linewidth with c = b(r) (1 - 3 cos^2 theta) / 4 in Hz.
double flip_flop_rate(const Eigen::Vector3d& ri, const Eigen::Vector3d& rj, const Eigen::Vector3d& axis,
                      const DiffusionParams& params = {});

/// Pairwise master equation dp_i/dt = sum_j W_ij (p_j - p_i) over a bath,
/// integrated exactly through the eigendecomposition of the symmetric rate
/// generator. With the NV outside m_s = 0 the core-bulk rates vanish.
class DiffusionModel {
 public:
  explicit DiffusionModel(const BathSample& bath, DiffusionParams params = {});

  /// exp(-L dt) for dt in ms. Columns sum to one.
  [[nodiscard]] Eigen::MatrixXd transfer_matrix(double dt_ms, bool nv_state_is_zero) const;

  /// Advances `polarization` in place, clamped to [-1, 1]. The transfer
  /// matrix of the last dt is kept per NV state, so repeated steps of equal
  /// length cost one matrix-vector product. Not safe for concurrent calls.
  void step(Eigen::VectorXd& polarization, double dt_ms, bool nv_state_is_zero) const;

  [[nodiscard]] const Eigen::MatrixXd& rates() const { return rates_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(rates_.rows()); }

 private:
  struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
  };
  const Spectrum& spectrum(bool nv_state_is_zero) const;

  Eigen::MatrixXd rates_;
  std::vector<bool> core_;
  mutable std::map<bool, Spectrum> spectra_;
  struct CachedStep {
    double dt_ms = -1.0;
    Eigen::MatrixXd matrix;
  };
  mutable std::array<CachedStep, 2> last_;  // indexed by nv_state_is_zero
};

/// One diffusion interval. Polarizations must lie in [-1, 1] and dt > 0.
std::vector<double> diffusion_step(std::span<const double> polarizations, const BathSample& bath, double dt_ms,
                                   bool nv_state_is_zero, const DiffusionParams& params = {});

}  // namespace nvdnp
