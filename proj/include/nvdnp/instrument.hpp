#pragma once

// Apparatus model: microwave resonator filtering of the drive amplitude,
// optical pumping as a parametric reset, and the misalignment-angle sweep
// of the ISE enhancement.

#include "nvdnp/hamiltonian.hpp"
#include "nvdnp/protocols.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace nvdnp {

enum class ResonatorShape {
  amplitude,  // drive amplitude 1 / sqrt(1 + x^2)
  power,      // 1 / (1 + x^2)
};

struct ResonatorModel {
  double center_freq = 0.0;  // MHz
  double hwhm = 100.0;       // MHz; infinity disables the filter
  ResonatorShape shape = ResonatorShape::amplitude;

  void validate() const;
  [[nodiscard]] bool filtering() const { return hwhm != std::numeric_limits<double>::infinity(); }
};

struct LaserModel {
  double reset_fidelity = 0.96;
  double pump_rate = 1.0;  // kHz

  void validate() const;
};

/// Drive amplitude factor for a line `detuning_from_center` MHz away from the
/// resonator centre. Exactly 1 at zero offset or with the filter disabled.
double resonator_amplitude(double detuning_from_center, const ResonatorModel& model);

/// Omega scaled by the resonator response at the spec's |0> <-> |-1> line.
double effective_rabi(const SystemSpec& spec, const ResonatorModel& model);

/// Memoryless reset: m_s = 0 population after the laser pulse.
double optical_reset(double nv_population, const LaserModel& laser);

struct AngleSweepPoint {
  double theta = 0.0;  // rad
  double enhancement_mean = 0.0;
  double enhancement_stderr = 0.0;
  std::size_t n_samples = 0;
  double effective_rabi = 0.0;  // MHz
  int crossings = 0;
};

struct AngleSweepResult {
  std::vector<AngleSweepPoint> points;
  // bulk[seed][angle] final bulk polarization; reference[seed] at theta = 0.
  std::vector<std::vector<double>> bulk;
  std::vector<double> reference;
};

/// ISE build-up at each angle relative to theta = 0, per bath seed. Each
/// seed's bath and diffusion model are shared across angles; the NV line
/// shifts with theta and Omega passes through the resonator. Seeds are
/// processed on `threads` workers with results assembled by seed index.
AngleSweepResult angle_enhancement_sweep(const std::vector<double>& angles, const SystemSpec& base_spec,
                                         const IseSweep& sweep, const std::vector<std::uint64_t>& bath_seeds,
                                         double bath_radius, double abundance, double core_threshold,
                                         const CycleOptions& cycles, const ResonatorModel& resonator,
                                         const LaserModel& laser, std::size_t threads = 1);

}  // namespace nvdnp
