#include "nvdnp/instrument.hpp"

#include "nvdnp/bath.hpp"
#include "nvdnp/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace nvdnp {

void ResonatorModel::validate() const {
  if (!(hwhm > 0.0)) throw std::invalid_argument("ResonatorModel: hwhm must be positive");
  if (!std::isfinite(center_freq)) throw std::invalid_argument("ResonatorModel: centre frequency must be finite");
}

void LaserModel::validate() const {
  if (!(reset_fidelity >= 0.0 && reset_fidelity <= 1.0)) {
    throw std::invalid_argument("LaserModel: reset fidelity outside [0, 1]");
  }
  if (!(pump_rate >= 0.0)) throw std::invalid_argument("LaserModel: pump rate must be non-negative");
}

double resonator_amplitude(double detuning_from_center, const ResonatorModel& model) {
  model.validate();
  if (!model.filtering()) return 1.0;
  const double x = detuning_from_center / model.hwhm;
  const double lorentz = 1.0 / (1.0 + x * x);
  return model.shape == ResonatorShape::amplitude ? std::sqrt(lorentz) : lorentz;
}

double effective_rabi(const SystemSpec& spec, const ResonatorModel& model) {
  spec.validate();
  return spec.rabi * resonator_amplitude(transition_frequency(spec) - model.center_freq, model);
}

double optical_reset(double nv_population, const LaserModel& laser) {
  laser.validate();
  if (!(nv_population >= 0.0 && nv_population <= 1.0)) {
    throw std::invalid_argument("optical_reset: population outside [0, 1]");
  }
  return laser.reset_fidelity;
}

AngleSweepResult angle_enhancement_sweep(const std::vector<double>& angles, const SystemSpec& base_spec,
                                         const IseSweep& sweep, const std::vector<std::uint64_t>& bath_seeds,
                                         double bath_radius, double abundance, double core_threshold,
                                         const CycleOptions& cycles, const ResonatorModel& resonator,
                                         const LaserModel& laser, std::size_t threads) {
  if (angles.empty()) throw std::invalid_argument("angle_enhancement_sweep: no angles");
  if (bath_seeds.empty()) throw std::invalid_argument("angle_enhancement_sweep: no bath seeds");
  sweep.validate();
  resonator.validate();

  CycleOptions options = cycles;
  options.reset_fidelity = optical_reset(1.0, laser);
  options.keep_per_spin = false;

  // Per-angle drive: the line moves with theta, Omega follows the resonator.
  struct AngleSetup {
    SystemSpec spec;
    IseSweep sweep;
    int crossings = 0;
  };
  const auto setup = [&](double theta) {
    AngleSetup s{base_spec, sweep, 0};
    s.spec.theta = theta;
    s.spec.rabi = sweep.rabi;
    s.sweep.rabi = effective_rabi(s.spec, resonator);
    s.crossings = ise_crossings_covered(s.spec, s.sweep);
    return s;
  };
  const AngleSetup reference = setup(0.0);
  std::vector<AngleSetup> per_angle;
  per_angle.reserve(angles.size());
  for (double theta : angles) per_angle.push_back(setup(theta));

  AngleSweepResult result;
  result.bulk.assign(bath_seeds.size(), std::vector<double>(angles.size(), 0.0));
  result.reference.assign(bath_seeds.size(), 0.0);

  parallel_for(bath_seeds.size(), threads, [&](std::size_t k) {
    const BathSample bath = sample_bath(bath_seeds[k], bath_radius, abundance, core_threshold);
    const CycleEngine engine(bath, options);
    const auto run = [&](const AngleSetup& s) {
      const auto probs = transfer_probabilities(bath, s.spec, s.sweep, options);
      return engine.run(probs, s.sweep.duration()).final_bulk();
    };
    result.reference[k] = run(reference);
    for (std::size_t a = 0; a < angles.size(); ++a) {
      result.bulk[k][a] = angles[a] == 0.0 ? result.reference[k] : run(per_angle[a]);
    }
  });

  const double n = static_cast<double>(bath_seeds.size());
  for (std::size_t a = 0; a < angles.size(); ++a) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t k = 0; k < bath_seeds.size(); ++k) {
      if (!(result.reference[k] > 0.0)) {
        throw std::runtime_error("angle_enhancement_sweep: no polarization at theta = 0 for a bath seed");
      }
      const double ratio = result.bulk[k][a] / result.reference[k];
      sum += ratio;
      sum2 += ratio * ratio;
    }
    AngleSweepPoint pt;
    pt.theta = angles[a];
    pt.enhancement_mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0)) : 0.0;
    pt.enhancement_stderr = std::sqrt(var / n);
    pt.n_samples = bath_seeds.size();
    pt.effective_rabi = per_angle[a].sweep.rabi;
    pt.crossings = per_angle[a].crossings;
    result.points.push_back(pt);
  }
  return result;
}

}  // namespace nvdnp
