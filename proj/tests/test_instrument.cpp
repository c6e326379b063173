#include "nvdnp/instrument.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace nvdnp;

namespace {

constexpr double deg = std::numbers::pi / 180.0;

ResonatorModel centred_resonator(const SystemSpec& spec) {
  SystemSpec aligned = spec;
  aligned.theta = 0.0;
  ResonatorModel m;
  m.center_freq = transition_frequency(aligned);
  return m;
}

}  // namespace

TEST_CASE("resonator_amplitude: Lorentzian values") {
  const ResonatorModel m;
  CHECK(resonator_amplitude(0.0, m) == 1.0);
  CHECK(resonator_amplitude(100.0, m) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(resonator_amplitude(100.0, m) == doctest::Approx(0.7071).epsilon(1e-4));
  for (double x : {0.3, 17.0, 99.0, 250.0, 1e4}) {
    CHECK(resonator_amplitude(x, m) == resonator_amplitude(-x, m));
    CHECK(resonator_amplitude(x, m) < 1.0);
    CHECK(resonator_amplitude(x, m) > 0.0);
  }
  ResonatorModel power = m;
  power.shape = ResonatorShape::power;
  CHECK(resonator_amplitude(100.0, power) == doctest::Approx(0.5).epsilon(1e-15));

  ResonatorModel open;
  open.hwhm = std::numeric_limits<double>::infinity();
  CHECK(resonator_amplitude(1e6, open) == 1.0);
  ResonatorModel bad;
  bad.hwhm = 0.0;
  CHECK_THROWS_AS(resonator_amplitude(1.0, bad), std::invalid_argument);
}

TEST_CASE("effective_rabi: composition of the line shift and the filter") {
  SystemSpec s;
  s.rabi = 1.0;
  const ResonatorModel m = centred_resonator(s);
  CHECK(effective_rabi(s, m) == s.rabi);

  s.theta = 10.0 * deg;
  const double shift = transition_frequency(s) - m.center_freq;
  CHECK(effective_rabi(s, m) == doctest::Approx(1.0 / std::sqrt(1.0 + std::pow(shift / 100.0, 2))).epsilon(1e-14));
  // First order alone moves the line 126.7 MHz (factor 0.62); the second-order
  // term adds 15.4 MHz at 0.4548 T.
  CHECK(shift == doctest::Approx(142.04).epsilon(1e-4));
  CHECK(1.0 / std::sqrt(1.0 + 1.267 * 1.267) == doctest::Approx(0.62).epsilon(0.01));
  CHECK(effective_rabi(s, m) == doctest::Approx(0.576).epsilon(1e-3));

  double previous = 2.0;
  for (int k = 0; k <= 150; ++k) {
    s.theta = 0.1 * k * deg;
    const double r = effective_rabi(s, m);
    CHECK(r <= previous);
    previous = r;
  }
}

TEST_CASE("optical_reset: memoryless") {
  LaserModel laser;
  for (double x : {0.0, 0.3, 1.0}) CHECK(optical_reset(x, laser) == 0.96);
  laser.reset_fidelity = 1.0;
  CHECK(optical_reset(0.5, laser) == 1.0);
  laser.reset_fidelity = 0.0;
  CHECK(optical_reset(0.5, laser) == 0.0);
  CHECK_THROWS_AS(optical_reset(1.2, laser), std::invalid_argument);
  laser.reset_fidelity = 1.1;
  CHECK_THROWS_AS(optical_reset(0.5, laser), std::invalid_argument);
}

TEST_CASE("angle_enhancement_sweep: normalization, filter and thread count") {
  SystemSpec base;
  const ResonatorModel res = centred_resonator(base);
  IseSweep sweep;
  sweep.rabi = 1.0;
  sweep.range = 100.0;
  sweep.center_freq = res.center_freq + 44.0;
  CycleOptions cycles;
  cycles.n_cycles = 2000;
  cycles.record_every = 2000;
  cycles.t1n = 300.0;
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const std::vector<double> angles{0.0, 4.0 * deg, 8.0 * deg};

  const auto single = angle_enhancement_sweep({0.0}, base, sweep, seeds, 2.5, 0.011, 0.010, cycles, res, {}, 1);
  CHECK(single.points.at(0).enhancement_mean == 1.0);
  CHECK(single.points.at(0).enhancement_stderr == 0.0);

  const auto filtered = angle_enhancement_sweep(angles, base, sweep, seeds, 2.5, 0.011, 0.010, cycles, res, {}, 1);
  REQUIRE(filtered.points.size() == 3);
  CHECK(filtered.points[0].enhancement_mean == 1.0);
  CHECK(filtered.points[1].enhancement_mean < 1.0);
  CHECK(filtered.points[2].enhancement_mean < filtered.points[1].enhancement_mean);
  CHECK(filtered.points[2].n_samples == 3);

  const auto threaded = angle_enhancement_sweep(angles, base, sweep, seeds, 2.5, 0.011, 0.010, cycles, res, {}, 3);
  for (std::size_t a = 0; a < angles.size(); ++a) {
    CHECK(threaded.points[a].enhancement_mean == filtered.points[a].enhancement_mean);
    CHECK(threaded.points[a].enhancement_stderr == filtered.points[a].enhancement_stderr);
  }

  // Without the filter, Omega is untouched and the result is bit-identical to
  // running the cycle engine directly.
  ResonatorModel open = res;
  open.hwhm = std::numeric_limits<double>::infinity();
  const auto flat = angle_enhancement_sweep(angles, base, sweep, seeds, 2.5, 0.011, 0.010, cycles, open, {}, 1);
  const BathSample bath = sample_bath(seeds[0], 2.5, 0.011, 0.010);
  SystemSpec tilted = base;
  tilted.theta = angles[1];
  CycleOptions direct_opts = cycles;
  const auto direct = polarization_cycle_run(bath, tilted, sweep, direct_opts);
  CHECK(flat.bulk[0][1] == direct.final_bulk());
  CHECK(flat.points[1].effective_rabi == sweep.rabi);

  CHECK_THROWS_AS(angle_enhancement_sweep({}, base, sweep, seeds, 2.5, 0.011, 0.010, cycles, res, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(angle_enhancement_sweep(angles, base, sweep, {}, 2.5, 0.011, 0.010, cycles, res, {}, 1),
                  std::invalid_argument);
}
