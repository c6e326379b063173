#include "nvdnp/bath.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace nvdnp;

namespace {

// Hand-built bath; core membership is set explicitly.
BathSample manual_bath(const std::vector<Eigen::Vector3d>& positions, std::vector<std::size_t> core = {}) {
  BathSample bath;
  bath.nv_axis = Eigen::Vector3d::UnitZ();
  for (const auto& p : positions) bath.spins.push_back({p, 0.0, 0.0});
  bath.frozen_core_members = std::move(core);
  return bath;
}

Eigen::Matrix3d rotation(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(c, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

TEST_CASE("lattice_sites: counts from an independent fcc construction") {
  // fcc cell plus (1/4, 1/4, 1/4) basis, vacancy and [111] nitrogen removed.
  CHECK(lattice_sites(0.5).size() == 85);
  CHECK(lattice_sites(1.0).size() == 727);
  CHECK(lattice_sites(3.0).size() == 19883);

  for (const auto& p : lattice_sites(1.0)) CHECK(p.norm() >= vacancy_exclusion);
  const auto sites = lattice_sites(0.4);
  for (std::size_t i = 1; i < sites.size(); ++i) CHECK(sites[i - 1].norm() <= sites[i].norm() + 1e-12);
  // Nearest carbons sit one bond length away.
  CHECK(sites.front().norm() == doctest::Approx(0.154).epsilon(0.01));
}

TEST_CASE("sample_bath: full abundance occupies every site") {
  const auto bath = sample_bath(1, 0.5, 1.0);
  CHECK(bath.size() == lattice_sites(0.5).size());
}

TEST_CASE("sample_bath: binomial mean count") {
  const double sites = static_cast<double>(lattice_sites(3.0).size());
  const double p = 0.011;
  const int seeds = 200;
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) sum += static_cast<double>(sample_bath(static_cast<std::uint64_t>(s), 3.0, p).size());
  const double mean = sum / seeds;
  const double expected = p * sites;
  const double se = std::sqrt(sites * p * (1.0 - p) / seeds);
  CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("sample_bath: radius for 500 spins") {
  const double r = radius_for_count(500.0, 0.011);
  CHECK(r == doctest::Approx(3.95).epsilon(2e-3));
  double sum = 0.0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    sum += static_cast<double>(sample_bath(static_cast<std::uint64_t>(seed), r, 0.011).size());
  }
  CHECK(std::abs(sum / seeds - 500.0) <= 50.0);
}

TEST_CASE("sample_bath: reproducible and validated") {
  const auto a = sample_bath(42, 2.0, 0.011);
  const auto b = sample_bath(42, 2.0, 0.011);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.spins[i].position == b.spins[i].position);
    CHECK(a.spins[i].a_z == b.spins[i].a_z);
    CHECK(a.spins[i].a_x == b.spins[i].a_x);
  }
  CHECK(a.frozen_core_members == b.frozen_core_members);
  CHECK(sample_bath(43, 2.0, 0.011).spins.front().position != a.spins.front().position);

  CHECK_THROWS_AS(sample_bath(1, 0.4, 0.011), std::invalid_argument);
  CHECK_THROWS_AS(sample_bath(1, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_bath(1, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(sample_bath(1, 0.5, 1e-9), std::runtime_error);
}

TEST_CASE("hyperfine_coupling: angular zeros and r^-3 law") {
  const Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  const double magic = std::acos(1.0 / std::sqrt(3.0));
  const Eigen::Vector3d at_magic(std::sin(magic), 0.0, std::cos(magic));
  CHECK(std::abs(hyperfine_coupling(1.5 * at_magic, axis).a_z) < 1e-15);

  const auto on_axis = hyperfine_coupling(Eigen::Vector3d(0, 0, 2.0), axis);
  // (mu0/4pi) h gamma_e gamma_n / (2 nm)^3 = 2.4857 kHz; a_z = -2 b.
  CHECK(on_axis.a_z == doctest::Approx(-2.0 * 2.48573e-3).epsilon(1e-4));
  CHECK(on_axis.a_x == doctest::Approx(0.0));
  CHECK(std::abs(on_axis.a_z) >= 0.010 / 4.0);
  CHECK(std::abs(on_axis.a_z) <= 0.010 * 4.0);

  const Eigen::Vector3d dir = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  const auto near = hyperfine_coupling(1.1 * dir, axis);
  const auto far = hyperfine_coupling(2.2 * dir, axis);
  CHECK(far.a_z * 8.0 == doctest::Approx(near.a_z).epsilon(1e-12));
  CHECK(far.a_x * 8.0 == doctest::Approx(near.a_x).epsilon(1e-12));
  CHECK(std::abs(far.a_z) < std::abs(near.a_z));

  CHECK_THROWS_AS(hyperfine_coupling(Eigen::Vector3d(0.1, 0, 0), axis), std::invalid_argument);
}

TEST_CASE("hyperfine_coupling: rotation covariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d pos = Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized() * (0.5 + 2.0 * std::abs(u(rng)));
    const Eigen::Vector3d axis = Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
    const Eigen::Matrix3d rot = rotation(3 * u(rng), 3 * u(rng), 3 * u(rng));
    const auto a = hyperfine_coupling(pos, axis);
    const auto b = hyperfine_coupling(rot * pos, rot * axis);
    const double scale = std::hypot(a.a_z, a.a_x);
    CHECK(std::abs(a.a_z - b.a_z) <= 1e-12 * scale);
    CHECK(std::abs(a.a_x - b.a_x) <= 1e-12 * scale);
  }
}

TEST_CASE("nn_dipolar_coupling: next-neighbour values") {
  const double bond = nn_dipolar_coupling(0.154);
  CHECK(bond == doctest::Approx(2.08e-3).epsilon(5e-3));
  CHECK(std::abs(bond - 2.1e-3) <= 0.15 * 2.1e-3);
  CHECK(nn_dipolar_coupling(0.308) * 8.0 == doctest::Approx(bond).epsilon(1e-12));
  CHECK(nn_dipolar_coupling(0.357) == doctest::Approx(0.17e-3).epsilon(0.02));
  CHECK_THROWS_AS(nn_dipolar_coupling(0.0), std::invalid_argument);
}

TEST_CASE("frozen_core_partition: limits, monotonicity and extent") {
  const auto bath = sample_bath(7, radius_for_count(500.0, 0.011), 0.011);
  CHECK(frozen_core_partition(bath, 1e-300).size() == bath.size());
  CHECK(frozen_core_partition(bath, std::numeric_limits<double>::infinity()).empty());

  std::size_t previous = bath.size();
  for (double t : {1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1}) {
    const auto members = frozen_core_partition(bath, t);
    CHECK(members.size() <= previous);
    previous = members.size();
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = sample_bath(seed, 3.0, 0.011);
    for (auto i : b.frozen_core_members) {
      CHECK(b.spins[i].position.norm() <= 3.0);
      CHECK(b.spins[i].coupling_magnitude() >= default_core_threshold);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      const bool member = std::find(b.frozen_core_members.begin(), b.frozen_core_members.end(), i) !=
                          b.frozen_core_members.end();
      CHECK(member == (b.spins[i].coupling_magnitude() >= default_core_threshold));
    }
  }
}

TEST_CASE("flip_flop_rate: angular zero and r^-6 law") {
  const Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  const double magic = std::acos(1.0 / std::sqrt(3.0));
  CHECK(flip_flop_rate(origin, Eigen::Vector3d(std::sin(magic), 0, std::cos(magic)) * 0.3, axis) < 1e-20);
  const Eigen::Vector3d d = Eigen::Vector3d(0.1, 0.2, 0.3);
  CHECK(flip_flop_rate(origin, 2.0 * d, axis) * 64.0 == doctest::Approx(flip_flop_rate(origin, d, axis)).epsilon(1e-12));
  CHECK(flip_flop_rate(origin, d, axis) == doctest::Approx(flip_flop_rate(d, origin, axis)).epsilon(1e-15));
}

TEST_CASE("diffusion_step: two spins equilibrate") {
  const auto bath = manual_bath({Eigen::Vector3d(0, 0, 0.5), Eigen::Vector3d(0, 0, 0.654)});
  const std::vector<double> p{1.0, 0.0};
  const auto out = diffusion_step(p, bath, 1e6, true);
  CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-12));

  // Short step against the closed form p0 = (1 + exp(-2 W t)) / 2.
  const double w = flip_flop_rate(bath.spins[0].position, bath.spins[1].position, bath.nv_axis);
  const double t_ms = 0.2 / w * 1e3;
  const auto short_step = diffusion_step(p, bath, t_ms, true);
  CHECK(short_step[0] == doctest::Approx(0.5 * (1.0 + std::exp(-0.4))).epsilon(1e-10));
}

TEST_CASE("diffusion_step: uniform state is a fixed point") {
  const auto bath = sample_bath(3, 1.5, 0.05);
  const std::vector<double> p(bath.size(), 0.37);
  for (double dt : {0.01, 1.0, 100.0}) {
    for (bool nv_zero : {true, false}) {
      const auto out = diffusion_step(p, bath, dt, nv_zero);
      for (double x : out) CHECK(x == doctest::Approx(0.37).epsilon(1e-10));
    }
  }
}

TEST_CASE("diffusion_step: NV outside m_s = 0 isolates the core") {
  const auto bath = manual_bath(
      {Eigen::Vector3d(0, 0, 0.5), Eigen::Vector3d(0, 0, 0.654), Eigen::Vector3d(0, 0, 0.808),
       Eigen::Vector3d(0.154, 0, 0.808)},
      {0});
  const DiffusionModel model(bath);
  const Eigen::MatrixXd blocked = model.transfer_matrix(50.0, false);
  CHECK(blocked(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  for (int j = 1; j < 4; ++j) {
    CHECK(std::abs(blocked(0, j)) < 1e-12);
    CHECK(std::abs(blocked(j, 0)) < 1e-12);
  }
  // Bulk-bulk exchange proceeds as without the core.
  const auto bulk_only = manual_bath({bath.spins[1].position, bath.spins[2].position, bath.spins[3].position});
  const Eigen::MatrixXd reference = DiffusionModel(bulk_only).transfer_matrix(50.0, true);
  CHECK((blocked.bottomRightCorner(3, 3) - reference).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd open = model.transfer_matrix(50.0, true);
  CHECK(open(1, 0) > 1e-3);
}

TEST_CASE("diffusion_step: conservation over many steps") {
  const auto bath = sample_bath(11, 2.5, 0.011);
  const DiffusionModel model(bath);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd p(static_cast<Eigen::Index>(bath.size()));
  for (auto& x : p) x = u(rng);
  const double total = p.sum();
  for (int k = 0; k < 10000; ++k) model.step(p, 1.0, k % 2 == 0);
  CHECK(std::abs(p.sum() - total) <= 1e-9);
  CHECK(p.maxCoeff() <= 1.0);
  CHECK(p.minCoeff() >= -1.0);

  const Eigen::MatrixXd m = model.transfer_matrix(10.0, true);
  CHECK((m.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("diffusion_step: input validation") {
  const auto bath = manual_bath({Eigen::Vector3d(0, 0, 0.5), Eigen::Vector3d(0, 0, 0.654)});
  CHECK_THROWS_AS(diffusion_step(std::vector<double>{1.5, 0.0}, bath, 1.0, true), std::invalid_argument);
  CHECK_THROWS_AS(diffusion_step(std::vector<double>{0.5, 0.0}, bath, 0.0, true), std::invalid_argument);
  CHECK_THROWS_AS(diffusion_step(std::vector<double>{0.5}, bath, 1.0, true), std::invalid_argument);
}
