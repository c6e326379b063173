#include "nvdnp/bath.hpp"

#include "nvdnp/constants.hpp"
#include "nvdnp/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nvdnp {

namespace {

// Positions on the diamond lattice in units of a0/4 are integer vectors:
// sublattice A = 2 (i, j, k) with i + j + k even, sublattice B = A + (1, 1, 1).
using IntSite = std::array<long, 3>;

long norm2(const IntSite& s) { return s[0] * s[0] + s[1] * s[1] + s[2] * s[2]; }

// Dipolar prefactor (mu0/4pi) h gamma_a gamma_b / r^3 in MHz for gammas in
// MHz/T and r in nm.
double dipolar_prefactor(double gamma_a, double gamma_b, double r) {
  const double r_m = r * 1e-9;
  const double hz = constants::mu0_over_4pi * constants::planck * (gamma_a * 1e6) * (gamma_b * 1e6) / (r_m * r_m * r_m);
  return hz * 1e-6;
}

}  // namespace

double BathSpin::coupling_magnitude() const { return std::hypot(a_z, a_x); }

std::vector<bool> BathSample::core_mask() const {
  std::vector<bool> mask(spins.size(), false);
  for (auto i : frozen_core_members) mask.at(i) = true;
  return mask;
}

Eigen::Vector3d nv_axis_111() { return Eigen::Vector3d(1.0, 1.0, 1.0).normalized(); }

std::vector<Eigen::Vector3d> lattice_sites(double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("lattice_sites: negative radius");
  const double unit = constants::lattice_constant / 4.0;
  const double limit = radius / unit;
  const long n = static_cast<long>(std::ceil(limit / 2.0)) + 1;
  const double limit2 = limit * limit;

  std::vector<IntSite> sites;
  for (long i = -n; i <= n; ++i) {
    for (long j = -n; j <= n; ++j) {
      for (long k = -n; k <= n; ++k) {
        if (((i + j + k) % 2) != 0) continue;
        for (long shift = 0; shift <= 1; ++shift) {
          const IntSite s{2 * i + shift, 2 * j + shift, 2 * k + shift};
          const long d2 = norm2(s);
          if (d2 == 0) continue;                            // vacancy
          if (s == IntSite{1, 1, 1}) continue;              // nitrogen
          if (static_cast<double>(d2) > limit2) continue;
          if (std::sqrt(static_cast<double>(d2)) * unit < vacancy_exclusion) continue;
          sites.push_back(s);
        }
      }
    }
  }
  std::sort(sites.begin(), sites.end(), [](const IntSite& a, const IntSite& b) {
    const long na = norm2(a);
    const long nb = norm2(b);
    return na != nb ? na < nb : a < b;
  });

  std::vector<Eigen::Vector3d> out;
  out.reserve(sites.size());
  for (const auto& s : sites) {
    out.emplace_back(unit * static_cast<double>(s[0]), unit * static_cast<double>(s[1]),
                     unit * static_cast<double>(s[2]));
  }
  return out;
}

std::vector<LatticeSite> occupy_sites(std::uint64_t seed, double radius, double abundance) {
  auto engine = make_engine(seed);
  std::vector<LatticeSite> out;
  for (const auto& p : lattice_sites(radius)) {
    out.push_back({p, uniform01(engine) < abundance});
  }
  return out;
}

double radius_for_count(double count, double abundance) {
  if (!(count > 0.0) || !(abundance > 0.0)) {
    throw std::invalid_argument("radius_for_count: count and abundance must be positive");
  }
  const double volume = count / (abundance * constants::carbon_density);
  return std::cbrt(volume * 3.0 / (4.0 * std::numbers::pi));
}

HyperfineCoupling hyperfine_coupling(const Eigen::Vector3d& position, const Eigen::Vector3d& nv_axis) {
  const double r = position.norm();
  if (!(r >= vacancy_exclusion)) {
    throw std::invalid_argument("hyperfine_coupling: position inside the vacancy exclusion radius");
  }
  const double b = dipolar_prefactor(constants::gamma_e, constants::gamma_13c, r);
  const double c = std::clamp(position.dot(nv_axis.normalized()) / r, -1.0, 1.0);
  const double s = std::sqrt(1.0 - c * c);
  return {b * (1.0 - 3.0 * c * c), 3.0 * b * s * c};
}

double nn_dipolar_coupling(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("nn_dipolar_coupling: r must be positive");
  return dipolar_prefactor(constants::gamma_13c, constants::gamma_13c, r);
}

std::vector<std::size_t> frozen_core_partition(const BathSample& bath, double threshold) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < bath.spins.size(); ++i) {
    if (bath.spins[i].coupling_magnitude() >= threshold) members.push_back(i);
  }
  return members;
}

BathSample sample_bath(std::uint64_t seed, double radius, double abundance, double core_threshold) {
  if (!(radius >= 0.5)) throw std::invalid_argument("sample_bath: radius must be at least 0.5 nm");
  if (!(abundance > 0.0 && abundance <= 1.0)) {
    throw std::invalid_argument("sample_bath: abundance must lie in (0, 1]");
  }
  if (!(core_threshold > 0.0)) throw std::invalid_argument("sample_bath: core threshold must be positive");

  BathSample bath;
  bath.seed = seed;
  bath.radius = radius;
  bath.abundance = abundance;
  bath.nv_axis = nv_axis_111();
  bath.core_threshold = core_threshold;
  for (const auto& site : occupy_sites(seed, radius, abundance)) {
    if (!site.occupied) continue;
    const auto hf = hyperfine_coupling(site.position, bath.nv_axis);
    bath.spins.push_back({site.position, hf.a_z, hf.a_x});
  }
  if (bath.spins.empty()) {
    throw std::runtime_error("sample_bath: no 13C spin drawn inside the radius");
  }
  bath.frozen_core_members = frozen_core_partition(bath, core_threshold);
  return bath;
}

double flip_flop_rate(const Eigen::Vector3d& ri, const Eigen::Vector3d& rj, const Eigen::Vector3d& axis,
                      const DiffusionParams& params) {
  const Eigen::Vector3d d = rj - ri;
  const double r = d.norm();
  const double c = d.dot(axis.normalized()) / r;
  const double coupling_hz = 1e6 * nn_dipolar_coupling(r) * (1.0 - 3.0 * c * c) / 4.0;
  const double linewidth_hz = 1e6 * params.linewidth;
  return 4.0 * std::numbers::pi * coupling_hz * coupling_hz / linewidth_hz;
}

DiffusionModel::DiffusionModel(const BathSample& bath, DiffusionParams params) : core_(bath.core_mask()) {
  if (!(params.linewidth > 0.0)) throw std::invalid_argument("DiffusionModel: linewidth must be positive");
  const auto n = static_cast<Eigen::Index>(bath.size());
  rates_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = flip_flop_rate(bath.spins[i].position, bath.spins[j].position, bath.nv_axis, params);
      rates_(i, j) = w;
      rates_(j, i) = w;
    }
  }
}

const DiffusionModel::Spectrum& DiffusionModel::spectrum(bool nv_state_is_zero) const {
  auto it = spectra_.find(nv_state_is_zero);
  if (it != spectra_.end()) return it->second;

  Eigen::MatrixXd w = rates_;
  if (!nv_state_is_zero) {
    // Hyperfine gradient detunes core-bulk flip-flops.
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        if (core_[i] != core_[j]) w(i, j) = 0.0;
      }
    }
  }
  Eigen::MatrixXd generator = -w;
  generator.diagonal() = w.rowwise().sum();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(generator);
  Spectrum s{eig.eigenvalues().cwiseMax(0.0), eig.eigenvectors()};
  return spectra_.emplace(nv_state_is_zero, std::move(s)).first->second;
}

Eigen::MatrixXd DiffusionModel::transfer_matrix(double dt_ms, bool nv_state_is_zero) const {
  if (!(dt_ms >= 0.0)) throw std::invalid_argument("DiffusionModel: negative time step");
  const auto& s = spectrum(nv_state_is_zero);
  const double t = dt_ms * 1e-3;
  const Eigen::VectorXd decay = (-s.eigenvalues * t).array().exp().matrix();
  Eigen::MatrixXd m = s.eigenvectors * decay.asDiagonal() * s.eigenvectors.transpose();
  // Exact exchange conserves the total; remove eigensolver round-off from
  // the column sums.
  const Eigen::RowVectorXd col_sums = m.colwise().sum();
  for (Eigen::Index j = 0; j < m.cols(); ++j) m(j, j) += 1.0 - col_sums(j);
  return m;
}

void DiffusionModel::step(Eigen::VectorXd& polarization, double dt_ms, bool nv_state_is_zero) const {
  if (polarization.size() != rates_.rows()) {
    throw std::invalid_argument("DiffusionModel::step: polarization size does not match the bath");
  }
  auto& cached = last_[nv_state_is_zero ? 1 : 0];
  if (cached.dt_ms != dt_ms || cached.matrix.size() == 0) cached = {dt_ms, transfer_matrix(dt_ms, nv_state_is_zero)};
  polarization = (cached.matrix * polarization).cwiseMax(-1.0).cwiseMin(1.0);
}

std::vector<double> diffusion_step(std::span<const double> polarizations, const BathSample& bath, double dt_ms,
                                   bool nv_state_is_zero, const DiffusionParams& params) {
  if (polarizations.size() != bath.size()) {
    throw std::invalid_argument("diffusion_step: one polarization per bath spin required");
  }
  if (!(dt_ms > 0.0)) throw std::invalid_argument("diffusion_step: dt must be positive");
  for (double p : polarizations) {
    if (!(p >= -1.0 && p <= 1.0)) throw std::invalid_argument("diffusion_step: polarization outside [-1, 1]");
  }
  const DiffusionModel model(bath, params);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(polarizations.data(), static_cast<Eigen::Index>(polarizations.size()));
  model.step(p, dt_ms, nv_state_is_zero);
  return {p.data(), p.data() + p.size()};
}

}  // namespace nvdnp
