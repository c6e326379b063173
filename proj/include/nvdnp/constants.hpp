#pragma once

#include <numbers>

namespace nvdnp::constants {

// Gyromagnetic ratios in MHz/T.
inline constexpr double gamma_e = 28024.95;
inline constexpr double gamma_13c = 10.7084;

// NV ground-state zero-field splitting, MHz.
inline constexpr double zero_field_splitting = 2800.0;

// Field at which the 13C Larmor frequency is 4.87 MHz, T.
inline constexpr double default_field = 0.4548;

// mu0 / (4 pi), T^2 m^3 / J
inline constexpr double mu0_over_4pi = 1e-7;
// Planck constant, J s
inline constexpr double planck = 6.62607015e-34;

// Diamond lattice, nm and nm^-3.
inline constexpr double lattice_constant = 0.357;
inline constexpr double bond_length = 0.154;
inline constexpr double carbon_density = 176.0;
inline constexpr double natural_abundance_13c = 0.011;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace nvdnp::constants
