#pragma once

// Physical constants and unit conversions. Internal units: Hz for energies
// (E/h), tesla for fields, SI otherwise.

#include <numbers>

namespace clockshift::units {

/// Bohr magneton over Planck's constant, Hz/T.
inline constexpr double bohr_magneton_hz_per_tesla = 13.9962449361e9;

inline constexpr double planck = 6.62607015e-34;  // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double fine_structure = 7.2973525693e-3;
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

/// One atomic unit of polarizability in C^2 m^2 / J.
inline constexpr double polarizability_au = 1.648777274e-41;

inline constexpr double hz_per_mhz = 1e6;
inline constexpr double hz_per_thz = 1e12;
inline constexpr double tesla_per_millitesla = 1e-3;

/// Hz/T^2 -> kHz/mT^2.
inline constexpr double khz_per_mt2_per_hz_per_t2 = 1e-3 * 1e-6;

inline constexpr double polarizability_to_si(double alpha_au) { return alpha_au * polarizability_au; }

}  // namespace clockshift::units
