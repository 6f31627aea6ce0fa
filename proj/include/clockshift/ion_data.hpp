#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clockshift/angular_momentum.hpp"

namespace clockshift {

/// One fine-structure level. Hyperfine constants are held in Hz.
struct FineStructureLevel {
  std::string label;
  HalfInt J;
  double g_J = 0.0;
  double A_hz = 0.0;
  double B_hz = 0.0;
  std::optional<double> theta_au;
  std::optional<double> alpha2J_au;
};

struct ClockTransition {
  std::string lower;  ///< level label
  std::string upper;  ///< level label
  double frequency_hz = 0.0;
  std::optional<double> delta_alpha0_au;
};

/// Nuclear data plus the fine-structure levels of one ion.
///
/// g_I is in Bohr-magneton units and enters the Zeeman Hamiltonian as
/// +g_I mu_B B I_z; its sign is whatever the input declares.
struct IonSpecies {
  std::string name;
  HalfInt I;
  double g_I = 0.0;
  int charge_number = 1;
  double mass_amu = 0.0;
  std::vector<FineStructureLevel> levels;
  std::vector<ClockTransition> transitions;

  const FineStructureLevel& level(std::string_view label) const;
  /// Transition by "lower->upper" labels, or the first one when the selector is empty.
  const ClockTransition& transition(std::string_view selector = {}) const;
};

/// All F with |I - J| <= F <= I + J, ascending.
std::vector<HalfInt> hyperfine_F_values(HalfInt I, HalfInt J);

/// Zero-field hyperfine energy of F in Hz (A and B formula).
double hyperfine_energy(const FineStructureLevel& level, HalfInt I, HalfInt F);

/// Throws InputError naming the offending entry if any invariant fails.
void validate(const IonSpecies& species);

/// Parses an ion-definition document (YAML). Unknown keys are rejected.
IonSpecies load_species(std::string_view document);
IonSpecies load_species_file(const std::filesystem::path& path);

/// Emits a document that load_species reads back to the same values.
std::string serialize_species(const IonSpecies& species);

}  // namespace clockshift
