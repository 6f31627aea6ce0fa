#pragma once

#include <random>
#include <string>
#include <vector>

#include "clockshift/ion_data.hpp"
#include "clockshift/zeeman_spectrum.hpp"
#include "oracles.hpp"

namespace fixtures {

inline std::string data(const std::string& name) {
  return std::string(CLOCKSHIFT_DATA_DIR) + "/" + name;
}

struct SpeciesCase {
  const char* file;
  double B_max;  ///< T, a tracking-safe range
};

inline const std::vector<SpeciesCase>& species_cases() {
  static const std::vector<SpeciesCase> cases = {
      {"ca43.yaml", 5e-3},        {"sr87.yaml", 20e-3},         {"ba137.yaml", 80e-3},
      {"lu175_plus.yaml", 0.1},   {"lu176_plus.yaml", 0.8},     {"lu175_2plus.yaml", 0.3}};
  return cases;
}

inline oracle::LevelParams params(const clockshift::IonSpecies& s,
                                  const clockshift::FineStructureLevel& l) {
  return {s.I.value(), l.J.value(), l.A_hz, l.B_hz, l.g_J, s.g_I};
}

/// All |F, m> labels of a level.
inline std::vector<clockshift::StateLabel> labels(const clockshift::IonSpecies& s,
                                                  const clockshift::FineStructureLevel& l) {
  std::vector<clockshift::StateLabel> out;
  for (auto F : clockshift::hyperfine_F_values(s.I, l.J))
    for (int m = -F.twice(); m <= F.twice(); m += 2) out.push_back({F, clockshift::half(m)});
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

}  // namespace fixtures
