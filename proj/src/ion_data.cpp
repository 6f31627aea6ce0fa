#include "clockshift/ion_data.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "clockshift/errors.hpp"
#include "clockshift/units.hpp"
#include "numfmt.hpp"

namespace clockshift {

const FineStructureLevel& IonSpecies::level(std::string_view label) const {
  for (const auto& l : levels)
    if (l.label == label) return l;
  throw InputError("species " + name + " has no level '" + std::string(label) + "'");
}

const ClockTransition& IonSpecies::transition(std::string_view selector) const {
  if (transitions.empty()) throw InputError("species " + name + " defines no transitions");
  if (selector.empty()) return transitions.front();
  for (const auto& t : transitions)
    if (t.lower + "->" + t.upper == selector) return t;
  throw InputError("species " + name + " has no transition '" + std::string(selector) + "'");
}

std::vector<HalfInt> hyperfine_F_values(HalfInt I, HalfInt J) {
  std::vector<HalfInt> out;
  for (HalfInt F = abs(I - J); F <= I + J; F += HalfInt{1}) out.push_back(F);
  return out;
}

double hyperfine_energy(const FineStructureLevel& level, HalfInt I, HalfInt F) {
  const HalfInt J = level.J;
  if (!triangle(I, J, F))
    throw InputError("level " + level.label + ": F=" + F.str() + " is outside |I-J|..I+J for I=" +
                     I.str() + ", J=" + J.str());
  const double i = I.casimir(), j = J.casimir();
  const double K = F.casimir() - i - j;
  double e = 0.5 * level.A_hz * K;
  if (I.twice() >= 2 && J.twice() >= 2) {
    const double iv = I.value(), jv = J.value();
    e += level.B_hz * (1.5 * K * (K + 1.0) - 2.0 * i * j) /
         (4.0 * iv * (2.0 * iv - 1.0) * jv * (2.0 * jv - 1.0));
  }
  return e;
}

void validate(const IonSpecies& s) {
  const std::string where = "species '" + s.name + "'";
  if (s.name.empty()) throw InputError("species.name: must be non-empty");
  if (s.I.twice() < 0) throw InputError("species.twice_I: nuclear spin must be >= 0");
  if (s.charge_number < 1) throw InputError("species.charge_number: must be >= 1");
  if (!(s.mass_amu > 0.0) || !std::isfinite(s.mass_amu))
    throw InputError("species.mass_amu: must be positive");
  if (!std::isfinite(s.g_I)) throw InputError("species.g_I: must be finite");
  if (s.levels.size() < 2) throw InputError("levels: " + where + " needs at least two levels");

  std::set<std::string> labels;
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    const auto& l = s.levels[k];
    const std::string path = "levels[" + std::to_string(k) + "]";
    if (l.label.empty()) throw InputError(path + ".label: must be non-empty");
    if (!labels.insert(l.label).second)
      throw InputError(path + ".label: duplicate level '" + l.label + "'");
    if (l.J.twice() < 0) throw InputError(path + ".twice_J: must be >= 0");
    if (!std::isfinite(l.g_J) || !std::isfinite(l.A_hz) || !std::isfinite(l.B_hz))
      throw InputError(path + ": non-finite g_J or hyperfine constant");
    if (l.B_hz != 0.0 && (l.J.twice() < 2 || s.I.twice() < 2))
      throw InputError(path + ".B_MHz: level '" + l.label +
                       "' must have B = 0 (requires J >= 1 and I >= 1)");
  }

  for (std::size_t k = 0; k < s.transitions.size(); ++k) {
    const auto& t = s.transitions[k];
    const std::string path = "transitions[" + std::to_string(k) + "]";
    if (!labels.count(t.lower)) throw InputError(path + ".lower: unknown level '" + t.lower + "'");
    if (!labels.count(t.upper)) throw InputError(path + ".upper: unknown level '" + t.upper + "'");
    if (t.lower == t.upper) throw InputError(path + ": lower and upper must differ");
    if (!(t.frequency_hz > 0.0)) throw InputError(path + ".frequency_THz: must be positive");
  }
}

namespace {

using Keys = std::set<std::string>;

std::string mark(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return {};
  return " (line " + std::to_string(m.line + 1) + ")";
}

void expect_map(const YAML::Node& n, const std::string& path) {
  if (!n || !n.IsMap()) throw InputError(path + ": expected a mapping" + (n ? mark(n) : ""));
}

void reject_unknown(const YAML::Node& n, const std::string& path, const Keys& allowed) {
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw InputError(path + "." + key + ": unknown key" + mark(kv.first));
  }
}

template <typename T>
T required(const YAML::Node& parent, const std::string& key, const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) throw InputError(path + "." + key + ": missing required field");
  if (!n.IsScalar()) throw InputError(path + "." + key + ": expected a scalar" + mark(n));
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError(path + "." + key + ": cannot parse '" + n.Scalar() + "'" + mark(n));
  }
}

template <typename T>
std::optional<T> optional_field(const YAML::Node& parent, const std::string& key,
                                const std::string& path) {
  if (!parent[key] || parent[key].IsNull()) return std::nullopt;
  return required<T>(parent, key, path);
}

}  // namespace

IonSpecies load_species(std::string_view document) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("document: ") + e.what());
  }
  expect_map(root, "document");
  reject_unknown(root, "document", {"species", "levels", "transitions"});

  IonSpecies s;
  const YAML::Node sp = root["species"];
  expect_map(sp, "species");
  reject_unknown(sp, "species", {"name", "twice_I", "g_I", "charge_number", "mass_amu"});
  s.name = required<std::string>(sp, "name", "species");
  s.I = HalfInt::from_twice(required<int>(sp, "twice_I", "species"));
  s.g_I = required<double>(sp, "g_I", "species");
  s.charge_number = required<int>(sp, "charge_number", "species");
  s.mass_amu = required<double>(sp, "mass_amu", "species");

  const YAML::Node levels = root["levels"];
  if (!levels || !levels.IsSequence()) throw InputError("levels: expected a list");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const std::string path = "levels[" + std::to_string(k) + "]";
    const YAML::Node n = levels[k];
    expect_map(n, path);
    reject_unknown(n, path,
                   {"label", "twice_J", "g_J", "A_MHz", "B_MHz", "theta_au", "alpha2J_au"});
    FineStructureLevel l;
    l.label = required<std::string>(n, "label", path);
    l.J = HalfInt::from_twice(required<int>(n, "twice_J", path));
    l.g_J = required<double>(n, "g_J", path);
    l.A_hz = required<double>(n, "A_MHz", path) * units::hz_per_mhz;
    l.B_hz = required<double>(n, "B_MHz", path) * units::hz_per_mhz;
    l.theta_au = optional_field<double>(n, "theta_au", path);
    l.alpha2J_au = optional_field<double>(n, "alpha2J_au", path);
    s.levels.push_back(std::move(l));
  }

  if (const YAML::Node trans = root["transitions"]) {
    if (!trans.IsSequence()) throw InputError("transitions: expected a list");
    for (std::size_t k = 0; k < trans.size(); ++k) {
      const std::string path = "transitions[" + std::to_string(k) + "]";
      const YAML::Node n = trans[k];
      expect_map(n, path);
      reject_unknown(n, path, {"lower", "upper", "frequency_THz", "delta_alpha0_au"});
      ClockTransition t;
      t.lower = required<std::string>(n, "lower", path);
      t.upper = required<std::string>(n, "upper", path);
      t.frequency_hz = required<double>(n, "frequency_THz", path) * units::hz_per_thz;
      t.delta_alpha0_au = optional_field<double>(n, "delta_alpha0_au", path);
      s.transitions.push_back(std::move(t));
    }
  }

  validate(s);
  return s;
}

IonSpecies load_species_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open species file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_species(buf.str());
  } catch (const InputError& e) {
    throw InputError(path.filename().string() + ": " + e.what());
  }
}

std::string serialize_species(const IonSpecies& s) {
  using numfmt::shortest;
  using numfmt::shortest_scaled;
  std::ostringstream out;
  out << "species:\n"
      << "  name: \"" << s.name << "\"\n"
      << "  twice_I: " << s.I.twice() << "\n"
      << "  g_I: " << shortest(s.g_I) << "\n"
      << "  charge_number: " << s.charge_number << "\n"
      << "  mass_amu: " << shortest(s.mass_amu) << "\n"
      << "levels:\n";
  for (const auto& l : s.levels) {
    out << "  - label: \"" << l.label << "\"\n"
        << "    twice_J: " << l.J.twice() << "\n"
        << "    g_J: " << shortest(l.g_J) << "\n"
        << "    A_MHz: " << shortest_scaled(l.A_hz, units::hz_per_mhz) << "\n"
        << "    B_MHz: " << shortest_scaled(l.B_hz, units::hz_per_mhz) << "\n";
    if (l.theta_au) out << "    theta_au: " << shortest(*l.theta_au) << "\n";
    if (l.alpha2J_au) out << "    alpha2J_au: " << shortest(*l.alpha2J_au) << "\n";
  }
  if (!s.transitions.empty()) {
    out << "transitions:\n";
    for (const auto& t : s.transitions) {
      out << "  - lower: \"" << t.lower << "\"\n"
          << "    upper: \"" << t.upper << "\"\n"
          << "    frequency_THz: " << shortest_scaled(t.frequency_hz, units::hz_per_thz) << "\n";
      if (t.delta_alpha0_au) out << "    delta_alpha0_au: " << shortest(*t.delta_alpha0_au) << "\n";
    }
  }
  return out.str();
}

}  // namespace clockshift
