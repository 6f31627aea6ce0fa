#include "clockshift/tensor_shifts.hpp"

#include <limits>
#include <numbers>

#include "clockshift/errors.hpp"
#include "clockshift/units.hpp"

namespace clockshift {

double rank2_element(const IonSpecies& species, const FineStructureLevel& level, HalfInt F_prime,
                     HalfInt F, HalfInt m_F) {
  const HalfInt I = species.I, J = level.J;
  if (!has_rank2(level))
    throw RankUndefinedError("level " + level.label + " has J=" + J.str() +
                             " < 1; the rank-2 matrix is undefined");
  if (!triangle(I, J, F) || !triangle(I, J, F_prime))
    throw InputError("level " + level.label + ": F out of range in rank-2 element");
  const HalfInt two{2};
  const double inv3j = 1.0 / wigner3j(J, two, J, -J, HalfInt{0}, J);
  return parity_sign(J + I + m_F) * std::sqrt((F_prime.twice() + 1.0) * (F.twice() + 1.0)) *
         wigner6j(F, F_prime, two, J, J, I) * inv3j *
         wigner3j(F, two, F_prime, -m_F, HalfInt{0}, m_F);
}

Rank2Matrix rank2_matrix(const IonSpecies& species, const FineStructureLevel& level, HalfInt m_F) {
  Rank2Matrix r{make_basis(species, level, m_F), {}};
  const Eigen::Index n = r.basis.size();
  r.entries.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      r.entries(a, b) = rank2_element(species, level, r.basis.F_list[a], r.basis.F_list[b], m_F);
  return r;
}

double c2_state(const Rank2Matrix& rank2, const ResolvedState& state) {
  return expectation(rank2.entries, state.vector);
}

double c2_state(const IonSpecies& species, const FineStructureLevel& level,
                const TrackedState& tracked, double B) {
  if (!has_rank2(level)) return 0.0;
  const HalfInt m = tracked.zero_field_label.m;
  const ZeemanManifold manifold = build_manifold(species, level, m, B);
  return c2_state(rank2_matrix(species, level, m), resolve_state(manifold, tracked));
}

TransitionC2 c2_transition(const IonSpecies& species, const ClockTransition& transition,
                           const TransitionSpectrum& spectrum, double B) {
  TransitionC2 out;
  const auto& ul = species.level(transition.upper);
  const auto& ll = species.level(transition.lower);
  if (has_rank2(ul))
    out.upper = c2_state(rank2_matrix(species, ul, spectrum.upper().m), spectrum.upper_state(B));
  if (has_rank2(ll))
    out.lower = c2_state(rank2_matrix(species, ll, spectrum.lower().m), spectrum.lower_state(B));
  return out;
}

double c2_transition(const IonSpecies& species, const ClockTransition& transition,
                     StateLabel lower, StateLabel upper, double B) {
  const TransitionSpectrum spectrum(species, transition, lower, upper, B);
  return c2_transition(species, transition, spectrum, B).value();
}

void validate(const FieldGeometry& g) {
  if (!(g.beta >= 0.0 && g.beta <= std::numbers::pi))
    throw InputError("geometry: beta must lie in [0, pi]");
  if (!std::isfinite(g.alpha) || !std::isfinite(g.epsilon) || !std::isfinite(g.gradient_A))
    throw InputError("geometry: alpha, epsilon and gradient must be finite");
}

double quadrupole_shift(double C2, const FieldGeometry& geometry) {
  validate(geometry);
  return C2 * geometry.gradient_A *
         quadrupole_geometry_factor(geometry.alpha, geometry.beta, geometry.epsilon);
}

namespace {

double require_alpha2J(std::optional<double> alpha2J_au) {
  if (!alpha2J_au) throw MissingConstantError("alpha2J_au: tensor polarizability not given");
  return units::polarizability_to_si(*alpha2J_au);
}

}  // namespace

double tensor_polarizability_shift(double C2, std::optional<double> alpha2J_au,
                                   double field_anisotropy) {
  const double alpha2 = require_alpha2J(alpha2J_au);
  return -0.25 * C2 * alpha2 * field_anisotropy / units::planck;
}

void validate(const RFField& rf) {
  if (!(rf.Ex2_avg >= 0.0) || !(rf.Ey2_avg >= 0.0))
    throw InputError("rf: <Ex^2> and <Ey^2> must be non-negative");
  if (std::abs(rf.ExEy_avg) > std::sqrt(rf.Ex2_avg * rf.Ey2_avg) * (1.0 + 1e-12))
    throw InputError("rf: |<Ex Ey>| exceeds sqrt(<Ex^2><Ey^2>)");
}

RFShift rf_tensor_shift(double C2, std::optional<double> alpha2J_au, const RFField& rf,
                        const FieldGeometry& geometry, double f_c) {
  const double alpha2 = require_alpha2J(alpha2J_au);
  validate(rf);
  validate(geometry);
  if (!(f_c > 0.0)) throw InputError("rf: clock frequency must be positive");
  const double cb = std::cos(geometry.beta), sb = std::sin(geometry.beta);
  RFShift s;
  s.isotropic_term = -0.25 * (3.0 * cb * cb - 1.0) * (rf.Ex2_avg + rf.Ey2_avg);
  s.anisotropic_term = 0.75 * sb * sb *
                       (std::cos(2.0 * geometry.alpha) * (rf.Ex2_avg - rf.Ey2_avg) -
                        2.0 * std::sin(2.0 * geometry.alpha) * rf.ExEy_avg);
  s.fractional = -C2 * alpha2 / (4.0 * units::planck * f_c) * (s.isotropic_term + s.anisotropic_term);
  return s;
}

BroadeningParams broadening_params(const IonSpecies& species, const ClockTransition& transition,
                                   double omega_z, long long N) {
  BroadeningParams p;
  p.omega_z = omega_z;
  p.N = N;
  p.Z = species.charge_number;
  p.mass_amu = species.mass_amu;
  p.f_c = transition.frequency_hz;
  p.delta_alpha0_au = transition.delta_alpha0_au;
  p.alpha2J_au = species.level(transition.upper).alpha2J_au;
  return p;
}

Broadening broadening(const BroadeningParams& p, double C2) {
  if (!p.delta_alpha0_au)
    throw MissingConstantError("delta_alpha0_au: differential scalar polarizability not given");
  if (!p.alpha2J_au) throw MissingConstantError("alpha2J_au: tensor polarizability not given");
  if (*p.delta_alpha0_au == 0.0)
    throw InputError("delta_alpha0_au: zero differential polarizability admits no magic RF drive");
  if (!(p.omega_z > 0.0)) throw InputError("broadening: omega_z must be positive");
  if (p.N < 1) throw InputError("broadening: N must be >= 1");
  if (!(p.mass_amu > 0.0) || !(p.f_c > 0.0))
    throw InputError("broadening: mass and clock frequency must be positive");

  const double mass = p.mass_amu * units::atomic_mass_unit;
  const double c2 = units::speed_of_light * units::speed_of_light;
  const double confinement =
      static_cast<double>(p.Z) * p.Z * units::fine_structure * units::hbar * p.omega_z / (mass * c2);
  Broadening b;
  b.delta_f = std::abs(C2) / 4.0 * std::abs(*p.alpha2J_au / *p.delta_alpha0_au) *
              std::cbrt(confinement * confinement) * p.f_c *
              std::cbrt(static_cast<double>(p.N) * static_cast<double>(p.N));
  b.ramsey_time = b.delta_f > 0.0 ? 1.0 / b.delta_f : std::numeric_limits<double>::infinity();
  return b;
}

}  // namespace clockshift
