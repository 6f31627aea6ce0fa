#pragma once

// Rank-2 coefficient matrix, the shift coefficient C2, and the
// quadrupole / tensor-polarizability / RF / broadening formulas it scales.

#include <cmath>

#include <Eigen/Dense>

#include "clockshift/ion_data.hpp"
#include "clockshift/zeeman_spectrum.hpp"

namespace clockshift {

/// <v|op|v> for any real Eigen expressions.
template <typename DerivedM, typename DerivedV>
typename DerivedV::Scalar expectation(const Eigen::MatrixBase<DerivedM>& op,
                                      const Eigen::MatrixBase<DerivedV>& v) {
  return v.dot(op * v);
}

struct Rank2Matrix {
  ManifoldBasis basis;
  Eigen::MatrixXd entries;  ///< dimensionless, indexed like basis.F_list
};

/// Matrix element H_{F',F} of the normalized rank-2 operator (stretched state -> 1).
/// Throws RankUndefinedError for J < 1.
double rank2_element(const IonSpecies& species, const FineStructureLevel& level, HalfInt F_prime,
                     HalfInt F, HalfInt m_F);

Rank2Matrix rank2_matrix(const IonSpecies& species, const FineStructureLevel& level, HalfInt m_F);

/// True when the level carries a rank-2 moment (J >= 1).
inline bool has_rank2(const FineStructureLevel& level) { return level.J.twice() >= 2; }

/// C2 of a tracked state at field B. Exactly 0 for J < 1.
double c2_state(const IonSpecies& species, const FineStructureLevel& level,
                const TrackedState& tracked, double B);

/// C2 of an already resolved eigenvector of `level`.
double c2_state(const Rank2Matrix& rank2, const ResolvedState& state);

struct TransitionC2 {
  double upper = 0.0;
  double lower = 0.0;
  double value() const { return upper - lower; }
};

/// Upper-minus-lower C2 along a transition spectrum. With freeze_lower_linear
/// the lower state is its unmixed zero-field state.
TransitionC2 c2_transition(const IonSpecies& species, const ClockTransition& transition,
                           const TransitionSpectrum& spectrum, double B);

double c2_transition(const IonSpecies& species, const ClockTransition& transition,
                     StateLabel lower, StateLabel upper, double B);

// Geometry -------------------------------------------------------------------

struct FieldGeometry {
  double alpha = 0.0;       ///< rad
  double beta = 0.0;        ///< rad, 0..pi
  double gradient_A = 0.0;  ///< A * Theta(J) as a frequency, Hz
  double epsilon = 0.0;
};

void validate(const FieldGeometry& g);

/// (3 cos^2 b - 1) - eps sin^2 b (cos^2 a - sin^2 a)
template <typename Scalar>
Scalar quadrupole_geometry_factor(Scalar alpha, Scalar beta, Scalar epsilon) {
  using std::cos;
  using std::sin;
  const Scalar cb = cos(beta), sb = sin(beta), ca = cos(alpha), sa = sin(alpha);
  return (Scalar(3) * cb * cb - Scalar(1)) - epsilon * sb * sb * (ca * ca - sa * sa);
}

/// Quadrupole shift in Hz.
double quadrupole_shift(double C2, const FieldGeometry& geometry);

/// Tensor-polarizability shift in Hz for a time-averaged <3 Ez^2 - |E|^2> in V^2/m^2.
/// alpha2J_au must be present; a missing value throws MissingConstantError.
double tensor_polarizability_shift(double C2, std::optional<double> alpha2J_au,
                                   double field_anisotropy);

/// Time-averaged quadratic components of a purely transverse RF field, V^2/m^2.
struct RFField {
  double Ex2_avg = 0.0;
  double Ey2_avg = 0.0;
  double ExEy_avg = 0.0;
};

void validate(const RFField& rf);

struct RFShift {
  double isotropic_term = 0.0;    ///< -(1/4)(3cos^2 b - 1)|E|^2
  double anisotropic_term = 0.0;  ///< (3/4) sin^2 b (cos2a (Ex^2-Ey^2) - 2 sin2a ExEy)
  double fractional = 0.0;        ///< delta nu / nu
};

RFShift rf_tensor_shift(double C2, std::optional<double> alpha2J_au, const RFField& rf,
                        const FieldGeometry& geometry, double f_c);

// Broadening -----------------------------------------------------------------

struct BroadeningParams {
  double omega_z = 0.0;  ///< axial trap frequency, rad/s
  long long N = 1;       ///< ion count
  int Z = 1;
  double mass_amu = 0.0;
  double f_c = 0.0;  ///< Hz
  std::optional<double> delta_alpha0_au;
  std::optional<double> alpha2J_au;
};

/// Fills Z, mass, f_c, delta_alpha0 and the upper level's alpha2J from the species.
BroadeningParams broadening_params(const IonSpecies& species, const ClockTransition& transition,
                                   double omega_z, long long N);

struct Broadening {
  double delta_f = 0.0;       ///< Hz
  double ramsey_time = 0.0;   ///< 1/delta_f, s; infinite when delta_f = 0
};

Broadening broadening(const BroadeningParams& params, double C2);

}  // namespace clockshift
