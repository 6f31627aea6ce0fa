#pragma once

// Hyperfine + Zeeman Hamiltonian of one fixed-m_F block, its
// eigendecomposition, and adiabatic continuation of eigenstates in B.

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clockshift/angular_momentum.hpp"
#include "clockshift/ion_data.hpp"

namespace clockshift {

/// Zero-field quantum numbers |F, m_F> of a state within a level.
struct StateLabel {
  HalfInt F;
  HalfInt m;
  friend constexpr auto operator<=>(const StateLabel&, const StateLabel&) = default;
  std::string str() const;
};

/// Parses "F,m" with each entry an integer or n/2, e.g. "4,-3" or "7/2,-1/2".
StateLabel parse_state_label(const std::string& text);

struct ManifoldBasis {
  std::string level;
  HalfInt I;
  HalfInt J;
  HalfInt m_F;
  std::vector<HalfInt> F_list;  ///< all F >= |m_F|, ascending

  Eigen::Index size() const { return static_cast<Eigen::Index>(F_list.size()); }
  Eigen::Index index_of(HalfInt F) const;
};

ManifoldBasis make_basis(const IonSpecies& species, const FineStructureLevel& level, HalfInt m_F);

struct ZeemanManifold {
  ManifoldBasis basis;
  double B = 0.0;                 ///< T
  Eigen::MatrixXd hamiltonian;    ///< Hz
  Eigen::MatrixXd zeeman_per_tesla;  ///< dH/dB, Hz/T
  Eigen::VectorXd eigenvalues;    ///< ascending, Hz
  Eigen::MatrixXd eigenvectors;   ///< orthonormal columns over F_list
};

/// Hyperfine-basis matrix element <(IJ)F', m_F| H_z |(IJ)F, m_F> in Hz.
/// For J = 0 only the nuclear term g_I m_F mu_B B survives.
double zeeman_element(const IonSpecies& species, const FineStructureLevel& level, HalfInt F_prime,
                      HalfInt F, HalfInt m_F, double B);

/// Diagonal hyperfine energies of the basis.
Eigen::MatrixXd hyperfine_matrix(const IonSpecies& species, const FineStructureLevel& level,
                                 const ManifoldBasis& basis);

/// Zeeman matrix for B = 1 T.
Eigen::MatrixXd zeeman_matrix(const IonSpecies& species, const FineStructureLevel& level,
                              const ManifoldBasis& basis);

ZeemanManifold build_manifold(const IonSpecies& species, const FineStructureLevel& level,
                              HalfInt m_F, double B);

/// Symmetry, trace, orthonormality and reconstruction checks on a manifold.
/// Throws NumericalError on violation.
void check_manifold(const ZeemanManifold& m);

struct TrackedState {
  std::string level;
  StateLabel zero_field_label;
  std::vector<double> B_grid;               ///< T, ascending from 0
  std::vector<double> energies;             ///< Hz
  std::vector<Eigen::VectorXd> amplitudes;  ///< over basis F_list, sign-continued
};

/// One eigenstate picked out of a manifold by continuity with a tracked state.
struct ResolvedState {
  double energy = 0.0;      ///< Hz
  double slope = 0.0;       ///< dE/dB by Hellmann-Feynman, Hz/T
  Eigen::VectorXd vector;   ///< over basis F_list
  Eigen::Index column = 0;  ///< column in the manifold eigenvector matrix
};

/// Continues each zero-field state across B_grid (ascending, starting at 0)
/// by maximal overlap. Result is ordered by ascending F.
std::vector<TrackedState> track_states(const IonSpecies& species, const FineStructureLevel& level,
                                       HalfInt m_F, const std::vector<double>& B_grid);

/// Selects the eigenvector of `manifold` continuing `tracked` at field manifold.B.
ResolvedState resolve_state(const ZeemanManifold& manifold, const TrackedState& tracked);

/// Default tracking grid: `points` uniform values from 0 to 1.25 * B_max.
std::vector<double> default_tracking_grid(double B_max, int points = 2001);

/// Tracked states of one (level, m_F) block, queryable at any B in range.
class ManifoldTracker {
 public:
  ManifoldTracker(const IonSpecies& species, const FineStructureLevel& level, HalfInt m_F,
                  std::vector<double> B_grid);

  const ManifoldBasis& basis() const { return basis_; }
  const std::vector<TrackedState>& states() const { return states_; }
  const TrackedState& state(HalfInt F) const;
  double B_max() const { return states_.front().B_grid.back(); }

  ZeemanManifold manifold(double B) const;
  ResolvedState at(HalfInt F, double B) const;
  ResolvedState at(HalfInt F, const ZeemanManifold& manifold) const;

 private:
  ManifoldBasis basis_;
  Eigen::MatrixXd hyperfine_;
  Eigen::MatrixXd zeeman_;
  std::vector<TrackedState> states_;
};

struct SpectrumOptions {
  /// Replace the lower state by its linear low-field energy E_hf + g_F m mu_B B.
  bool freeze_lower_linear = false;
  int tracking_points = 2001;
};

/// The two tracked states of a clock transition.
class TransitionSpectrum {
 public:
  TransitionSpectrum(const IonSpecies& species, const ClockTransition& transition, StateLabel lower,
                     StateLabel upper, double B_max, SpectrumOptions options = {});
  TransitionSpectrum(std::shared_ptr<const ManifoldTracker> lower_tracker,
                     std::shared_ptr<const ManifoldTracker> upper_tracker, const IonSpecies& species,
                     const ClockTransition& transition, StateLabel lower, StateLabel upper,
                     SpectrumOptions options = {});

  StateLabel lower() const { return lower_; }
  StateLabel upper() const { return upper_; }
  const ManifoldTracker& lower_tracker() const { return *lower_tracker_; }
  const ManifoldTracker& upper_tracker() const { return *upper_tracker_; }
  const SpectrumOptions& options() const { return options_; }
  double B_max() const;

  ResolvedState lower_state(double B) const;
  ResolvedState upper_state(double B) const;

  /// E_upper(B) - E_lower(B) in Hz, relative to the optical frequency f_c.
  double frequency(double B) const;
  double dnu_dB(double B) const;

 private:
  std::shared_ptr<const ManifoldTracker> lower_tracker_;
  std::shared_ptr<const ManifoldTracker> upper_tracker_;
  StateLabel lower_;
  StateLabel upper_;
  SpectrumOptions options_;
  double lower_hf_ = 0.0;
  double lower_linear_slope_ = 0.0;
};

double transition_frequency(const IonSpecies& species, const ClockTransition& transition,
                            StateLabel lower, StateLabel upper, double B);

double dnu_dB(const IonSpecies& species, const ClockTransition& transition, StateLabel lower,
              StateLabel upper, double B);

}  // namespace clockshift
