#pragma once

// Field-insensitive points (d nu / dB = 0) of clock transitions, their
// quadratic Zeeman coefficient, and exhaustive scans over E2-allowed pairs.

#include <optional>
#include <string>
#include <vector>

#include "clockshift/ion_data.hpp"
#include "clockshift/zeeman_spectrum.hpp"

namespace clockshift {

struct SearchOptions {
  double slope_tolerance = 1e-3;     ///< Hz/T
  double bracket_tolerance = 1e-12;  ///< T
  int scan_points = 4001;
  int tracking_points = 2001;
  double curvature_step = 1e-5;  ///< T, initial h of the second difference
  unsigned threads = 0;          ///< 0: hardware concurrency
  bool freeze_lower_linear = false;
};

struct TransitionAnalysis {
  StateLabel lower;
  StateLabel upper;
  double B0 = 0.0;                   ///< T
  double alpha_Z = 0.0;              ///< Hz/T^2
  double C2 = 0.0;                   ///< upper minus lower
  double C2_upper = 0.0;
  double C2_lower = 0.0;
  double frequency = 0.0;            ///< nu(B0) - nu(0), Hz
  double min_gap_adjacent_mF = 0.0;  ///< Hz
  double residual_slope = 0.0;       ///< Hz/T
};

struct PairFailure {
  StateLabel lower;
  StateLabel upper;
  std::string message;
};

struct ScanFilters {
  std::optional<double> max_abs_c2;
  std::optional<StateLabel> lower;
  std::optional<StateLabel> upper;
};

struct ScanReport {
  std::string species;
  std::string transition;  ///< "lower->upper"
  double B_max = 0.0;
  int scan_points = 0;
  int tracking_points = 0;
  std::size_t pairs_examined = 0;
  std::vector<TransitionAnalysis> analyses;  ///< sorted by |C2|
  std::vector<PairFailure> failures;         ///< sorted by labels
};

/// A certified stationary point.
struct InsensitivePoint {
  double B0 = 0.0;
  double residual_slope = 0.0;
};

/// All stationary points of nu(B) in (0, B_max], ascending. Sign changes of
/// d nu / dB on the scan grid are bracketed and refined.
std::vector<InsensitivePoint> find_insensitive_points(const TransitionSpectrum& spectrum,
                                                      double B_max,
                                                      const SearchOptions& options = {});

std::vector<double> find_insensitive_points(const IonSpecies& species,
                                            const ClockTransition& transition, StateLabel lower,
                                            StateLabel upper, double B_max,
                                            const SearchOptions& options = {});

/// (1/2) d^2 nu / dB^2 at B0: central difference of d nu / dB at steps h and
/// h/2, Richardson-combined. h halves until B0 >= 2h, down to 1e-9 T.
double quadratic_coefficient(const TransitionSpectrum& spectrum, double B0,
                             const SearchOptions& options = {});

double quadratic_coefficient(const IonSpecies& species, const ClockTransition& transition,
                             StateLabel lower, StateLabel upper, double B0,
                             const SearchOptions& options = {});

/// Smallest |E - E'| between each clock state and the states of the m_F +- 1
/// manifolds of its own level at B.
double min_gap_adjacent_mF(const IonSpecies& species, const ClockTransition& transition,
                           const TransitionSpectrum& spectrum, double B);

/// Full analysis (alpha_Z, C2, diagnostics) at one certified point.
TransitionAnalysis analyze_point(const IonSpecies& species, const ClockTransition& transition,
                                 const TransitionSpectrum& spectrum, const InsensitivePoint& point,
                                 const SearchOptions& options = {});

/// All label pairs with |dF| <= 2 and |dm_F| <= 2, searched over (0, B_max].
ScanReport scan_species(const IonSpecies& species, const ClockTransition& transition, double B_max,
                        const ScanFilters& filters = {}, const SearchOptions& options = {});

}  // namespace clockshift
