#include "clockshift/insensitive_search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include <boost/math/tools/toms748_solve.hpp>

#include "clockshift/errors.hpp"
#include "clockshift/tensor_shifts.hpp"

namespace clockshift {

namespace {

std::vector<double> scan_grid(double B_max, int points) {
  if (!(B_max > 0.0)) throw InputError("scan range must have B_max > 0");
  if (points < 2) throw InputError("scan grid needs at least two points");
  std::vector<double> grid(points);
  for (int k = 0; k < points; ++k) grid[k] = B_max * (k + 1) / points;
  return grid;
}

// Refines a sign change of `slope` inside [a, b].
InsensitivePoint refine(const std::function<double(double)>& slope, double a, double b, double fa,
                        double fb, const SearchOptions& options) {
  const double tol = options.slope_tolerance;
  InsensitivePoint best{a, fa};
  auto keep = [&](double x, double fx) {
    if (std::abs(fx) < std::abs(best.residual_slope)) best = {x, fx};
  };
  keep(b, fb);
  if (std::abs(best.residual_slope) <= tol) return best;

  // Values inside the tolerance count as roots so the solver stops there.
  auto snapped = [&](double x) {
    const double fx = slope(x);
    keep(x, fx);
    return std::abs(fx) <= tol ? 0.0 : fx;
  };
  std::uintmax_t iterations = 200;
  const auto stop = [&](double x, double y) {
    return std::abs(y - x) <= options.bracket_tolerance;
  };
  const auto [lo, hi] = boost::math::tools::toms748_solve(snapped, a, b, fa, fb, stop, iterations);
  keep(lo, slope(lo));
  keep(hi, slope(hi));

  if (std::abs(best.residual_slope) > tol) {
    // Bracket collapsed first: one secant step on the final bracket.
    const double flo = slope(lo), fhi = slope(hi);
    if (flo != fhi) {
      const double x = std::clamp(lo - flo * (hi - lo) / (fhi - flo), lo, hi);
      keep(x, slope(x));
    }
  }
  if (std::abs(best.residual_slope) > tol) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "root certification failed near B=%.12g T: |dnu/dB|=%.3g Hz/T exceeds %.3g",
                  best.B0, std::abs(best.residual_slope), tol);
    throw NumericalError(buf);
  }
  return best;
}

std::vector<InsensitivePoint> bracket_and_refine(const std::function<double(double)>& slope,
                                                 const std::vector<double>& grid,
                                                 const std::vector<double>& values,
                                                 const SearchOptions& options) {
  std::vector<InsensitivePoint> out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (values[k] == 0.0) {
      out.push_back({grid[k], 0.0});
      continue;
    }
    if (k + 1 < grid.size() && values[k + 1] != 0.0 &&
        std::signbit(values[k]) != std::signbit(values[k + 1]))
      out.push_back(refine(slope, grid[k], grid[k + 1], values[k], values[k + 1], options));
  }
  return out;
}

}  // namespace

std::vector<InsensitivePoint> find_insensitive_points(const TransitionSpectrum& spectrum,
                                                      double B_max, const SearchOptions& options) {
  if (B_max > spectrum.B_max() * (1.0 + 1e-12))
    throw InputError("search range exceeds the tracked field range");
  const auto grid = scan_grid(B_max, options.scan_points);
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = spectrum.dnu_dB(grid[k]);
  return bracket_and_refine([&](double B) { return spectrum.dnu_dB(B); }, grid, values, options);
}

std::vector<double> find_insensitive_points(const IonSpecies& species,
                                            const ClockTransition& transition, StateLabel lower,
                                            StateLabel upper, double B_max,
                                            const SearchOptions& options) {
  const TransitionSpectrum spectrum(species, transition, lower, upper, B_max,
                                    {options.freeze_lower_linear, options.tracking_points});
  std::vector<double> out;
  for (const auto& p : find_insensitive_points(spectrum, B_max, options)) out.push_back(p.B0);
  return out;
}

double quadratic_coefficient(const TransitionSpectrum& spectrum, double B0,
                             const SearchOptions& options) {
  double h = options.curvature_step;
  while (B0 < 2.0 * h) {
    h *= 0.5;
    if (h < 1e-9)
      throw NumericalError("curvature step underflow at B0=" + std::to_string(B0) + " T");
  }
  // Differencing the exact slopes instead of nu itself keeps eigenvalue
  // roundoff (GHz-scale energies) from being amplified by 1/h^2.
  const auto central = [&](double step) {
    return (spectrum.dnu_dB(B0 + step) - spectrum.dnu_dB(B0 - step)) / (2.0 * step);
  };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  return 0.5 * (4.0 * fine - coarse) / 3.0;
}

double quadratic_coefficient(const IonSpecies& species, const ClockTransition& transition,
                             StateLabel lower, StateLabel upper, double B0,
                             const SearchOptions& options) {
  const TransitionSpectrum spectrum(species, transition, lower, upper,
                                    B0 + 2.0 * options.curvature_step,
                                    {options.freeze_lower_linear, options.tracking_points});
  return quadratic_coefficient(spectrum, B0, options);
}

double min_gap_adjacent_mF(const IonSpecies& species, const ClockTransition& transition,
                           const TransitionSpectrum& spectrum, double B) {
  double gap = std::numeric_limits<double>::infinity();
  const auto scan_level = [&](const FineStructureLevel& level, StateLabel label, double energy) {
    for (int dm : {-1, 1}) {
      const HalfInt m = label.m + HalfInt{dm};
      if (abs(m) > species.I + level.J) continue;
      const ZeemanManifold adj = build_manifold(species, level, m, B);
      for (Eigen::Index k = 0; k < adj.eigenvalues.size(); ++k)
        gap = std::min(gap, std::abs(adj.eigenvalues(k) - energy));
    }
  };
  scan_level(species.level(transition.lower), spectrum.lower(),
             spectrum.lower_tracker().at(spectrum.lower().F, B).energy);
  scan_level(species.level(transition.upper), spectrum.upper(), spectrum.upper_state(B).energy);
  return gap;
}

TransitionAnalysis analyze_point(const IonSpecies& species, const ClockTransition& transition,
                                 const TransitionSpectrum& spectrum, const InsensitivePoint& point,
                                 const SearchOptions& options) {
  TransitionAnalysis a;
  a.lower = spectrum.lower();
  a.upper = spectrum.upper();
  a.B0 = point.B0;
  a.residual_slope = point.residual_slope;
  a.alpha_Z = quadratic_coefficient(spectrum, point.B0, options);
  const TransitionC2 c2 = c2_transition(species, transition, spectrum, point.B0);
  a.C2 = c2.value();
  a.C2_upper = c2.upper;
  a.C2_lower = c2.lower;
  a.frequency = spectrum.frequency(point.B0) - spectrum.frequency(0.0);
  a.min_gap_adjacent_mF = min_gap_adjacent_mF(species, transition, spectrum, point.B0);
  if (!std::isfinite(a.alpha_Z)) throw NumericalError("non-finite quadratic coefficient");
  return a;
}

namespace {

struct Sampled {
  std::shared_ptr<const ManifoldTracker> tracker;
  std::string error;
  // slopes[state index][grid index], state index as in basis.F_list
  std::vector<std::vector<double>> slopes;
};

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

std::vector<HalfInt> m_values(HalfInt Fmax) {
  std::vector<HalfInt> out;
  for (HalfInt m = -Fmax; m <= Fmax; m += HalfInt{1}) out.push_back(m);
  return out;
}

bool label_less(const StateLabel& a, const StateLabel& b) {
  return std::tie(a.F, a.m) < std::tie(b.F, b.m);
}

}  // namespace

ScanReport scan_species(const IonSpecies& species, const ClockTransition& transition, double B_max,
                        const ScanFilters& filters, const SearchOptions& options) {
  const auto& lower_level = species.level(transition.lower);
  const auto& upper_level = species.level(transition.upper);
  const auto grid = scan_grid(B_max, options.scan_points);
  const auto tracking = default_tracking_grid(B_max, options.tracking_points);

  ScanReport report;
  report.species = species.name;
  report.transition = transition.lower + "->" + transition.upper;
  report.B_max = B_max;
  report.scan_points = options.scan_points;
  report.tracking_points = options.tracking_points;

  // One tracker per (level, m_F) block, sampled once on the scan grid.
  struct Block {
    const FineStructureLevel* level;
    HalfInt m;
  };
  std::vector<Block> blocks;
  for (HalfInt m : m_values(species.I + lower_level.J)) blocks.push_back({&lower_level, m});
  for (HalfInt m : m_values(species.I + upper_level.J)) blocks.push_back({&upper_level, m});
  std::vector<Sampled> sampled(blocks.size());
  parallel_for(blocks.size(), options.threads, [&](std::size_t i) {
    auto& s = sampled[i];
    try {
      s.tracker = std::make_shared<ManifoldTracker>(species, *blocks[i].level, blocks[i].m, tracking);
      const Eigen::Index n = s.tracker->basis().size();
      s.slopes.assign(n, std::vector<double>(grid.size()));
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const ZeemanManifold m = s.tracker->manifold(grid[g]);
        for (Eigen::Index k = 0; k < n; ++k)
          s.slopes[k][g] = s.tracker->at(s.tracker->basis().F_list[k], m).slope;
      }
    } catch (const Error& e) {
      s.error = e.what();
    }
  });
  const std::size_t n_lower_blocks = m_values(species.I + lower_level.J).size();
  const auto block_index = [&](bool upper, HalfInt m) {
    const HalfInt top = species.I + (upper ? upper_level.J : lower_level.J);
    return (upper ? n_lower_blocks : 0) + static_cast<std::size_t>((m + top).twice() / 2);
  };

  struct Pair {
    StateLabel lower, upper;
  };
  std::vector<Pair> pairs;
  for (HalfInt Fl : hyperfine_F_values(species.I, lower_level.J))
    for (HalfInt ml : m_values(Fl))
      for (HalfInt Fu : hyperfine_F_values(species.I, upper_level.J))
        for (HalfInt mu : m_values(Fu)) {
          if (abs(Fu - Fl) > HalfInt{2} || abs(mu - ml) > HalfInt{2}) continue;
          const StateLabel l{Fl, ml}, u{Fu, mu};
          if (filters.lower && *filters.lower != l) continue;
          if (filters.upper && *filters.upper != u) continue;
          pairs.push_back({l, u});
        }
  report.pairs_examined = pairs.size();

  std::vector<std::vector<TransitionAnalysis>> found(pairs.size());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), options.threads, [&](std::size_t i) {
    const auto& [l, u] = pairs[i];
    const Sampled& sl = sampled[block_index(false, l.m)];
    const Sampled& su = sampled[block_index(true, u.m)];
    if (!sl.error.empty()) return void(errors[i] = sl.error);
    if (!su.error.empty()) return void(errors[i] = su.error);
    try {
      const TransitionSpectrum spectrum(sl.tracker, su.tracker, species, transition, l, u,
                                        {options.freeze_lower_linear, options.tracking_points});
      const auto& up = su.slopes[su.tracker->basis().index_of(u.F)];
      std::vector<double> values(grid.size());
      if (options.freeze_lower_linear) {
        const double lower_slope = spectrum.lower_state(0.0).slope;
        for (std::size_t g = 0; g < grid.size(); ++g) values[g] = up[g] - lower_slope;
      } else {
        const auto& lo = sl.slopes[sl.tracker->basis().index_of(l.F)];
        for (std::size_t g = 0; g < grid.size(); ++g) values[g] = up[g] - lo[g];
      }
      const auto points = bracket_and_refine([&](double B) { return spectrum.dnu_dB(B); }, grid,
                                             values, options);
      for (const auto& p : points) {
        TransitionAnalysis a = analyze_point(species, transition, spectrum, p, options);
        if (filters.max_abs_c2 && !(std::abs(a.C2) < *filters.max_abs_c2)) continue;
        found[i].push_back(a);
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (auto& a : found[i]) report.analyses.push_back(a);
    if (!errors[i].empty()) report.failures.push_back({pairs[i].lower, pairs[i].upper, errors[i]});
  }
  std::stable_sort(report.analyses.begin(), report.analyses.end(),
                   [](const TransitionAnalysis& a, const TransitionAnalysis& b) {
                     if (std::abs(a.C2) != std::abs(b.C2)) return std::abs(a.C2) < std::abs(b.C2);
                     if (a.lower != b.lower) return label_less(a.lower, b.lower);
                     if (a.upper != b.upper) return label_less(a.upper, b.upper);
                     return a.B0 < b.B0;
                   });
  return report;
}

}  // namespace clockshift
