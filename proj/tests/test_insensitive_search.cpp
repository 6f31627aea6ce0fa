#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "clockshift/errors.hpp"
#include "clockshift/insensitive_search.hpp"
#include "clockshift/tensor_shifts.hpp"
#include "clockshift/units.hpp"
#include "fixtures.hpp"

using namespace clockshift;
using fixtures::data;

namespace {

constexpr double mT = 1e-3;

// Two J=1/2 levels, so both states follow the Breit-Rabi formula.
IonSpecies synthetic() {
  IonSpecies s;
  s.name = "synthetic";
  s.I = half(3);
  s.g_I = -4.0e-4;
  s.mass_amu = 87.0;
  s.levels = {{"S1/2", half(1), 2.0, 3.0e9, 0.0, {}, {}}, {"P1/2", half(1), 2.0 / 3.0, 4.0e8, 0.0, {}, {}}};
  s.transitions = {{"S1/2", "P1/2", 377e12, {}}};
  validate(s);
  return s;
}

const TransitionAnalysis* find_row(const ScanReport& r, StateLabel lo, StateLabel up) {
  for (const auto& a : r.analyses)
    if (a.lower == lo && a.upper == up) return &a;
  return nullptr;
}

}  // namespace

TEST_CASE("stretched-to-stretched transitions have no insensitive point") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  const auto B0 = find_insensitive_points(s, s.transition(), {HalfInt{4}, HalfInt{4}},
                                          {HalfInt{5}, HalfInt{5}}, 5 * mT);
  CHECK(B0.empty());
}

TEST_CASE("43Ca+ |4,-3> -> |5,-3> has one point near 1.28 mT") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  const StateLabel lo{HalfInt{4}, HalfInt{-3}}, up{HalfInt{5}, HalfInt{-3}};
  const auto B0 = find_insensitive_points(s, s.transition(), lo, up, 5 * mT);
  REQUIRE(B0.size() == 1);
  CHECK(B0[0] == doctest::Approx(1.28 * mT).epsilon(0.01));
  const double a = quadratic_coefficient(s, s.transition(), lo, up, B0[0]);
  CHECK(a * units::khz_per_mt2_per_hz_per_t2 == doctest::Approx(-159).epsilon(0.02));
}

TEST_CASE("reported points are certified roots with consistent curvature") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  SearchOptions o;
  const ScanReport r = scan_species(s, s.transition(), 5 * mT, {}, o);
  REQUIRE(!r.analyses.empty());
  for (const auto& a : r.analyses) {
    const TransitionSpectrum sp(s, s.transition(), a.lower, a.upper, 5 * mT);
    CHECK(std::abs(sp.dnu_dB(a.B0)) < o.slope_tolerance);
    CHECK(std::abs(a.residual_slope) < o.slope_tolerance);
    // The slope changes sign across a small window around B0.
    const double w = std::max(1e-9, 1e-6 * a.B0);
    CHECK(sp.dnu_dB(a.B0 - w) * sp.dnu_dB(a.B0 + w) < 0);
    const double h = 1e-5;
    if (a.B0 > 2 * h) {
      const double d = sp.frequency(a.B0 + h) - sp.frequency(a.B0);
      CHECK(std::abs(d - a.alpha_Z * h * h) <= 1e-2 * std::abs(a.alpha_Z * h * h));
    }
    // E2 selection rules on zero-field labels.
    CHECK(abs(a.upper.F - a.lower.F) <= HalfInt{2});
    CHECK(abs(a.upper.m - a.lower.m) <= HalfInt{2});
    CHECK(a.C2 == doctest::Approx(a.C2_upper - a.C2_lower));
    CHECK(a.min_gap_adjacent_mF > 0.0);
  }
}

TEST_CASE("curvature matches the closed-form Breit-Rabi second derivative") {
  const IonSpecies s = synthetic();
  const auto ps = fixtures::params(s, s.level("S1/2"));
  const auto pp = fixtures::params(s, s.level("P1/2"));
  int checked = 0;
  for (const StateLabel lo : fixtures::labels(s, s.level("S1/2")))
    for (const StateLabel up : fixtures::labels(s, s.level("P1/2"))) {
      const TransitionSpectrum sp(s, s.transition(), lo, up, 40 * mT);
      for (double B : {0.5 * mT, 3.0 * mT, 17.0 * mT}) {
        const double want = 0.5 * (oracle::breit_rabi_curvature(pp, up.F.value(), up.m.value(), B) -
                                   oracle::breit_rabi_curvature(ps, lo.F.value(), lo.m.value(), B));
        const double got = quadratic_coefficient(sp, B);
        const double scale = std::max(std::abs(want), 1e5);  // Hz/T^2; stretched pairs are linear
        CHECK(std::abs(got - want) <= 1e-6 * scale);
        ++checked;
      }
      for (double B0 : find_insensitive_points(s, s.transition(), lo, up, 40 * mT)) {
        const double want = 0.5 * (oracle::breit_rabi_curvature(pp, up.F.value(), up.m.value(), B0) -
                                   oracle::breit_rabi_curvature(ps, lo.F.value(), lo.m.value(), B0));
        CHECK(quadratic_coefficient(sp, B0) == doctest::Approx(want).epsilon(1e-6));
        ++checked;
      }
    }
  CHECK(checked > 48);
}

TEST_CASE("curvature step shrinks near zero field and fails below 1e-9 T") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  const TransitionSpectrum sp(s, s.transition(), {HalfInt{4}, HalfInt{0}}, {HalfInt{3}, HalfInt{-2}}, 1 * mT);
  CHECK(std::isfinite(quadratic_coefficient(sp, 1e-7)));
  CHECK_THROWS_AS(quadratic_coefficient(sp, 1e-10), NumericalError);
}

TEST_CASE("43Ca+ scan contains both tabulated rows and the C2 filter keeps them") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  const ScanReport r = scan_species(s, s.transition(), 5 * mT);
  const StateLabel a{HalfInt{4}, HalfInt{-3}}, b{HalfInt{5}, HalfInt{-3}};
  const StateLabel c{HalfInt{4}, HalfInt{0}}, d{HalfInt{3}, HalfInt{-2}};
  REQUIRE(find_row(r, a, b));
  REQUIRE(find_row(r, c, d));
  CHECK(find_row(r, c, d)->B0 == doctest::Approx(0.051 * mT).epsilon(0.01));
  CHECK(std::abs(find_row(r, c, d)->C2 + 0.006) < 0.001);
  CHECK(r.failures.empty());
  for (std::size_t k = 1; k < r.analyses.size(); ++k)
    CHECK(std::abs(r.analyses[k - 1].C2) <= std::abs(r.analyses[k].C2));

  ScanFilters f;
  f.max_abs_c2 = 0.01;
  const ScanReport small = scan_species(s, s.transition(), 5 * mT, f);
  CHECK(find_row(small, a, b));
  CHECK(find_row(small, c, d));
  for (const auto& x : small.analyses) CHECK(std::abs(x.C2) < 0.01);
  CHECK(small.analyses.size() < r.analyses.size());

  ScanFilters g;
  g.lower = c;
  const ScanReport only = scan_species(s, s.transition(), 5 * mT, g);
  for (const auto& x : only.analyses) CHECK(x.lower == c);
  CHECK(find_row(only, c, d));
}

TEST_CASE("scans are deterministic across thread counts") {
  const IonSpecies s = load_species_file(data("sr87.yaml"));
  auto flatten = [](const ScanReport& r) {
    std::vector<double> v;
    for (const auto& a : r.analyses)
      v.insert(v.end(), {a.lower.F.value(), a.lower.m.value(), a.upper.F.value(), a.upper.m.value(),
                         a.B0, a.alpha_Z, a.C2, a.min_gap_adjacent_mF, a.residual_slope});
    return v;
  };
  SearchOptions one, many;
  one.threads = 1;
  many.threads = 16;
  const auto x = flatten(scan_species(s, s.transition(), 20 * mT, {}, one));
  const auto y = flatten(scan_species(s, s.transition(), 20 * mT, {}, many));
  CHECK(!x.empty());
  CHECK(x == y);
}

TEST_CASE("species without nuclear spin scans over m_J pairs") {
  IonSpecies s;
  s.name = "40Ca+";
  s.I = HalfInt{0};
  s.mass_amu = 39.96;
  s.levels = {{"S1/2", half(1), 2.0, 0, 0, {}, {}}, {"D5/2", half(5), 1.2, 0, 0, {}, {}}};
  s.transitions = {{"S1/2", "D5/2", 411e12, {}}};
  const ScanReport r = scan_species(s, s.transition(), 5 * mT);
  CHECK(r.pairs_examined == 2 * 5);  // |dm| <= 2 from m = +-1/2
  CHECK(r.analyses.empty());         // every pair is exactly linear
  CHECK(r.failures.empty());
}

TEST_CASE("mirroring m together with the Zeeman sign reproduces every value") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  IonSpecies t = s;
  t.g_I = -s.g_I;
  for (auto& l : t.levels) l.g_J = -l.g_J;
  const ScanReport a = scan_species(s, s.transition(), 5 * mT);
  const ScanReport b = scan_species(t, t.transition(), 5 * mT);
  REQUIRE(a.analyses.size() == b.analyses.size());
  for (const auto& x : a.analyses) {
    const auto* y = find_row(b, {x.lower.F, -x.lower.m}, {x.upper.F, -x.upper.m});
    REQUIRE(y);
    CHECK(y->B0 == doctest::Approx(x.B0).epsilon(1e-9));
    CHECK(y->alpha_Z == doctest::Approx(x.alpha_Z).epsilon(1e-6));
    CHECK(y->C2 == doctest::Approx(x.C2).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("flipping g_I alone mirrors the point only approximately") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  IonSpecies t = s;
  t.g_I = -s.g_I;
  const auto x = find_insensitive_points(s, s.transition(), {HalfInt{4}, HalfInt{-3}}, {HalfInt{5}, HalfInt{-3}}, 5 * mT);
  const auto y = find_insensitive_points(t, t.transition(), {HalfInt{4}, HalfInt{-3}}, {HalfInt{5}, HalfInt{-3}}, 5 * mT);
  REQUIRE(x.size() == 1);
  REQUIRE(y.size() == 1);
  CHECK(y[0] == doctest::Approx(x[0]).epsilon(0.02));
  CHECK(y[0] != doctest::Approx(x[0]).epsilon(1e-6));
}

TEST_CASE("freeze-lower-linear moves the 43Ca+ point") {
  const IonSpecies s = load_species_file(data("ca43.yaml"));
  SearchOptions o;
  o.freeze_lower_linear = true;
  const TransitionSpectrum sp(s, s.transition(), {HalfInt{4}, HalfInt{-3}}, {HalfInt{5}, HalfInt{-3}}, 5 * mT,
                              {true, o.tracking_points});
  const auto pts = find_insensitive_points(sp, 5 * mT, o);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].B0 < 1.28 * mT);
  CHECK(c2_transition(s, s.transition(), sp, pts[0].B0).value() < -5e-3);
}
