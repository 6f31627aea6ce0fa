#include "clockshift/zeeman_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "clockshift/errors.hpp"
#include "clockshift/units.hpp"

namespace clockshift {

namespace {

constexpr double kMinOverlap = 0.70710678118654752;  // 1/sqrt(2)
constexpr double kAmbiguity = 1e-6;

std::string field_str(double B) {
  std::ostringstream os;
  os.precision(10);
  os << B << " T";
  return os.str();
}

HalfInt parse_half(const std::string& s) {
  try {
    std::size_t pos = 0;
    if (auto slash = s.find('/'); slash != std::string::npos) {
      const int num = std::stoi(s.substr(0, slash), &pos);
      if (pos != slash || s.substr(slash + 1) != "2") throw std::invalid_argument(s);
      return HalfInt::from_twice(num);
    }
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return HalfInt{v};
  } catch (const std::logic_error&) {
    throw InputError("cannot parse quantum number '" + s + "'");
  }
}

void require_valid_F(const IonSpecies& species, const FineStructureLevel& level, HalfInt F) {
  if (!triangle(species.I, level.J, F))
    throw InputError("level " + level.label + ": F=" + F.str() + " not in |I-J|..I+J");
}

}  // namespace

std::string StateLabel::str() const { return "|" + F.str() + "," + m.str() + ">"; }

StateLabel parse_state_label(const std::string& text) {
  std::string t;
  for (char c : text)
    if (c != ' ' && c != '|' && c != '>') t.push_back(c);
  const auto comma = t.find(',');
  if (comma == std::string::npos) throw InputError("state label '" + text + "' must be F,m");
  StateLabel label{parse_half(t.substr(0, comma)), parse_half(t.substr(comma + 1))};
  if (label.F.twice() < 0 || abs(label.m) > label.F || (label.F.twice() - label.m.twice()) % 2 != 0)
    throw InputError("state label '" + text + "' is not a valid |F,m> pair");
  return label;
}

Eigen::Index ManifoldBasis::index_of(HalfInt F) const {
  const auto it = std::find(F_list.begin(), F_list.end(), F);
  if (it == F_list.end())
    throw InputError("F=" + F.str() + " is not in the m_F=" + m_F.str() + " manifold of " + level);
  return static_cast<Eigen::Index>(it - F_list.begin());
}

ManifoldBasis make_basis(const IonSpecies& species, const FineStructureLevel& level, HalfInt m_F) {
  ManifoldBasis basis{level.label, species.I, level.J, m_F, {}};
  for (HalfInt F : hyperfine_F_values(species.I, level.J))
    if (abs(m_F) <= F && (F.twice() - m_F.twice()) % 2 == 0) basis.F_list.push_back(F);
  if (basis.F_list.empty())
    throw InputError("level " + level.label + " has no states with m_F=" + m_F.str());
  return basis;
}

double zeeman_element(const IonSpecies& species, const FineStructureLevel& level, HalfInt F_prime,
                      HalfInt F, HalfInt m_F, double B) {
  require_valid_F(species, level, F_prime);
  require_valid_F(species, level, F);
  const HalfInt I = species.I, J = level.J;
  const double muB = units::bohr_magneton_hz_per_tesla * B;
  const double nuclear = F == F_prime ? species.g_I * m_F.value() * muB : 0.0;
  if (J.twice() == 0) return nuclear;

  const HalfInt one{1};
  const double inv3j = 1.0 / wigner3j(J, one, J, -J, HalfInt{0}, J);
  const double angular = parity_sign(J + I + one + m_F) * J.value() *
                         std::sqrt((F_prime.twice() + 1.0) * (F.twice() + 1.0)) *
                         wigner6j(F, F_prime, one, J, J, I) * inv3j *
                         wigner3j(F, one, F_prime, -m_F, HalfInt{0}, m_F);
  return (level.g_J - species.g_I) * muB * angular + nuclear;
}

Eigen::MatrixXd hyperfine_matrix(const IonSpecies& species, const FineStructureLevel& level,
                                 const ManifoldBasis& basis) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (Eigen::Index k = 0; k < basis.size(); ++k)
    h(k, k) = hyperfine_energy(level, species.I, basis.F_list[k]);
  return h;
}

Eigen::MatrixXd zeeman_matrix(const IonSpecies& species, const FineStructureLevel& level,
                              const ManifoldBasis& basis) {
  const Eigen::Index n = basis.size();
  Eigen::MatrixXd z(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      z(r, c) = zeeman_element(species, level, basis.F_list[r], basis.F_list[c], basis.m_F, 1.0);
  return z;
}

namespace {

ZeemanManifold diagonalize(ManifoldBasis basis, double B, const Eigen::MatrixXd& hyperfine,
                           const Eigen::MatrixXd& zeeman) {
  ZeemanManifold m;
  m.basis = std::move(basis);
  m.B = B;
  m.hamiltonian = hyperfine + B * zeeman;
  m.zeeman_per_tesla = zeeman;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.hamiltonian);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed at B=" + field_str(B));
  m.eigenvalues = solver.eigenvalues();
  m.eigenvectors = solver.eigenvectors();
  return m;
}

}  // namespace

ZeemanManifold build_manifold(const IonSpecies& species, const FineStructureLevel& level,
                              HalfInt m_F, double B) {
  ManifoldBasis basis = make_basis(species, level, m_F);
  const Eigen::MatrixXd h0 = hyperfine_matrix(species, level, basis);
  const Eigen::MatrixXd z = zeeman_matrix(species, level, basis);
  ZeemanManifold m = diagonalize(std::move(basis), B, h0, z);
  check_manifold(m);
  return m;
}

void check_manifold(const ZeemanManifold& m) {
  const Eigen::MatrixXd& h = m.hamiltonian;
  const double scale = std::max(h.norm(), 1.0);
  const Eigen::Index n = h.rows();
  if ((h - h.transpose()).norm() > 1e-12 * scale)
    throw NumericalError("manifold Hamiltonian is not symmetric");
  if (std::abs(m.eigenvalues.sum() - h.trace()) > 1e-9 * scale)
    throw NumericalError("eigenvalue sum differs from the trace");
  const Eigen::MatrixXd& v = m.eigenvectors;
  if ((v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).norm() > 1e-12 * std::sqrt(n) * 10)
    throw NumericalError("eigenvectors are not orthonormal");
  if ((v * m.eigenvalues.asDiagonal() * v.transpose() - h).norm() > 1e-10 * scale)
    throw NumericalError("eigendecomposition does not reconstruct the Hamiltonian");
}

namespace {

// Column of `vectors` with the largest |overlap| with `reference`, after
// certifying the continuation is unambiguous.
Eigen::Index best_overlap(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& reference,
                          double B, double& overlap) {
  const Eigen::VectorXd o = vectors.transpose() * reference;
  Eigen::Index best = 0;
  o.cwiseAbs().maxCoeff(&best);
  double second = 0.0;
  for (Eigen::Index k = 0; k < o.size(); ++k)
    if (k != best) second = std::max(second, std::abs(o(k)));
  const double top = std::abs(o(best));
  if (top < kMinOverlap)
    throw NumericalError("state continuation lost at B=" + field_str(B) +
                         " (overlap below 1/sqrt(2)); use a finer tracking grid");
  if (top - second < kAmbiguity)
    throw NumericalError("ambiguous state continuation at B=" + field_str(B) +
                         "; use a finer tracking grid");
  overlap = o(best);
  return best;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0)
    throw InputError("tracking grid must start at B = 0");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw InputError("tracking grid must be strictly ascending");
}

}  // namespace

std::vector<double> default_tracking_grid(double B_max, int points) {
  if (!(B_max > 0.0) || points < 2) return {0.0};
  const double top = 1.25 * B_max;
  std::vector<double> grid(points);
  for (int k = 0; k < points; ++k) grid[k] = top * k / (points - 1);
  return grid;
}

ManifoldTracker::ManifoldTracker(const IonSpecies& species, const FineStructureLevel& level,
                                 HalfInt m_F, std::vector<double> B_grid)
    : basis_(make_basis(species, level, m_F)) {
  check_grid(B_grid);
  hyperfine_ = hyperfine_matrix(species, level, basis_);
  zeeman_ = zeeman_matrix(species, level, basis_);
  const Eigen::Index n = basis_.size();

  // Zero field: the Hamiltonian is diagonal, so each F is its own eigenvector.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return hyperfine_(a, a) < hyperfine_(b, b); });
  const double escale = std::max(hyperfine_.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index k = 1; k < n; ++k)
    if (std::abs(hyperfine_(order[k], order[k]) - hyperfine_(order[k - 1], order[k - 1])) <=
        1e-12 * escale)
      throw NumericalError("level " + level.label + ": F=" + basis_.F_list[order[k - 1]].str() +
                           " and F=" + basis_.F_list[order[k]].str() +
                           " are degenerate at zero field; states cannot be labeled");

  states_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& s = states_[k];
    s.level = level.label;
    s.zero_field_label = {basis_.F_list[k], m_F};
    s.B_grid = B_grid;
    s.energies.reserve(B_grid.size());
    s.amplitudes.reserve(B_grid.size());
    s.energies.push_back(hyperfine_(k, k));
    s.amplitudes.push_back(Eigen::VectorXd::Unit(n, k));
  }

  for (std::size_t g = 1; g < B_grid.size(); ++g) {
    const ZeemanManifold m = diagonalize(basis_, B_grid[g], hyperfine_, zeeman_);
    std::vector<bool> taken(n, false);
    for (auto& s : states_) {
      double overlap = 0.0;
      const Eigen::Index col = best_overlap(m.eigenvectors, s.amplitudes.back(), B_grid[g], overlap);
      if (taken[col])
        throw NumericalError("two states continue onto one eigenvector at B=" +
                             field_str(B_grid[g]) + "; use a finer tracking grid");
      taken[col] = true;
      s.energies.push_back(m.eigenvalues(col));
      s.amplitudes.push_back((overlap >= 0 ? 1.0 : -1.0) * m.eigenvectors.col(col));
    }
  }
}

const TrackedState& ManifoldTracker::state(HalfInt F) const {
  return states_[basis_.index_of(F)];
}

ZeemanManifold ManifoldTracker::manifold(double B) const {
  return diagonalize(basis_, B, hyperfine_, zeeman_);
}

ResolvedState ManifoldTracker::at(HalfInt F, double B) const { return at(F, manifold(B)); }

ResolvedState ManifoldTracker::at(HalfInt F, const ZeemanManifold& m) const {
  return resolve_state(m, state(F));
}

ResolvedState resolve_state(const ZeemanManifold& m, const TrackedState& tracked) {
  const auto& grid = tracked.B_grid;
  if (m.B < 0.0 || m.B > grid.back() * (1.0 + 1e-12))
    throw NumericalError("B=" + field_str(m.B) + " is outside the tracked range [0, " +
                         field_str(grid.back()) + "]");
  std::size_t i = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), m.B) -
                                           grid.begin());
  i = i == 0 ? 0 : i - 1;

  ResolvedState r;
  double overlap = 0.0;
  r.column = best_overlap(m.eigenvectors, tracked.amplitudes[i], m.B, overlap);
  r.vector = overlap >= 0 ? Eigen::VectorXd(m.eigenvectors.col(r.column))
                          : Eigen::VectorXd(-m.eigenvectors.col(r.column));
  r.energy = m.eigenvalues(r.column);
  r.slope = r.vector.dot(m.zeeman_per_tesla * r.vector);
  return r;
}

std::vector<TrackedState> track_states(const IonSpecies& species, const FineStructureLevel& level,
                                       HalfInt m_F, const std::vector<double>& B_grid) {
  return ManifoldTracker(species, level, m_F, B_grid).states();
}

namespace {

void require_label(const IonSpecies& species, const FineStructureLevel& level, StateLabel s) {
  require_valid_F(species, level, s.F);
  if (abs(s.m) > s.F || (s.F.twice() - s.m.twice()) % 2 != 0)
    throw InputError("state " + s.str() + " is not valid in level " + level.label);
}

}  // namespace

TransitionSpectrum::TransitionSpectrum(const IonSpecies& species, const ClockTransition& transition,
                                       StateLabel lower, StateLabel upper, double B_max,
                                       SpectrumOptions options)
    : lower_(lower), upper_(upper), options_(options) {
  const auto& ll = species.level(transition.lower);
  const auto& ul = species.level(transition.upper);
  require_label(species, ll, lower);
  require_label(species, ul, upper);
  const auto grid = default_tracking_grid(B_max, options.tracking_points);
  lower_tracker_ = std::make_shared<ManifoldTracker>(species, ll, lower.m, grid);
  upper_tracker_ = std::make_shared<ManifoldTracker>(species, ul, upper.m, grid);
  lower_hf_ = hyperfine_energy(ll, species.I, lower.F);
  lower_linear_slope_ = lande_gF(ll.g_J, species.g_I, species.I, ll.J, lower.F) * lower.m.value() *
                        units::bohr_magneton_hz_per_tesla;
}

TransitionSpectrum::TransitionSpectrum(std::shared_ptr<const ManifoldTracker> lower_tracker,
                                       std::shared_ptr<const ManifoldTracker> upper_tracker,
                                       const IonSpecies& species, const ClockTransition& transition,
                                       StateLabel lower, StateLabel upper, SpectrumOptions options)
    : lower_tracker_(std::move(lower_tracker)),
      upper_tracker_(std::move(upper_tracker)),
      lower_(lower),
      upper_(upper),
      options_(options) {
  const auto& ll = species.level(transition.lower);
  const auto& ul = species.level(transition.upper);
  require_label(species, ll, lower);
  require_label(species, ul, upper);
  if (lower_tracker_->basis().m_F != lower.m || lower_tracker_->basis().level != ll.label ||
      upper_tracker_->basis().m_F != upper.m || upper_tracker_->basis().level != ul.label)
    throw InputError("tracker does not match the requested states");
  lower_hf_ = hyperfine_energy(ll, species.I, lower.F);
  lower_linear_slope_ = lande_gF(ll.g_J, species.g_I, species.I, ll.J, lower.F) * lower.m.value() *
                        units::bohr_magneton_hz_per_tesla;
}

double TransitionSpectrum::B_max() const {
  return std::min(lower_tracker_->B_max(), upper_tracker_->B_max());
}

ResolvedState TransitionSpectrum::lower_state(double B) const {
  if (options_.freeze_lower_linear) {
    const auto& basis = lower_tracker_->basis();
    ResolvedState r;
    r.energy = lower_hf_ + lower_linear_slope_ * B;
    r.slope = lower_linear_slope_;
    r.column = basis.index_of(lower_.F);
    r.vector = Eigen::VectorXd::Unit(basis.size(), r.column);
    return r;
  }
  return lower_tracker_->at(lower_.F, B);
}

ResolvedState TransitionSpectrum::upper_state(double B) const {
  return upper_tracker_->at(upper_.F, B);
}

double TransitionSpectrum::frequency(double B) const {
  return upper_state(B).energy - lower_state(B).energy;
}

double TransitionSpectrum::dnu_dB(double B) const {
  return upper_state(B).slope - lower_state(B).slope;
}

double transition_frequency(const IonSpecies& species, const ClockTransition& transition,
                            StateLabel lower, StateLabel upper, double B) {
  return TransitionSpectrum(species, transition, lower, upper, B).frequency(B);
}

double dnu_dB(const IonSpecies& species, const ClockTransition& transition, StateLabel lower,
              StateLabel upper, double B) {
  return TransitionSpectrum(species, transition, lower, upper, B).dnu_dB(B);
}

}  // namespace clockshift
