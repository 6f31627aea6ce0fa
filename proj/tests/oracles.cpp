#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {
namespace {

constexpr double kMuB = 13.9962449361e9;  // Hz/T

long double fact(double x) {
  const long n = std::lround(x);
  if (n < 0) throw std::domain_error("negative factorial");
  long double r = 1;
  for (long k = 2; k <= n; ++k) r *= k;
  return r;
}

bool is_int(double x) { return std::abs(x - std::round(x)) < 1e-9; }

bool tri(double a, double b, double c) {
  return c >= std::abs(a - b) - 1e-9 && c <= a + b + 1e-9 && is_int(a + b + c);
}

long double delta(double a, double b, double c) {
  return fact(a + b - c) * fact(a - b + c) * fact(-a + b + c) / fact(a + b + c + 1);
}

}  // namespace

double wigner3j(double j1, double j2, double j3, double m1, double m2, double m3) {
  if (std::abs(m1 + m2 + m3) > 1e-9 || !tri(j1, j2, j3)) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if (!is_int(j1 + m1) || !is_int(j2 + m2) || !is_int(j3 + m3)) return 0.0;
  const long double pre = std::sqrt(delta(j1, j2, j3) * fact(j1 + m1) * fact(j1 - m1) *
                                    fact(j2 + m2) * fact(j2 - m2) * fact(j3 + m3) * fact(j3 - m3));
  const double tmin = std::max({0.0, j2 - j3 - m1, j1 - j3 + m2});
  const double tmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  long double sum = 0;
  for (double t = tmin; t <= tmax + 1e-9; t += 1.0) {
    const long double den = fact(t) * fact(j3 - j2 + t + m1) * fact(j3 - j1 + t - m2) *
                            fact(j1 + j2 - j3 - t) * fact(j1 - t - m1) * fact(j2 - t + m2);
    sum += ((std::lround(t) % 2) ? -1.0L : 1.0L) / den;
  }
  const long phase = std::lround(j1 - j2 - m3);
  return static_cast<double>(((phase % 2) ? -1.0L : 1.0L) * pre * sum);
}

double wigner6j(double j1, double j2, double j3, double j4, double j5, double j6) {
  if (!tri(j1, j2, j3) || !tri(j1, j5, j6) || !tri(j4, j2, j6) || !tri(j4, j5, j3)) return 0.0;
  const double a1 = j1 + j2 + j3, a2 = j1 + j5 + j6, a3 = j4 + j2 + j6, a4 = j4 + j5 + j3;
  const double b1 = j1 + j2 + j4 + j5, b2 = j2 + j3 + j5 + j6, b3 = j3 + j1 + j6 + j4;
  const long double pre =
      std::sqrt(delta(j1, j2, j3) * delta(j1, j5, j6) * delta(j4, j2, j6) * delta(j4, j5, j3));
  long double sum = 0;
  const double tmin = std::max({a1, a2, a3, a4});
  const double tmax = std::min({b1, b2, b3});
  for (double t = tmin; t <= tmax + 1e-9; t += 1.0) {
    const long double den = fact(t - a1) * fact(t - a2) * fact(t - a3) * fact(t - a4) *
                            fact(b1 - t) * fact(b2 - t) * fact(b3 - t);
    sum += ((std::lround(t) % 2) ? -1.0L : 1.0L) * fact(t + 1) / den;
  }
  return static_cast<double>(pre * sum);
}

Spectrum uncoupled(const LevelParams& p, double m_F, double field) {
  std::vector<std::pair<double, double>> basis;  // (m_I, m_J)
  for (double mi = -p.I; mi <= p.I + 1e-9; mi += 1.0)
    for (double mj = -p.J; mj <= p.J + 1e-9; mj += 1.0)
      if (std::abs(mi + mj - m_F) < 1e-9) basis.emplace_back(mi, mj);
  const auto n = static_cast<Eigen::Index>(basis.size());
  const double I = p.I, J = p.J;

  // I.J in the product basis, then the quadrupole term as a polynomial in it.
  Eigen::MatrixXd IJ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto [mi, mj] = basis[a];
    IJ(a, a) = mi * mj;
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto [ni, nj] = basis[b];
      // (I+ J- + I- J+)/2
      if (std::abs(ni - mi - 1) < 1e-9 && std::abs(nj - mj + 1) < 1e-9)
        IJ(b, a) += 0.5 * std::sqrt(I * (I + 1) - mi * (mi + 1)) * std::sqrt(J * (J + 1) - mj * (mj - 1));
      if (std::abs(ni - mi + 1) < 1e-9 && std::abs(nj - mj - 1) < 1e-9)
        IJ(b, a) += 0.5 * std::sqrt(I * (I + 1) - mi * (mi - 1)) * std::sqrt(J * (J + 1) - mj * (mj + 1));
    }
  }
  Eigen::MatrixXd H = p.A * IJ;
  if (I >= 1 && J >= 1) {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    H += p.B * (3.0 * IJ * IJ + 1.5 * IJ - I * (I + 1) * J * (J + 1) * id) /
         (2.0 * I * (2 * I - 1) * J * (2 * J - 1));
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto [mi, mj] = basis[a];
    H(a, a) += kMuB * field * (p.g_J * mj + p.g_I * mi);
    if (J >= 1) Q(a, a) = (3 * mj * mj - J * (J + 1)) / (J * (2 * J - 1));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  Spectrum s;
  for (Eigen::Index k = 0; k < n; ++k) {
    s.energies.push_back(es.eigenvalues()(k));
    const Eigen::VectorXd v = es.eigenvectors().col(k);
    s.q.push_back(v.dot(Q * v));
  }
  return s;
}

namespace {

// dE carries the sign of A, so the root branch is fixed by F alone.
struct BRTerms {
  double base, sign, dE, x_per_B, a;
  bool stretched;
};

BRTerms br_terms(const LevelParams& p, double F, double m) {
  const double dE = p.A * (p.I + 0.5);
  const bool upper_F = F > p.I;
  BRTerms t{};
  t.dE = dE;
  t.base = -dE / (2 * (2 * p.I + 1));
  t.sign = upper_F ? 1.0 : -1.0;
  t.x_per_B = (p.g_J - p.g_I) * kMuB / dE;
  t.a = 4 * m / (2 * p.I + 1);
  t.stretched = std::abs(std::abs(m) - (p.I + 0.5)) < 1e-9;
  return t;
}

}  // namespace

double breit_rabi(const LevelParams& p, double F, double m, double field) {
  if (p.J != 0.5) throw std::domain_error("Breit-Rabi needs J=1/2");
  if (std::abs(std::abs(m) - (p.I + 0.5)) < 1e-9)
    return p.A * p.I / 2 + kMuB * field * (p.g_J * 0.5 + p.g_I * p.I) * (m > 0 ? 1 : -1);
  (void)F;
  const BRTerms t = br_terms(p, F, m);
  const double x = t.x_per_B * field;
  return t.base + p.g_I * kMuB * m * field + t.sign * t.dE / 2 * std::sqrt(1 + t.a * x + x * x);
}

double breit_rabi_curvature(const LevelParams& p, double F, double m, double field) {
  if (std::abs(std::abs(m) - (p.I + 0.5)) < 1e-9) return 0.0;
  const BRTerms t = br_terms(p, F, m);
  const double k = t.x_per_B, x = k * field;
  const double f = 1 + t.a * x + x * x;
  const double f1 = t.a * k + 2 * k * x;
  const double f2 = 2 * k * k;
  return t.sign * t.dE / 2 * (f2 / (2 * std::sqrt(f)) - f1 * f1 / (4 * std::pow(f, 1.5)));
}

double broadening_hz(double C2, double alpha2J_au, double delta_alpha0_au, int Z, double mass_amu,
                     double omega_z, double f_c, double N) {
  const double alpha = 7.2973525693e-3;
  const double hbar = 6.62607015e-34 / (2 * M_PI);
  const double c = 299792458.0;
  const double m = mass_amu * 1.66053906660e-27;
  const double x = Z * Z * alpha * hbar * omega_z / (m * c * c);
  return std::abs(C2) / 4 * std::abs(alpha2J_au / delta_alpha0_au) * std::pow(x, 2.0 / 3.0) * f_c *
         std::pow(N, 2.0 / 3.0);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace oracle
