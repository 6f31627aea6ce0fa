#include "clockshift/angular_momentum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "clockshift/errors.hpp"

namespace clockshift {

namespace mp = boost::multiprecision;

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }

int parity_sign(HalfInt x) {
  if (!x.is_integer()) throw InputError("phase exponent " + x.str() + " is not an integer");
  return (x.twice() / 2) % 2 == 0 ? 1 : -1;
}

bool triangle(HalfInt a, HalfInt b, HalfInt c) {
  const int ta = a.twice(), tb = b.twice(), tc = c.twice();
  if (ta < 0 || tb < 0 || tc < 0) return false;
  if ((ta + tb + tc) % 2 != 0) return false;
  return tc <= ta + tb && tc >= std::abs(ta - tb);
}

namespace {

const mp::cpp_int& factorial(int n) {
  // Perimeters here stay far below this bound (j <= 9 or so).
  static const std::vector<mp::cpp_int> table = [] {
    std::vector<mp::cpp_int> t(201);
    t[0] = 1;
    for (int i = 1; i < static_cast<int>(t.size()); ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n >= static_cast<int>(table.size()))
    throw InputError("factorial argument out of range: " + std::to_string(n));
  return table[n];
}

// Triangle coefficient (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)! from twice-values.
mp::cpp_rational delta(int ta, int tb, int tc) {
  return mp::cpp_rational(factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2) *
                              factorial((-ta + tb + tc) / 2),
                          factorial((ta + tb + tc) / 2 + 1));
}

// sign * sqrt(r) for an exact non-negative rational r.
double signed_sqrt(int sign, const mp::cpp_rational& r) {
  if (sign == 0 || r == 0) return 0.0;
  const long double num = mp::numerator(r).convert_to<long double>();
  const long double den = mp::denominator(r).convert_to<long double>();
  return static_cast<double>(sign * std::sqrt(num / den));
}

int sign_of(const mp::cpp_rational& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

bool triad_ok(int ta, int tb, int tc) {
  return triangle(half(ta), half(tb), half(tc));
}

using Key = std::uint64_t;

Key pack(const std::array<int, 6>& v) {
  Key k = 0;
  for (int x : v) k = (k << 10) | static_cast<Key>((x + 512) & 0x3ff);
  return k;
}

struct SymbolCache {
  std::shared_mutex mutex;
  std::unordered_map<Key, double> values;

  template <typename Compute>
  double get(const std::array<int, 6>& args, Compute&& compute) {
    const Key key = pack(args);
    {
      std::shared_lock lock(mutex);
      if (auto it = values.find(key); it != values.end()) return it->second;
    }
    const double v = compute();
    std::unique_lock lock(mutex);
    values.emplace(key, v);
    return v;
  }

  std::size_t size() {
    std::shared_lock lock(mutex);
    return values.size();
  }
};

SymbolCache& cache3j() {
  static SymbolCache c;
  return c;
}

SymbolCache& cache6j() {
  static SymbolCache c;
  return c;
}

bool in_key_range(const std::array<int, 6>& v) {
  return std::all_of(v.begin(), v.end(), [](int x) { return x >= -512 && x < 512; });
}

}  // namespace

namespace detail {

double wigner3j_uncached(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (!triad_ok(tj1, tj2, tj3)) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;
  if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0) return 0.0;

  // Integer arguments of the Racah sum.
  const int a = (tj3 - tj2 + tm1) / 2;  // j3 - j2 + m1
  const int b = (tj3 - tj1 - tm2) / 2;  // j3 - j1 - m2
  const int c = (tj1 + tj2 - tj3) / 2;  // j1 + j2 - j3
  const int d = (tj1 - tm1) / 2;        // j1 - m1
  const int e = (tj2 + tm2) / 2;        // j2 + m2
  const int kmin = std::max({0, -a, -b});
  const int kmax = std::min({c, d, e});

  mp::cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    mp::cpp_int den = factorial(k) * factorial(a + k) * factorial(b + k) * factorial(c - k) *
                      factorial(d - k) * factorial(e - k);
    mp::cpp_rational term(1, den);
    if (k % 2 == 0)
      sum += term;
    else
      sum -= term;
  }

  const mp::cpp_rational prefactor =
      delta(tj1, tj2, tj3) *
      mp::cpp_rational(factorial((tj1 + tm1) / 2) * factorial((tj1 - tm1) / 2) *
                       factorial((tj2 + tm2) / 2) * factorial((tj2 - tm2) / 2) *
                       factorial((tj3 + tm3) / 2) * factorial((tj3 - tm3) / 2));

  // (-1)^(j1 - j2 - m3)
  const int phase = ((tj1 - tj2 - tm3) / 2) % 2 == 0 ? 1 : -1;
  return signed_sqrt(phase * sign_of(sum), prefactor * sum * sum);
}

double wigner6j_uncached(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
  if (!triad_ok(tj1, tj2, tj3) || !triad_ok(tj1, tj5, tj6) || !triad_ok(tj4, tj2, tj6) ||
      !triad_ok(tj4, tj5, tj3))
    return 0.0;

  const int abc = (tj1 + tj2 + tj3) / 2;
  const int aef = (tj1 + tj5 + tj6) / 2;
  const int dbf = (tj4 + tj2 + tj6) / 2;
  const int dec = (tj4 + tj5 + tj3) / 2;
  const int abde = (tj1 + tj2 + tj4 + tj5) / 2;
  const int acdf = (tj1 + tj3 + tj4 + tj6) / 2;
  const int bcef = (tj2 + tj3 + tj5 + tj6) / 2;
  const int kmin = std::max({abc, aef, dbf, dec});
  const int kmax = std::min({abde, acdf, bcef});

  mp::cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    mp::cpp_int den = factorial(k - abc) * factorial(k - aef) * factorial(k - dbf) *
                      factorial(k - dec) * factorial(abde - k) * factorial(acdf - k) *
                      factorial(bcef - k);
    mp::cpp_rational term(factorial(k + 1), den);
    if (k % 2 == 0)
      sum += term;
    else
      sum -= term;
  }

  const mp::cpp_rational prefactor = delta(tj1, tj2, tj3) * delta(tj1, tj5, tj6) *
                                     delta(tj4, tj2, tj6) * delta(tj4, tj5, tj3);
  return signed_sqrt(sign_of(sum), prefactor * sum * sum);
}

}  // namespace detail

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  const std::array<int, 3> tj{j1.twice(), j2.twice(), j3.twice()};
  const std::array<int, 3> tm{m1.twice(), m2.twice(), m3.twice()};
  if (tm[0] + tm[1] + tm[2] != 0) return 0.0;
  if (!triad_ok(tj[0], tj[1], tj[2])) return 0.0;

  // Canonical representative under column permutations and m -> -m; both
  // odd permutations and the sign flip contribute (-1)^(j1+j2+j3).
  const int odd_phase = ((tj[0] + tj[1] + tj[2]) / 2) % 2 == 0 ? 1 : -1;
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}}};
  std::array<int, 6> best{};
  int best_phase = 1;
  bool first = true;
  for (int p = 0; p < 6; ++p) {
    for (int flip = 0; flip < 2; ++flip) {
      const auto& idx = perms[p];
      const int s = flip ? -1 : 1;
      std::array<int, 6> cand{tj[idx[0]],     tj[idx[1]],     tj[idx[2]],
                              s * tm[idx[0]], s * tm[idx[1]], s * tm[idx[2]]};
      int phase = 1;
      if (p >= 3) phase *= odd_phase;
      if (flip) phase *= odd_phase;
      if (first || cand < best) {
        best = cand;
        best_phase = phase;
        first = false;
      }
    }
  }
  if (!in_key_range(best))
    return detail::wigner3j_uncached(tj[0], tj[1], tj[2], tm[0], tm[1], tm[2]);
  const double v = cache3j().get(best, [&] {
    return detail::wigner3j_uncached(best[0], best[1], best[2], best[3], best[4], best[5]);
  });
  return best_phase * v;
}

double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  const std::array<int, 3> up{j1.twice(), j2.twice(), j3.twice()};
  const std::array<int, 3> lo{j4.twice(), j5.twice(), j6.twice()};
  if (!triad_ok(up[0], up[1], up[2]) || !triad_ok(up[0], lo[1], lo[2]) ||
      !triad_ok(lo[0], up[1], lo[2]) || !triad_ok(lo[0], lo[1], up[2]))
    return 0.0;

  // Tetrahedral symmetry: column permutations and upper/lower exchange in
  // any two columns.
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}}};
  static constexpr std::array<std::array<bool, 3>, 4> swaps{
      {{false, false, false}, {true, true, false}, {true, false, true}, {false, true, true}}};
  std::array<int, 6> best{};
  bool first = true;
  for (const auto& idx : perms) {
    for (const auto& sw : swaps) {
      std::array<int, 6> cand{};
      for (int c = 0; c < 3; ++c) {
        const int u = up[idx[c]], l = lo[idx[c]];
        cand[c] = sw[c] ? l : u;
        cand[c + 3] = sw[c] ? u : l;
      }
      if (first || cand < best) {
        best = cand;
        first = false;
      }
    }
  }
  if (!in_key_range(best))
    return detail::wigner6j_uncached(up[0], up[1], up[2], lo[0], lo[1], lo[2]);
  return cache6j().get(best, [&] {
    return detail::wigner6j_uncached(best[0], best[1], best[2], best[3], best[4], best[5]);
  });
}

std::size_t symbol_cache_size() { return cache3j().size() + cache6j().size(); }

double lande_gF(double g_J, double g_I, HalfInt I, HalfInt J, HalfInt F) {
  if (!triangle(I, J, F))
    throw InputError("F=" + F.str() + " cannot be formed from I=" + I.str() + ", J=" + J.str());
  if (F.twice() == 0) return 0.0;
  const double f = F.casimir(), j = J.casimir(), i = I.casimir();
  return g_J * (f + j - i) / (2.0 * f) + g_I * (f + i - j) / (2.0 * f);
}

}  // namespace clockshift
