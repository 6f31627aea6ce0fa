#pragma once

// Wigner 3j and 6j symbols over half-integer arguments.
//
// Racah sums are evaluated in exact rational arithmetic; the only rounding
// happens in the final square root. Selection-rule zeros are exact.

#include <compare>
#include <cstdlib>
#include <ostream>
#include <string>

namespace clockshift {

/// An angular momentum quantum number j or projection m, stored as 2j.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  /// Integer value: HalfInt{3} == 3.
  constexpr explicit HalfInt(int value) : twice_(2 * value) {}

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  /// j(j+1)
  constexpr double casimir() const { return 0.25 * twice_ * (twice_ + 2); }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt& operator+=(HalfInt o) {
    twice_ += o.twice_;
    return *this;
  }
  constexpr HalfInt& operator-=(HalfInt o) {
    twice_ -= o.twice_;
    return *this;
  }
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return a += b; }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return a -= b; }
  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

  std::string str() const;

 private:
  int twice_ = 0;
};

constexpr HalfInt abs(HalfInt h) { return HalfInt::from_twice(std::abs(h.twice())); }

/// j = n/2
constexpr HalfInt half(int n) { return HalfInt::from_twice(n); }

/// (-1)^x for x an integer-valued HalfInt. Throws if x is not an integer.
int parity_sign(HalfInt x);

std::ostream& operator<<(std::ostream& os, HalfInt h);

/// True if (a, b, c) satisfy the triangle rule with integer perimeter.
bool triangle(HalfInt a, HalfInt b, HalfInt c);

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3). Zero outside the selection rules.
double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3);

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}. Zero unless all four triads close.
double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

/// Uncached evaluations, used by tests and to fill the cache.
namespace detail {
double wigner3j_uncached(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);
double wigner6j_uncached(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6);
}  // namespace detail

/// Number of entries currently held in the 3j and 6j caches.
std::size_t symbol_cache_size();

/// Landé g_F in the low-field limit. Returns 0 for F = 0.
double lande_gF(double g_J, double g_I, HalfInt I, HalfInt J, HalfInt F);

}  // namespace clockshift
