#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace litsieve {

using Int = mpz_class;
using Rat = mpq_class;

// Number of bits of |n|; bitlength(0) == 0.
long bitlength(const Int& n);

bool is_power_of_two(const Int& n);

// Exact floor(log2 x) for rational x > 0, by integer comparisons only.
long floor_log2(const Rat& x);
long floor_log2(const Int& n);

/// A dyadic rational mant / 2^level with level >= 0.
/// Canonical form has odd mantissa or level == 0.
struct Dyadic {
  Int mant;
  long level = 0;

  Dyadic() : mant(0) {}
  Dyadic(long v) : mant(v) {}
  explicit Dyadic(Int m) : mant(std::move(m)) {}
  Dyadic(Int m, long l) : mant(std::move(m)), level(l) { normalize(); }

  void normalize();
  Rat to_rat() const;
  bool is_zero() const { return mant == 0; }
  int sign() const { return sgn(mant); }

  // Serialized form "a/2^l".
  std::string str() const;
  static Dyadic parse(const std::string& s);

  Dyadic operator-() const { return Dyadic(-mant, level); }
};

int cmp(const Dyadic& a, const Dyadic& b);
inline bool operator==(const Dyadic& a, const Dyadic& b) { return cmp(a, b) == 0; }
inline bool operator!=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) != 0; }
inline bool operator<(const Dyadic& a, const Dyadic& b) { return cmp(a, b) < 0; }
inline bool operator<=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) <= 0; }
inline bool operator>(const Dyadic& a, const Dyadic& b) { return cmp(a, b) > 0; }
inline bool operator>=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) >= 0; }

Dyadic operator+(const Dyadic& a, const Dyadic& b);
Dyadic operator-(const Dyadic& a, const Dyadic& b);
Dyadic operator*(const Dyadic& a, const Dyadic& b);
int cmp(const Dyadic& a, const Rat& b);

// Exact multiplication by 2^k (k may be negative).
Dyadic mul_pow2(const Dyadic& a, long k);

Int floor_int(const Dyadic& a);
Int ceil_int(const Dyadic& a);

// Directed rounding of a rational to the grid 2^-level.
Dyadic round_down(const Rat& x, long level);
Dyadic round_up(const Rat& x, long level);
// Directed re-rounding of a dyadic to a coarser grid.
Dyadic round_dir(const Dyadic& x, long level, bool up);

/// Enclosure [lo, hi] of a real value; every operation preserves containment.
struct RealBounds {
  Dyadic lo, hi;

  RealBounds() = default;
  RealBounds(Dyadic l, Dyadic h) : lo(std::move(l)), hi(std::move(h)) {}

  static RealBounds exactly(const Dyadic& d) { return {d, d}; }
  static RealBounds of_rat(const Rat& x, long prec);

  Dyadic width() const { return hi - lo; }
  bool contains(const Rat& x) const;
  bool is_point() const { return lo == hi; }
};

RealBounds operator+(const RealBounds& a, const RealBounds& b);
RealBounds operator-(const RealBounds& a, const RealBounds& b);
RealBounds operator*(const RealBounds& a, const RealBounds& b);
RealBounds operator*(const Rat& a, const RealBounds& b);

// Division and reciprocal; the denominator interval must not contain zero.
RealBounds rb_div(const RealBounds& a, const RealBounds& b, long prec);
RealBounds rb_recip(const RealBounds& a, long prec);

RealBounds rb_abs(const RealBounds& a);
RealBounds rb_min(const RealBounds& a, const RealBounds& b);
// Outward rounding to ~frac_bits fractional bits (caps mantissa growth in loops).
RealBounds rb_round(const RealBounds& a, long frac_bits);

// Enclosure of min_n |x - n| (distance to nearest integer) over the interval x.
RealBounds dist_to_int_bounds(const RealBounds& x);

// --- Logarithms and roots -------------------------------------------------
//
// All enclosures are computed by argument reduction to [1,2) plus a truncated
// atanh series with an explicit remainder bound, evaluated in fixed point
// with directed rounding.  Guaranteed width <= 2^-prec.

inline constexpr long kDefaultPrec = 64;
inline constexpr long kMaxPrec = 4096;

RealBounds ln2_bounds(long prec);
RealBounds e_bounds(long prec);

RealBounds ln_bounds(const Rat& x, long prec);    // x > 0
RealBounds log2_bounds(const Rat& x, long prec);  // x > 0
// Monotone extensions to interval arguments (argument must be > 0).
RealBounds ln_bounds(const RealBounds& x, long prec);
RealBounds log2_bounds(const RealBounds& x, long prec);

RealBounds sqrt_bounds(const Rat& x, long prec);  // x >= 0
RealBounds sqrt_bounds(const RealBounds& x, long prec);

// x^e for rational exponent e = p/q via exact powers and directed q-th roots.
RealBounds pow_bounds(const Rat& x, const Rat& e, long prec);    // x > 0
RealBounds pow_bounds(const RealBounds& x, const Rat& e, long prec);

// floor(log2 v) for a value known only through an enclosure callback.
// Calls eval at increasing precision until the floor is decided.
// Throws std::runtime_error if still undecided at kMaxPrec.
template <class F>
long decided_floor_log2(F eval, long prec0 = kDefaultPrec) {
  for (long p = prec0; p <= kMaxPrec; p *= 2) {
    RealBounds v = eval(p);
    if (v.lo.sign() <= 0) continue;
    long flo = floor_log2(v.lo.to_rat());
    long fhi = floor_log2(v.hi.to_rat());
    if (flo == fhi) return flo;
  }
  throw std::runtime_error("floor(log2) undecided at maximum precision");
}

// --- Serialization helpers -------------------------------------------------

std::string rat_str(const Rat& x);            // "num/den", den always present
Rat parse_rat(const std::string& s);          // accepts "num" and "num/den"
// Accepts "2^-8", "2^3", "a/2^l", and plain integers; value must be dyadic.
Dyadic parse_dyadic_string(const std::string& s);
// Deterministic decimal rendering with the given significant digits.
std::string decimal_string(const Dyadic& x, int sig_digits = 12);
std::string decimal_string(const RealBounds& x, int sig_digits = 12);

}  // namespace litsieve
