// Test-only oracle built on MPFR. Every enclosure produced by the library is
// checked against values computed here through a completely different route
// (correctly rounded floating point at 256 bits vs. directed dyadic series).
#pragma once

#include <mpfr.h>

#include <functional>
#include <string>

#include "litsieve/exact.hpp"

namespace test_oracle {

inline constexpr mpfr_prec_t kOraclePrec = 256;

class Real {
 public:
  Real() { mpfr_init2(v_, kOraclePrec); mpfr_set_ui(v_, 0, MPFR_RNDN); }
  explicit Real(const litsieve::Rat& x) {
    mpfr_init2(v_, kOraclePrec);
    mpfr_set_q(v_, x.get_mpq_t(), MPFR_RNDN);
  }
  explicit Real(double d) { mpfr_init2(v_, kOraclePrec); mpfr_set_d(v_, d, MPFR_RNDN); }
  explicit Real(const char* dec) {
    mpfr_init2(v_, kOraclePrec);
    mpfr_set_str(v_, dec, 10, MPFR_RNDN);
  }
  Real(const Real& o) { mpfr_init2(v_, kOraclePrec); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real& operator=(const Real& o) {
    if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

inline Real ln(const Real& x) { Real r; mpfr_log(r.get(), x.get(), MPFR_RNDN); return r; }
inline Real log2(const Real& x) { Real r; mpfr_log2(r.get(), x.get(), MPFR_RNDN); return r; }
inline Real sqrt(const Real& x) { Real r; mpfr_sqrt(r.get(), x.get(), MPFR_RNDN); return r; }
inline Real sqrt5() { Real r; mpfr_sqrt_ui(r.get(), 5, MPFR_RNDN); return r; }

inline Real operator+(const Real& a, const Real& b) { Real r; mpfr_add(r.get(), a.get(), b.get(), MPFR_RNDN); return r; }
inline Real operator-(const Real& a, const Real& b) { Real r; mpfr_sub(r.get(), a.get(), b.get(), MPFR_RNDN); return r; }
inline Real operator*(const Real& a, const Real& b) { Real r; mpfr_mul(r.get(), a.get(), b.get(), MPFR_RNDN); return r; }
inline Real operator/(const Real& a, const Real& b) { Real r; mpfr_div(r.get(), a.get(), b.get(), MPFR_RNDN); return r; }
inline bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.get(), b.get()) < 0; }
inline bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.get(), b.get()) <= 0; }

// Distance to the nearest integer.
inline Real dist_nearest(const Real& x) {
  Real f, r;
  mpfr_frac(f.get(), x.get(), MPFR_RNDN);
  mpfr_abs(f.get(), f.get(), MPFR_RNDN);
  Real one_minus;
  mpfr_ui_sub(one_minus.get(), 1, f.get(), MPFR_RNDN);
  if (mpfr_cmp(f.get(), one_minus.get()) < 0)
    mpfr_set(r.get(), f.get(), MPFR_RNDN);
  else
    mpfr_set(r.get(), one_minus.get(), MPFR_RNDN);
  return r;
}

inline bool in_bounds(const Real& v, const litsieve::Rat& lo, const litsieve::Rat& hi) {
  return mpfr_cmp_q(v.get(), lo.get_mpq_t()) >= 0 && mpfr_cmp_q(v.get(), hi.get_mpq_t()) <= 0;
}

inline bool contains_decimal(const litsieve::Rat& lo, const litsieve::Rat& hi, const char* dec) {
  Real v(dec);
  return in_bounds(v, lo, hi);
}

inline bool ln_in(const litsieve::Rat& x, const litsieve::Rat& lo, const litsieve::Rat& hi) {
  return in_bounds(ln(Real(x)), lo, hi);
}
inline bool log2_in(const litsieve::Rat& x, const litsieve::Rat& lo, const litsieve::Rat& hi) {
  return in_bounds(log2(Real(x)), lo, hi);
}
inline bool sqrt_in(const litsieve::Rat& x, const litsieve::Rat& lo, const litsieve::Rat& hi) {
  return in_bounds(sqrt(Real(x)), lo, hi);
}
inline bool pow_in(const litsieve::Rat& x, long p, unsigned long q,
                   const litsieve::Rat& lo, const litsieve::Rat& hi) {
  Real r;
  Real e = Real(litsieve::Rat(p, q));
  mpfr_pow(r.get(), Real(x).get(), e.get(), MPFR_RNDN);
  return in_bounds(r, lo, hi);
}

// Relative agreement |a-b| <= tol * |b| for enclosure midpoint vs oracle.
inline bool rel_close(const litsieve::RealBounds& enc, const Real& oracle, double tol) {
  Real mid(litsieve::mul_pow2(enc.lo + enc.hi, -1).to_rat());
  Real diff = mid - oracle;
  mpfr_abs(diff.get(), diff.get(), MPFR_RNDN);
  Real scaled;
  mpfr_abs(scaled.get(), oracle.get(), MPFR_RNDN);
  Real t(tol);
  Real lim = scaled * t;
  return mpfr_cmp(diff.get(), lim.get()) <= 0;
}

}  // namespace test_oracle
