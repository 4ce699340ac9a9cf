#pragma once

#include <string>
#include <vector>

#include "litsieve/exact.hpp"

namespace litsieve::cf {

/// A convergent p_j/q_j of a continued fraction.
struct Convergent {
  long j = 0;
  Int p;
  Int q;
};

/// A badly approximable target number.
///
/// Three forms: a quadratic irrational (P + sqrt(D))/Q, an explicit periodic
/// continued fraction, or a rational (for degenerate tests).  Quadratic and
/// periodic-CF forms are reduced mod 1 to [0,1) on construction; all the
/// sieve statements are invariant under integer shifts.
class AlphaSpec {
 public:
  enum class Kind { Quadratic, PeriodicCf, Rational };

  static AlphaSpec quadratic(const Int& P, const Int& D, const Int& Q);
  static AlphaSpec rational(const Rat& r);
  static AlphaSpec periodic_cf(std::vector<Int> preperiod, std::vector<Int> period);

  // Text forms: "quadratic:P=-1,D=5,Q=2", "cf:0;1,(1)", "rational:7/3".
  // "phi" is accepted as an alias for (-1+sqrt(5))/2.
  static AlphaSpec parse(const std::string& s);
  std::string str() const;

  Kind kind() const { return kind_; }
  bool is_rational() const { return kind_ == Kind::Rational; }
  const Rat& rational_value() const { return rat_; }

  // Enclosure of alpha itself (in [0,1)).
  RealBounds value_bounds(long prec) const;
  // Enclosure of q * alpha.
  RealBounds times_bounds(const Int& q, long prec) const;

  // Internal quadratic state (u + v sqrt(D)) / w, w > 0; v = 0 for rationals.
  struct Triple {
    Int u, v, w, D;
  };
  const Triple& triple() const { return t_; }

 private:
  AlphaSpec() = default;
  Kind kind_ = Kind::Rational;
  Triple t_;
  Rat rat_;
  std::vector<Int> cf_pre_, cf_period_;  // as given, for rendering
};

// First n partial quotients (may return fewer for rationals, whose expansion
// terminates).
std::vector<Int> expand_cf(const AlphaSpec& alpha, long n);

// Convergents p_j/q_j for j = 0..n-1 (fewer for rationals).
std::vector<Convergent> convergents(const AlphaSpec& alpha, long n);

/// Exact eventual period of the partial quotients of a quadratic irrational.
struct PeriodInfo {
  std::vector<Int> preperiod;
  std::vector<Int> period;
};
PeriodInfo cf_period(const AlphaSpec& alpha);

// Sound enclosure of ||q alpha|| with width <= 2^-prec.
RealBounds dist_nearest(const AlphaSpec& alpha, const Int& q, long prec = kDefaultPrec);

struct BadnessReport {
  Int Q;
  RealBounds delta_hat;  // min over 1 <= q <= Q of q * ||q alpha||
  Int argmin_q;
  bool exact_zero = false;  // rational alpha
};

// Minimum of q * ||q alpha|| over 1 <= q <= Q.  Skip mode walks convergent
// denominators only (local minima live there); full_scan checks every q.
BadnessReport bad_delta(const AlphaSpec& alpha, const Int& Q, bool full_scan = false,
                        long prec = kDefaultPrec);

// Rational lower bound for inf over all q >= 1 of q * ||q alpha||: the scanned
// minimum up to scan_Q combined with the classical tail bound 1/(a_max + 2)
// over the continued-fraction period.  Returns 0 for rational alpha.
Rat delta_lower_bound(const AlphaSpec& alpha, const Int& scan_Q);

}  // namespace litsieve::cf
