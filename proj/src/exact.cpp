#include "litsieve/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>

namespace litsieve {

long bitlength(const Int& n) {
  if (n == 0) return 0;
  return static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2));
}

bool is_power_of_two(const Int& n) {
  if (n <= 0) return false;
  return mpz_popcount(n.get_mpz_t()) == 1;
}

long floor_log2(const Int& n) {
  if (n <= 0) throw std::domain_error("floor_log2: argument must be positive");
  return bitlength(n) - 1;
}

long floor_log2(const Rat& x) {
  if (sgn(x) <= 0) throw std::domain_error("floor_log2: argument must be positive");
  const Int& num = x.get_num();
  const Int& den = x.get_den();
  long e = bitlength(num) - bitlength(den);
  // e is within 1 of the true floor; fix up by exact comparison.
  // x >= 2^e  <=>  num >= den << e (for e >= 0), num << -e >= den otherwise.
  auto ge_pow2 = [&](long k) {
    Int lhs = num, rhs = den;
    if (k >= 0)
      rhs <<= k;
    else
      lhs <<= -k;
    return lhs >= rhs;
  };
  if (!ge_pow2(e)) --e;
  if (ge_pow2(e + 1)) ++e;
  return e;
}

// --- Dyadic -----------------------------------------------------------------

void Dyadic::normalize() {
  if (level < 0) throw std::invalid_argument("Dyadic: negative level");
  if (mant == 0) {
    level = 0;
    return;
  }
  unsigned long tz = mpz_scan1(mant.get_mpz_t(), 0);
  long drop = std::min<long>(static_cast<long>(tz), level);
  if (drop > 0) {
    mant >>= drop;
    level -= drop;
  }
}

Rat Dyadic::to_rat() const {
  Rat r(mant);
  if (level > 0) {
    Int d = 1;
    d <<= level;
    r /= Rat(d);
  }
  return r;
}

std::string Dyadic::str() const {
  return mant.get_str() + "/2^" + std::to_string(level);
}

Dyadic Dyadic::parse(const std::string& s) { return parse_dyadic_string(s); }

int cmp(const Dyadic& a, const Dyadic& b) {
  long l = std::max(a.level, b.level);
  Int am = a.mant << (l - a.level);
  Int bm = b.mant << (l - b.level);
  return ::cmp(am, bm);
}

int cmp(const Dyadic& a, const Rat& b) {
  // a.mant / 2^a.level  vs  num/den  <=>  a.mant * den vs num << level
  Int lhs = a.mant * b.get_den();
  Int rhs = b.get_num() << a.level;
  return ::cmp(lhs, rhs);
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  long l = std::max(a.level, b.level);
  Int m = (a.mant << (l - a.level)) + (b.mant << (l - b.level));
  return Dyadic(std::move(m), l);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) {
  long l = std::max(a.level, b.level);
  Int m = (a.mant << (l - a.level)) - (b.mant << (l - b.level));
  return Dyadic(std::move(m), l);
}

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  return Dyadic(a.mant * b.mant, a.level + b.level);
}

Dyadic mul_pow2(const Dyadic& a, long k) {
  if (k >= 0) {
    long drop = std::min(k, a.level);
    Dyadic r;
    r.mant = a.mant << (k - drop);
    r.level = a.level - drop;
    r.normalize();
    return r;
  }
  return Dyadic(a.mant, a.level - k);
}

Int floor_int(const Dyadic& a) {
  Int q;
  mpz_fdiv_q_2exp(q.get_mpz_t(), a.mant.get_mpz_t(), a.level);
  return q;
}

Int ceil_int(const Dyadic& a) {
  Int q;
  mpz_cdiv_q_2exp(q.get_mpz_t(), a.mant.get_mpz_t(), a.level);
  return q;
}

Dyadic round_down(const Rat& x, long level) {
  // floor(x * 2^level) / 2^level
  Int num = x.get_num() << level;
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
  return Dyadic(std::move(q), level);
}

Dyadic round_up(const Rat& x, long level) {
  Int num = x.get_num() << level;
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
  return Dyadic(std::move(q), level);
}

Dyadic round_dir(const Dyadic& x, long level, bool up) {
  if (x.level <= level) return x;
  long drop = x.level - level;
  Int q;
  if (up)
    mpz_cdiv_q_2exp(q.get_mpz_t(), x.mant.get_mpz_t(), drop);
  else
    mpz_fdiv_q_2exp(q.get_mpz_t(), x.mant.get_mpz_t(), drop);
  return Dyadic(std::move(q), level);
}

// --- RealBounds --------------------------------------------------------------

RealBounds RealBounds::of_rat(const Rat& x, long prec) {
  return {round_down(x, prec), round_up(x, prec)};
}

bool RealBounds::contains(const Rat& x) const {
  return cmp(lo, x) <= 0 && cmp(hi, x) >= 0;
}

RealBounds operator+(const RealBounds& a, const RealBounds& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}

RealBounds operator-(const RealBounds& a, const RealBounds& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}

RealBounds operator*(const RealBounds& a, const RealBounds& b) {
  Dyadic c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
  Dyadic lo = std::min(std::min(c1, c2), std::min(c3, c4));
  Dyadic hi = std::max(std::max(c1, c2), std::max(c3, c4));
  return {std::move(lo), std::move(hi)};
}

RealBounds operator*(const Rat& a, const RealBounds& b) {
  long prec = std::max(b.lo.level, b.hi.level) + kDefaultPrec;
  Rat lo1 = a * b.lo.to_rat();
  Rat hi1 = a * b.hi.to_rat();
  if (sgn(a) < 0) std::swap(lo1, hi1);
  return {round_down(lo1, prec), round_up(hi1, prec)};
}

RealBounds rb_div(const RealBounds& a, const RealBounds& b, long prec) {
  if (b.lo.sign() <= 0 && b.hi.sign() >= 0)
    throw std::domain_error("rb_div: denominator interval contains zero");
  Rat c1 = a.lo.to_rat() / b.lo.to_rat();
  Rat c2 = a.lo.to_rat() / b.hi.to_rat();
  Rat c3 = a.hi.to_rat() / b.lo.to_rat();
  Rat c4 = a.hi.to_rat() / b.hi.to_rat();
  Rat lo = std::min(std::min(c1, c2), std::min(c3, c4));
  Rat hi = std::max(std::max(c1, c2), std::max(c3, c4));
  return {round_down(lo, prec), round_up(hi, prec)};
}

RealBounds rb_recip(const RealBounds& a, long prec) {
  return rb_div(RealBounds::exactly(Dyadic(1)), a, prec);
}

RealBounds rb_abs(const RealBounds& a) {
  if (a.lo.sign() >= 0) return a;
  if (a.hi.sign() <= 0) return {-a.hi, -a.lo};
  return {Dyadic(0), std::max(-a.lo, a.hi)};
}

RealBounds rb_min(const RealBounds& a, const RealBounds& b) {
  return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
}

RealBounds rb_round(const RealBounds& a, long frac_bits) {
  return {round_dir(a.lo, frac_bits, false), round_dir(a.hi, frac_bits, true)};
}

RealBounds dist_to_int_bounds(const RealBounds& x) {
  static const Dyadic half(Int(1), 1);
  Dyadic w = x.width();
  if (cmp(w, Dyadic(1)) >= 0) return {Dyadic(0), half};
  Int n0 = floor_int(x.lo);
  Dyadic dlo_l = x.lo - Dyadic(n0);        // distance of lo above n0, in [0,1)
  Dyadic dlo = std::min(dlo_l, Dyadic(1) - dlo_l);
  Int n1 = floor_int(x.hi);
  Dyadic dhi_l = x.hi - Dyadic(n1);
  Dyadic dhi = std::min(dhi_l, Dyadic(1) - dhi_l);

  // An integer lies in the interval iff the floor changes or lo is integral.
  bool integer_inside = (n0 != n1) || dlo_l.is_zero();
  Dyadic lo = integer_inside ? Dyadic(0) : std::min(dlo, dhi);

  // Max of the tent over the interval: a half-integer inside pushes it to 1/2.
  Dyadic h0 = Dyadic(n0) + half;
  bool half_inside = cmp(x.lo, h0) <= 0 && cmp(x.hi, h0) >= 0;
  if (!half_inside && n0 != n1) {
    Dyadic h1 = Dyadic(n1) + half;
    half_inside = cmp(x.lo, h1) <= 0 && cmp(x.hi, h1) >= 0;
  }
  Dyadic hi = half_inside ? half : std::max(dlo, dhi);
  return {std::move(lo), std::move(hi)};
}

// --- Logarithms --------------------------------------------------------------

namespace {

// Enclosure of atanh(t) for t given by scaled bounds [tlo, thi]/2^w,
// with 0 <= t <= 0.4.  Results scaled by 2^w.
void atanh_fix(const Int& tlo, const Int& thi, long w, Int& slo, Int& shi) {
  Int t2lo = (tlo * tlo) >> w;
  Int t2hi = ((thi * thi) >> w) + 1;
  Int plo = tlo, phi = thi;
  slo = 0;
  shi = 0;
  for (unsigned long k = 1;; k += 2) {
    Int term_lo, term_hi;
    mpz_fdiv_q_ui(term_lo.get_mpz_t(), plo.get_mpz_t(), k);
    mpz_cdiv_q_ui(term_hi.get_mpz_t(), phi.get_mpz_t(), k);
    slo += term_lo;
    shi += term_hi;
    plo = (plo * t2lo) >> w;
    phi = ((phi * t2hi) >> w) + 1;
    if (phi <= 4) {
      // Tail sum <= phi/(k+2) * 1/(1-t^2) <= phi * 2; phi is already tiny.
      shi += phi * 2 + 1;
      break;
    }
  }
}

struct LnCache {
  std::mutex mu;
  long prec = 0;
  RealBounds val;
};

RealBounds ln_of_rat_core(const Rat& x, long prec);

RealBounds cached_const(LnCache& cache, long prec, RealBounds (*compute)(long)) {
  std::scoped_lock lk(cache.mu);
  if (cache.prec < prec) {
    cache.val = compute(prec);
    cache.prec = prec;
  }
  return rb_round(cache.val, prec + 4);
}

RealBounds compute_ln2(long prec) {
  // ln 2 = 2 atanh(1/3)
  long w = prec + 16;
  Int t = (Int(1) << w) / 3;  // floor(2^w / 3)
  Int slo, shi;
  atanh_fix(t, t + 1, w, slo, shi);
  return {Dyadic(slo * 2 - 2, w), Dyadic(shi * 2 + 2, w)};
}

RealBounds compute_e(long prec) {
  // e = sum 1/k!; two directed chains, tail < 2 * last upper term.
  long w = prec + 8;
  Int term_lo = Int(1) << w;
  Int term_hi = term_lo;
  Int slo = 0, shi = 0;
  for (unsigned long k = 1;; ++k) {
    slo += term_lo;
    shi += term_hi;
    mpz_fdiv_q_ui(term_lo.get_mpz_t(), term_lo.get_mpz_t(), k);
    mpz_cdiv_q_ui(term_hi.get_mpz_t(), term_hi.get_mpz_t(), k);
    if (term_hi <= 2 && k >= 4) {
      shi += term_hi * 2 + 1;
      break;
    }
  }
  return {Dyadic(slo, w), Dyadic(shi, w)};
}

LnCache g_ln2_cache;
LnCache g_e_cache;

RealBounds ln_of_rat_core(const Rat& x, long prec) {
  if (sgn(x) <= 0) throw std::domain_error("ln: argument must be positive");
  if (x == 1) return RealBounds::exactly(Dyadic(0));
  long e = floor_log2(x);
  Rat m = x;
  {
    Int two = 1;
    if (e >= 0) {
      two <<= e;
      m /= Rat(two);
    } else {
      two <<= -e;
      m *= Rat(two);
    }
  }
  // m in [1,2); t = (m-1)/(m+1) in [0, 1/3]
  long w = prec + 16;
  Rat t = (m - 1) / (m + 1);
  Int tlo = (t.get_num() << w) / t.get_den();  // floor(t * 2^w)
  Int thi = tlo + 1;
  Int slo, shi;
  if (tlo == 0 && thi == 0) {
    slo = 0;
    shi = 0;
  } else {
    atanh_fix(tlo, thi, w, slo, shi);
  }
  RealBounds lnm(Dyadic(slo * 2 - 2, w), Dyadic(shi * 2 + 2, w));
  if (e == 0) return lnm;
  RealBounds ln2 = ln2_bounds(prec + 8 + bitlength(Int(std::abs(e))));
  RealBounds scaled = Rat(e) * ln2;
  return lnm + scaled;
}

}  // namespace

RealBounds ln2_bounds(long prec) { return cached_const(g_ln2_cache, prec, compute_ln2); }
RealBounds e_bounds(long prec) { return cached_const(g_e_cache, prec, compute_e); }

RealBounds ln_bounds(const Rat& x, long prec) {
  for (long p = prec + 8;; p *= 2) {
    RealBounds r = rb_round(ln_of_rat_core(x, p), prec + 6);
    if (cmp(r.width(), Dyadic(Int(1), prec)) <= 0) return r;
    if (p > kMaxPrec) throw std::runtime_error("ln_bounds: precision escalation failed");
  }
}

RealBounds log2_bounds(const Rat& x, long prec) {
  if (sgn(x) <= 0) throw std::domain_error("log2: argument must be positive");
  if (is_power_of_two(x.get_num()) && is_power_of_two(x.get_den())) {
    long e = floor_log2(x);
    return RealBounds::exactly(Dyadic(e));
  }
  for (long p = prec + 8;; p *= 2) {
    RealBounds lnx = ln_of_rat_core(x, p + 4);
    RealBounds ln2 = ln2_bounds(p + 8);
    RealBounds r = rb_round(rb_div(lnx, ln2, p + 4), prec + 6);
    if (cmp(r.width(), Dyadic(Int(1), prec)) <= 0) return r;
    if (p > kMaxPrec) throw std::runtime_error("log2_bounds: precision escalation failed");
  }
}

RealBounds ln_bounds(const RealBounds& x, long prec) {
  if (x.lo.sign() <= 0) throw std::domain_error("ln: interval must be positive");
  RealBounds a = ln_bounds(x.lo.to_rat(), prec);
  RealBounds b = x.is_point() ? a : ln_bounds(x.hi.to_rat(), prec);
  return {a.lo, b.hi};
}

RealBounds log2_bounds(const RealBounds& x, long prec) {
  if (x.lo.sign() <= 0) throw std::domain_error("log2: interval must be positive");
  RealBounds a = log2_bounds(x.lo.to_rat(), prec);
  RealBounds b = x.is_point() ? a : log2_bounds(x.hi.to_rat(), prec);
  return {a.lo, b.hi};
}

RealBounds sqrt_bounds(const Rat& x, long prec) {
  if (sgn(x) < 0) throw std::domain_error("sqrt: negative argument");
  if (sgn(x) == 0) return RealBounds::exactly(Dyadic(0));
  // floor(sqrt(num * 2^(2w) / den)) / 2^w
  long w = prec + 2;
  Int scaled = (x.get_num() << (2 * w)) / x.get_den();
  Int root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  return {Dyadic(root, w), Dyadic(root + 2, w)};
}

RealBounds sqrt_bounds(const RealBounds& x, long prec) {
  RealBounds a = sqrt_bounds(std::max(Rat(0), x.lo.to_rat()), prec);
  RealBounds b = x.is_point() ? a : sqrt_bounds(x.hi.to_rat(), prec);
  return {a.lo, b.hi};
}

RealBounds pow_bounds(const Rat& x, const Rat& e, long prec) {
  if (sgn(x) <= 0) throw std::domain_error("pow: base must be positive");
  const Int& p = e.get_num();
  const Int& q = e.get_den();
  if (!p.fits_slong_p() || !q.fits_slong_p())
    throw std::domain_error("pow: exponent out of supported range");
  long pl = p.get_si();
  unsigned long ql = q.get_ui();
  if (pl == 0) return RealBounds::exactly(Dyadic(1));

  Rat xp;  // x^|p| exact
  {
    Int num, den;
    mpz_pow_ui(num.get_mpz_t(), x.get_num().get_mpz_t(), std::labs(pl));
    mpz_pow_ui(den.get_mpz_t(), x.get_den().get_mpz_t(), std::labs(pl));
    xp = Rat(num, den);
    xp.canonicalize();
  }
  RealBounds r;
  if (ql == 1) {
    r = RealBounds::of_rat(xp, prec + 4);
  } else {
    // q-th root with directed rounding: floor(root(xp * 2^(q*w)))/2^w
    long w = prec + 4;
    Int scaled = (xp.get_num() << (ql * w)) / xp.get_den();
    Int root;
    mpz_root(root.get_mpz_t(), scaled.get_mpz_t(), ql);
    r = RealBounds(Dyadic(root, w), Dyadic(root + 2, w));
  }
  if (pl < 0) r = rb_recip(r, prec + 4);
  return r;
}

RealBounds pow_bounds(const RealBounds& x, const Rat& e, long prec) {
  RealBounds a = pow_bounds(x.lo.to_rat(), e, prec);
  RealBounds b = x.is_point() ? a : pow_bounds(x.hi.to_rat(), e, prec);
  if (sgn(e) >= 0) return {a.lo, b.hi};
  return {b.lo, a.hi};
}

// --- Serialization -----------------------------------------------------------

std::string rat_str(const Rat& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

Rat parse_rat(const std::string& s) {
  Rat r;
  if (mpq_set_str(r.get_mpq_t(), s.c_str(), 10) != 0)
    throw std::invalid_argument("parse_rat: malformed rational '" + s + "'");
  r.canonicalize();
  if (sgn(r.get_den()) <= 0) throw std::invalid_argument("parse_rat: zero denominator");
  return r;
}

Dyadic parse_dyadic_string(const std::string& s) {
  auto bad = [&] { return std::invalid_argument("parse_dyadic: malformed dyadic '" + s + "'"); };
  auto caret = s.find("2^");
  if (caret == std::string::npos) {
    // plain integer
    try {
      return Dyadic(Int(s), 0);
    } catch (...) {
      throw bad();
    }
  }
  if (caret == 0) {
    // "2^k" or "2^-k"
    long k = std::stol(s.substr(2));
    if (k >= 0) return Dyadic(Int(1) << k, 0);
    return Dyadic(Int(1), -k);
  }
  // "a/2^l"
  if (s[caret - 1] != '/') throw bad();
  Int a(s.substr(0, caret - 1));
  long l = std::stol(s.substr(caret + 2));
  if (l < 0) throw bad();
  return Dyadic(a, l);
}

std::string decimal_string(const Dyadic& x, int sig_digits) {
  if (x.is_zero()) return "0";
  bool neg = x.sign() < 0;
  Int m = abs(x.mant);
  long bl = bitlength(m) - 1 - x.level;  // floor(log2 |x|)
  long dexp = static_cast<long>(std::floor(static_cast<double>(bl) * 0.30102999566398));
  auto digits_for = [&](long de) {
    long shift = sig_digits - 1 - de;
    Int num = m, den = 1;
    if (shift >= 0) {
      Int p10;
      mpz_ui_pow_ui(p10.get_mpz_t(), 10, shift);
      num *= p10;
    } else {
      Int p10;
      mpz_ui_pow_ui(p10.get_mpz_t(), 10, -shift);
      den = p10;
    }
    den <<= x.level;
    return Int((2 * num + den) / (2 * den));  // round to nearest
  };
  Int digits = digits_for(dexp);
  std::string ds = digits.get_str();
  while (static_cast<int>(ds.size()) > sig_digits) {
    ++dexp;
    ds = digits_for(dexp).get_str();
  }
  while (static_cast<int>(ds.size()) < sig_digits) {
    --dexp;
    ds = digits_for(dexp).get_str();
  }
  std::ostringstream out;
  if (neg) out << '-';
  out << ds[0] << '.' << ds.substr(1) << 'e' << dexp;
  return out.str();
}

std::string decimal_string(const RealBounds& x, int sig_digits) {
  Dyadic mid = mul_pow2(x.lo + x.hi, -1);
  return decimal_string(mid, sig_digits);
}

}  // namespace litsieve
