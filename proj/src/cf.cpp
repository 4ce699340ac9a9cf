#include "litsieve/cf.hpp"

#include <map>
#include <sstream>
#include <tuple>

namespace litsieve::cf {

namespace {

// sign of A + v*sqrt(D), exact.
int sign_lin_sqrt(const Int& A, const Int& v, const Int& D) {
  if (v == 0) return sgn(A);
  if (A == 0) return sgn(v);
  if (sgn(A) == sgn(v)) return sgn(A);
  Int a2 = A * A, v2d = v * v * D;
  int c = ::cmp(a2, v2d);
  if (A > 0) return c > 0 ? 1 : (c == 0 ? 0 : -1);  // A>0, v<0
  return c > 0 ? -1 : (c == 0 ? 0 : 1);             // A<0, v>0
}

void reduce(AlphaSpec::Triple& t) {
  if (t.w < 0) {
    t.u = -t.u;
    t.v = -t.v;
    t.w = -t.w;
  }
  Int g = gcd(gcd(t.u, t.v), t.w);
  if (g > 1) {
    t.u /= g;
    t.v /= g;
    t.w /= g;
  }
}

// floor((u + v sqrt(D)) / w) with w > 0, exact.
Int floor_triple(const AlphaSpec::Triple& t) {
  Int s;  // s <= v*sqrt(D) < s+1
  Int v2d = t.v * t.v * t.D;
  mpz_sqrt(s.get_mpz_t(), v2d.get_mpz_t());
  if (t.v < 0) s = -s - 1;
  Int n, usum = t.u + s;
  mpz_fdiv_q(n.get_mpz_t(), usum.get_mpz_t(), t.w.get_mpz_t());
  // value >= m  <=>  u - m*w + v sqrt(D) >= 0
  auto ge = [&](const Int& m) { return sign_lin_sqrt(t.u - m * t.w, t.v, t.D) >= 0; };
  while (!ge(n)) --n;
  while (ge(n + 1)) ++n;
  return n;
}

bool is_square(const Int& D) {
  if (D < 0) return false;
  Int r;
  mpz_sqrt(r.get_mpz_t(), D.get_mpz_t());
  return r * r == D;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

AlphaSpec::Triple cf_step(const AlphaSpec::Triple& t, const Int& a) {
  // t <- 1 / (t - a): ((u - a w) + v sqrt(D)) / w inverted.
  Int u2 = t.u - a * t.w;
  Int den = u2 * u2 - t.v * t.v * t.D;
  AlphaSpec::Triple next{t.w * u2, -t.w * t.v, den, t.D};
  reduce(next);
  return next;
}

}  // namespace

AlphaSpec AlphaSpec::quadratic(const Int& P, const Int& D, const Int& Q) {
  if (Q == 0) throw std::invalid_argument("AlphaSpec: Q must be nonzero");
  if (D <= 0 || is_square(D))
    throw std::invalid_argument("AlphaSpec: D must be positive and non-square");
  AlphaSpec a;
  a.kind_ = Kind::Quadratic;
  a.t_ = Triple{P, Int(1), Q, D};
  reduce(a.t_);
  Int a0 = floor_triple(a.t_);
  a.t_.u -= a0 * a.t_.w;  // reduce mod 1
  return a;
}

AlphaSpec AlphaSpec::rational(const Rat& r) {
  AlphaSpec a;
  a.kind_ = Kind::Rational;
  a.rat_ = r;
  a.t_ = Triple{r.get_num(), Int(0), r.get_den(), Int(2)};
  return a;
}

AlphaSpec AlphaSpec::periodic_cf(std::vector<Int> preperiod, std::vector<Int> period) {
  if (period.empty()) throw std::invalid_argument("AlphaSpec: empty period");
  if (preperiod.empty()) throw std::invalid_argument("AlphaSpec: need at least a0");
  for (size_t i = 1; i < preperiod.size(); ++i)
    if (preperiod[i] <= 0)
      throw std::invalid_argument("AlphaSpec: partial quotients must be positive");
  for (const Int& b : period)
    if (b <= 0) throw std::invalid_argument("AlphaSpec: partial quotients must be positive");

  // Purely periodic tail y satisfies y = (A y + B) / (C y + D2).
  Int A = 1, B = 0, C = 0, D2 = 1;
  for (const Int& b : period) {
    Int A2 = A * b + B, C2 = C * b + D2;
    B = A;
    D2 = C;
    A = A2;
    C = C2;
  }
  Int disc = (A - D2) * (A - D2) + 4 * B * C;
  if (C == 0 || disc <= 0 || is_square(disc))
    throw std::invalid_argument("AlphaSpec: degenerate periodic CF");
  Triple y{A - D2, Int(1), 2 * C, disc};
  reduce(y);

  // Fold the preperiod: x = [a0; a1, ..., am, y] via the Moebius matrix.
  Int p = 1, r = 0, s = 0, tt = 1;
  for (const Int& a : preperiod) {
    Int p2 = p * a + r, s2 = s * a + tt;
    r = p;
    tt = s;
    p = p2;
    s = s2;
  }
  // x = (p y + r)/(s y + t), y = (e + v sqrt(Delta))/g.
  Int e = y.u, vv = y.v, g = y.w, Delta = y.D;
  Int nu = p * e + r * g, nv = p * vv;
  Int du = s * e + tt * g, dv = s * vv;
  Int den = du * du - dv * dv * Delta;
  if (den == 0) throw std::invalid_argument("AlphaSpec: degenerate periodic CF");
  Int xu = nu * du - nv * dv * Delta;
  Int xv = nv * du - nu * dv;
  if (xv == 0) throw std::invalid_argument("AlphaSpec: periodic CF collapsed to rational");
  // Fold the sqrt coefficient into the radicand: xv sqrt(Delta) = sgn(xv) sqrt(xv^2 Delta).
  Triple t{xu, Int(sgn(xv)), den, xv * xv * Delta};
  reduce(t);

  AlphaSpec out;
  out.kind_ = Kind::PeriodicCf;
  out.cf_pre_ = std::move(preperiod);
  out.cf_period_ = std::move(period);
  out.t_ = t;
  Int a0 = floor_triple(out.t_);
  out.t_.u -= a0 * out.t_.w;
  return out;
}

AlphaSpec AlphaSpec::parse(const std::string& s) {
  if (s == "phi" || s == "golden") return quadratic(Int(-1), Int(5), Int(2));
  if (s.rfind("quadratic:", 0) == 0) {
    Int P, D, Q;
    bool gotP = false, gotD = false, gotQ = false;
    for (const auto& kv : split(s.substr(10), ',')) {
      auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("AlphaSpec: bad field '" + kv + "'");
      std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      if (k == "P")
        P = Int(v), gotP = true;
      else if (k == "D")
        D = Int(v), gotD = true;
      else if (k == "Q")
        Q = Int(v), gotQ = true;
      else
        throw std::invalid_argument("AlphaSpec: unknown field '" + k + "'");
    }
    if (!gotP || !gotD || !gotQ)
      throw std::invalid_argument("AlphaSpec: quadratic needs P,D,Q");
    return quadratic(P, D, Q);
  }
  if (s.rfind("rational:", 0) == 0) return rational(parse_rat(s.substr(9)));
  if (s.rfind("cf:", 0) == 0) {
    std::string body = s.substr(3);
    auto semi = body.find(';');
    if (semi == std::string::npos)
      throw std::invalid_argument("AlphaSpec: cf form needs 'a0;...'");
    std::vector<Int> pre, period;
    pre.emplace_back(body.substr(0, semi));
    bool in_period = false;
    for (auto& tok : split(body.substr(semi + 1), ',')) {
      if (tok.empty()) continue;
      std::string w = tok;
      if (w.front() == '(') {
        in_period = true;
        w = w.substr(1);
      }
      bool closes = !w.empty() && w.back() == ')';
      if (closes) w.pop_back();
      if (w.empty()) throw std::invalid_argument("AlphaSpec: bad cf token '" + tok + "'");
      (in_period ? period : pre).emplace_back(w);
      if (closes) in_period = false;
    }
    return periodic_cf(std::move(pre), std::move(period));
  }
  throw std::invalid_argument("AlphaSpec: unrecognized form '" + s + "'");
}

std::string AlphaSpec::str() const {
  switch (kind_) {
    case Kind::Rational:
      return "rational:" + rat_str(rat_);
    case Kind::Quadratic:
      return "quadratic:P=" + t_.u.get_str() + ",D=" + Int(t_.v * t_.v * t_.D).get_str() +
             ",Q=" + t_.w.get_str();
    case Kind::PeriodicCf: {
      std::ostringstream out;
      out << "cf:" << cf_pre_[0].get_str() << ';';
      for (size_t i = 1; i < cf_pre_.size(); ++i) out << cf_pre_[i].get_str() << ',';
      out << '(';
      for (size_t i = 0; i < cf_period_.size(); ++i) {
        if (i) out << ',';
        out << cf_period_[i].get_str();
      }
      out << ')';
      return out.str();
    }
  }
  return {};
}

RealBounds AlphaSpec::times_bounds(const Int& q, long prec) const {
  if (kind_ == Kind::Rational) {
    Rat v = Rat(q) * rat_;
    return RealBounds::of_rat(v, prec + 2);
  }
  Int U = q * t_.u, V = q * t_.v;
  const Int& W = t_.w;
  for (long p = prec + bitlength(abs(V) + 1) + 4;; p *= 2) {
    Int S, scaled = t_.D << (2 * p);
    mpz_sqrt(S.get_mpz_t(), scaled.get_mpz_t());
    Rat lo, hi;
    Int wp = W << p;
    if (V >= 0) {
      lo = Rat((U << p) + V * S, wp);
      hi = Rat((U << p) + V * (S + 1), wp);
    } else {
      lo = Rat((U << p) + V * (S + 1), wp);
      hi = Rat((U << p) + V * S, wp);
    }
    lo.canonicalize();
    hi.canonicalize();
    RealBounds r(round_down(lo, prec + 2), round_up(hi, prec + 2));
    if (cmp(r.width(), Dyadic(Int(1), prec)) <= 0) return r;
    if (p > kMaxPrec + prec) throw std::runtime_error("times_bounds: escalation failed");
  }
}

RealBounds AlphaSpec::value_bounds(long prec) const { return times_bounds(Int(1), prec); }

std::vector<Int> expand_cf(const AlphaSpec& alpha, long n) {
  if (n < 1) throw std::invalid_argument("expand_cf: n must be >= 1");
  std::vector<Int> out;
  if (alpha.is_rational()) {
    Int num = alpha.rational_value().get_num();
    Int den = alpha.rational_value().get_den();
    while (den != 0 && static_cast<long>(out.size()) < n) {
      Int a;
      mpz_fdiv_q(a.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
      out.push_back(a);
      Int r = num - a * den;
      num = den;
      den = r;
    }
    return out;
  }
  AlphaSpec::Triple t = alpha.triple();
  for (long i = 0; i < n; ++i) {
    Int a = floor_triple(t);
    out.push_back(a);
    t = cf_step(t, a);
  }
  return out;
}

std::vector<Convergent> convergents(const AlphaSpec& alpha, long n) {
  std::vector<Int> as = expand_cf(alpha, n);
  std::vector<Convergent> out;
  Int pm1 = 1, pm2 = 0, qm1 = 0, qm2 = 1;
  long j = 0;
  for (const Int& a : as) {
    Int p = a * pm1 + pm2;
    Int q = a * qm1 + qm2;
    out.push_back({j++, p, q});
    pm2 = pm1;
    pm1 = p;
    qm2 = qm1;
    qm1 = q;
  }
  return out;
}

PeriodInfo cf_period(const AlphaSpec& alpha) {
  if (alpha.is_rational()) throw std::domain_error("cf_period: rational has no period");
  std::map<std::tuple<std::string, std::string, std::string>, size_t> seen;
  std::vector<Int> terms;
  AlphaSpec::Triple t = alpha.triple();
  for (long guard = 0; guard < 100000; ++guard) {
    auto key = std::make_tuple(t.u.get_str(), t.v.get_str(), t.w.get_str());
    auto it = seen.find(key);
    if (it != seen.end()) {
      PeriodInfo info;
      info.preperiod.assign(terms.begin(), terms.begin() + it->second);
      info.period.assign(terms.begin() + it->second, terms.end());
      return info;
    }
    seen.emplace(key, terms.size());
    Int a = floor_triple(t);
    terms.push_back(a);
    t = cf_step(t, a);
  }
  throw std::runtime_error("cf_period: period not found within guard bound");
}

RealBounds dist_nearest(const AlphaSpec& alpha, const Int& q, long prec) {
  if (q < 1) throw std::domain_error("dist_nearest: q must be >= 1");
  if (alpha.is_rational()) {
    Rat v = Rat(q) * alpha.rational_value();
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), v.get_num().get_mpz_t(), v.get_den().get_mpz_t());
    Rat f = v - Rat(fl);
    Rat g = Rat(1) - f;
    return RealBounds::of_rat(std::min(f, g), prec + 2);
  }
  for (long p = prec;; p *= 2) {
    RealBounds qa = alpha.times_bounds(q, p);
    RealBounds d = dist_to_int_bounds(qa);
    if (cmp(d.width(), Dyadic(Int(1), prec)) <= 0) return d;
    if (p > kMaxPrec) throw std::runtime_error("dist_nearest: escalation failed");
  }
}

namespace {

RealBounds q_dist_product(const AlphaSpec& alpha, const Int& q, long prec) {
  RealBounds d = dist_nearest(alpha, q, prec + bitlength(q) + 2);
  return RealBounds::exactly(Dyadic(q)) * d;
}

}  // namespace

BadnessReport bad_delta(const AlphaSpec& alpha, const Int& Q, bool full_scan, long prec) {
  if (Q < 1) throw std::invalid_argument("bad_delta: Q must be >= 1");
  if (alpha.is_rational()) {
    const Int& den = alpha.rational_value().get_den();
    if (den <= Q) {
      BadnessReport rep;
      rep.Q = Q;
      rep.argmin_q = den;
      rep.delta_hat = RealBounds::exactly(Dyadic(0));
      rep.exact_zero = true;
      return rep;
    }
    full_scan = true;
  }

  std::vector<Int> candidates;
  if (full_scan) {
    for (Int q = 1; q <= Q; ++q) candidates.push_back(q);
  } else {
    for (const auto& c : convergents(alpha, 256)) {
      if (c.q > Q) break;
      if (c.q >= 1) candidates.push_back(c.q);
    }
    if (candidates.empty()) candidates.push_back(Int(1));
  }

  Int best_q = candidates.front();
  RealBounds best = q_dist_product(alpha, best_q, prec);
  for (size_t i = 1; i < candidates.size(); ++i) {
    const Int& q = candidates[i];
    if (q == best_q) continue;
    RealBounds cand = q_dist_product(alpha, q, prec);
    long p = prec;
    while (true) {
      if (cmp(cand.lo, best.hi) > 0) break;  // keep current best
      if (cmp(cand.hi, best.lo) < 0) {
        best = cand;
        best_q = q;
        break;
      }
      p *= 2;
      if (p > kMaxPrec) {
        // Exact ties cannot occur for irrational alpha; prefer the smaller q.
        if (q < best_q) {
          best = cand;
          best_q = q;
        }
        break;
      }
      cand = q_dist_product(alpha, q, p);
      best = q_dist_product(alpha, best_q, p);
    }
  }
  BadnessReport rep;
  rep.Q = Q;
  rep.delta_hat = best;
  rep.argmin_q = best_q;
  return rep;
}

Rat delta_lower_bound(const AlphaSpec& alpha, const Int& scan_Q) {
  if (alpha.is_rational()) return Rat(0);
  BadnessReport scan = bad_delta(alpha, scan_Q, /*full_scan=*/false);
  Rat scanned = scan.delta_hat.lo.to_rat();
  PeriodInfo info = cf_period(alpha);
  Int amax = 1;
  for (const Int& a : info.period) amax = std::max(amax, a);
  for (size_t i = 1; i < info.preperiod.size(); ++i)
    amax = std::max(amax, info.preperiod[i]);
  Rat tail(Int(1), amax + 2);
  return std::min(scanned, tail);
}

}  // namespace litsieve::cf
