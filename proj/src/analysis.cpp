#include "litsieve/analysis.hpp"

#include <algorithm>

#include "litsieve/parallel.hpp"

namespace litsieve::analysis {

namespace {

constexpr long kSumChunk = 4096;  // fixed chunk size: partition is independent
                                  // of the worker count, sums are exact dyadic

void check_budget(long q) {
  if (q < 2) throw std::domain_error("sum: q must be >= 2");
  if (q > kDeskBudgetQ)
    throw std::domain_error("sum: q exceeds the desk budget (" +
                            std::to_string(kDeskBudgetQ) + "); use a smaller q");
}

struct Accum {
  RealBounds sum{Dyadic(0), Dyadic(0)};
  RealBounds max_term{Dyadic(0), Dyadic(0)};
  void add(const RealBounds& t) {
    sum = sum + t;
    if (cmp(t.hi, max_term.hi) > 0) max_term = t;
  }
  void merge(const Accum& o) {
    sum = sum + o.sum;
    if (cmp(o.max_term.hi, max_term.hi) > 0) max_term = o.max_term;
  }
};

template <class TermFn>
Accum parallel_sum(long lo, long hi_incl, int workers, TermFn&& term) {
  long n = hi_incl - lo + 1;
  if (n <= 0) return {};
  int nchunks = static_cast<int>((n + kSumChunk - 1) / kSumChunk);
  std::vector<Accum> parts(nchunks);
  parallel_chunks(lo, hi_incl + 1, workers, kSumChunk, [&](int c, long b, long e) {
    Accum acc;
    for (long x = b; x < e; ++x) acc.add(term(x));
    parts[c] = std::move(acc);
  });
  Accum total;
  for (auto& p : parts) total.merge(p);
  return total;
}

}  // namespace

SumReport lemma2_sum(const cf::AlphaSpec& alpha, long q, long prec, int workers) {
  check_budget(q);
  long hi = q * q * q;
  Accum acc = parallel_sum(q, hi, workers, [&](long x) {
    RealBounds d = cf::dist_nearest(alpha, Int(x), prec + 2 * bitlength(Int(x)) + 8);
    RealBounds L = log2_bounds(Rat(x), prec);
    RealBounds W = d * RealBounds::of_rat(Rat(x), 4) * (L * L);
    return rb_div(RealBounds::exactly(Dyadic(1)), W, prec + 8);
  });
  SumReport rep;
  rep.q_or_m = q;
  rep.value = rb_round(acc.sum, prec + 8);
  rep.term_count = hi - q + 1;
  rep.max_term = acc.max_term;
  return rep;
}

KnReport kn_partial_sum(const cf::AlphaSpec& alpha, long m, long prec, int workers) {
  if (m < 2) throw std::domain_error("kn_partial_sum: m must be >= 2");
  Accum acc = parallel_sum(1, m, workers, [&](long x) {
    RealBounds d = cf::dist_nearest(alpha, Int(x), prec + 2 * bitlength(Int(x)) + 8);
    RealBounds W = d * RealBounds::of_rat(Rat(x), 4);
    return rb_div(RealBounds::exactly(Dyadic(1)), W, prec + 8);
  });
  KnReport rep;
  rep.m = m;
  rep.value = rb_round(acc.sum, prec + 8);
  RealBounds lnm = ln_bounds(Rat(m), prec);
  RealBounds l2m = log2_bounds(Rat(m), prec);
  rep.ratio_ln = rb_div(rep.value, lnm * lnm, prec);
  rep.ratio_log2 = rb_div(rep.value, l2m * l2m, prec);
  return rep;
}

FittedConstant fit_kn_constant(const cf::AlphaSpec& alpha, const std::vector<long>& m_grid) {
  FittedConstant fit;
  fit.grid = m_grid;
  fit.value = Rat(0);
  for (long m : m_grid) {
    KnReport r = kn_partial_sum(alpha, m);
    fit.value = std::max(fit.value, Rat(r.ratio_ln.hi.to_rat()));
  }
  return fit;
}

FittedConstant fit_lemma2_constant(const cf::AlphaSpec& alpha, const std::vector<long>& q_grid,
                                   int workers) {
  FittedConstant fit;
  fit.grid = q_grid;
  fit.value = Rat(0);
  for (long q : q_grid) {
    SumReport r = lemma2_sum(alpha, q, kDefaultPrec, workers);
    fit.value = std::max(fit.value, Rat(r.value.hi.to_rat()));
  }
  return fit;
}

SumReport lemma3_sum(const cf::AlphaSpec& alpha, long q, const Rat& a, long prec, int workers) {
  if (!(a > 0 && a < 1)) throw std::domain_error("lemma3_sum: a must satisfy 0 < a < 1");
  if (alpha.is_rational()) throw std::domain_error("lemma3_sum: alpha must be irrational");
  check_budget(q);
  long hi = q * q * q;
  Rat two_minus_a = Rat(2) - a;
  Accum acc = parallel_sum(q, hi, workers, [&](long x) {
    RealBounds d = cf::dist_nearest(alpha, Int(x), prec + 2 * bitlength(Int(x)) + 8);
    RealBounds li = ln_bounds(rb_recip(d, prec + 8), prec);
    if (li.lo.sign() <= 0)
      throw std::logic_error("lemma3_sum: log(1/||ax||) not positive");  // ||ax|| < 1 always
    RealBounds lx = ln_bounds(Rat(x), prec);
    RealBounds W = d * RealBounds::of_rat(Rat(x), 4) * pow_bounds(li, a, prec) *
                   pow_bounds(lx, two_minus_a, prec);
    return rb_div(RealBounds::exactly(Dyadic(1)), W, prec + 8);
  });
  SumReport rep;
  rep.q_or_m = q;
  rep.value = rb_round(acc.sum, prec + 8);
  rep.term_count = hi - q + 1;
  rep.max_term = acc.max_term;
  return rep;
}

Lemma4Report lemma4_sum(const Int& p, long q, const Rat& a, long prec, int workers) {
  if (!(p > 1 && mpz_probab_prime_p(p.get_mpz_t(), 40) != 0))
    throw std::domain_error("lemma4_sum: p must be prime");
  if (!(a >= 0 && a < 1)) throw std::domain_error("lemma4_sum: a must satisfy 0 <= a < 1");
  check_budget(q);
  long hi = q * q * q;
  Rat two_minus_a = Rat(2) - a;

  struct Part {
    Accum acc;
    std::vector<Rat> by_val;
    Rat direct{0};
  };
  long n = hi - q + 1;
  int nchunks = static_cast<int>((n + kSumChunk - 1) / kSumChunk);
  std::vector<Part> parts(nchunks);
  parallel_chunks(q, hi + 1, default_workers() > 0 ? workers : 1, kSumChunk,
                  [&](int c, long b, long e) {
    Part part;
    for (long x = b; x < e; ++x) {
      Int rest, pj;
      unsigned long v = mpz_remove(rest.get_mpz_t(), Int(x).get_mpz_t(), p.get_mpz_t());
      mpz_pow_ui(pj.get_mpz_t(), p.get_mpz_t(), v);
      Rat rat_part(pj, Int(x));
      rat_part.canonicalize();
      if (part.by_val.size() <= v) part.by_val.resize(v + 1, Rat(0));
      part.by_val[v] += rat_part;
      part.direct += rat_part;
      RealBounds la = pow_bounds(ln_bounds(Rat(2) * Rat(pj), prec), a, prec);
      RealBounds lx = pow_bounds(ln_bounds(Rat(x), prec), two_minus_a, prec);
      RealBounds term = rb_div(RealBounds::of_rat(rat_part, prec + 8), la * lx, prec + 8);
      part.acc.add(term);
    }
    parts[c] = std::move(part);
  });

  Lemma4Report rep;
  Accum total;
  for (auto& part : parts) {
    total.merge(part.acc);
    rep.rational_direct += part.direct;
    if (rep.rational_by_valuation.size() < part.by_val.size())
      rep.rational_by_valuation.resize(part.by_val.size(), Rat(0));
    for (size_t j = 0; j < part.by_val.size(); ++j)
      rep.rational_by_valuation[j] += part.by_val[j];
  }
  rep.total.q_or_m = q;
  rep.total.value = rb_round(total.sum, prec + 8);
  rep.total.term_count = n;
  rep.total.max_term = total.max_term;
  return rep;
}

// --- dimension lower bound -----------------------------------------------------

DimensionSchedule DimensionSchedule::cantor() {
  DimensionSchedule s;
  s.explicit_seq = DimensionSchedule::Explicit{};
  return s;  // generated lazily in dim_lower: m_k = 2, eps_k = 3^-k
}

DimReport dim_lower(const DimensionSchedule& schedule, long K, const Rat& kstar_threshold,
                    long prec) {
  if (K < 2) throw std::domain_error("dim_lower: K must be >= 2");
  DimReport rep;
  rep.rows.reserve(K);

  if (schedule.symbolic) {
    // L_k = 3^k log2 q0 + log2 delta; r_k = (L_k - L_1 - 5(k-1)) / (L_k + 5)
    const auto& sym = *schedule.symbolic;
    if (sym.q0 < 2) throw std::domain_error("dim_lower: q0 must be >= 2");
    if (sgn(sym.delta) <= 0 || sym.delta >= 1)
      throw std::domain_error("dim_lower: delta must be in (0,1)");
    RealBounds lq0 = log2_bounds(Rat(sym.q0), prec + 8);
    RealBounds ld = log2_bounds(sym.delta, prec + 8);
    Int pow3 = 3;
    RealBounds L1 = Rat(pow3) * lq0 + ld;
    for (long k = 2; k <= K; ++k) {
      pow3 *= 3;
      RealBounds Lk = Rat(pow3) * lq0 + ld;
      RealBounds num = Lk - L1 - RealBounds::exactly(Dyadic(5 * (k - 1)));
      RealBounds den = Lk + RealBounds::exactly(Dyadic(5));
      rep.rows.push_back({k, rb_div(num, den, prec)});
    }
  } else {
    // explicit sequences; empty Explicit means the Cantor schedule
    const auto& ex = *schedule.explicit_seq;
    bool cantor = ex.m.empty();
    auto m_at = [&](long k) -> Int { return cantor ? Int(2) : ex.m.at(k - 1); };
    std::vector<RealBounds> lnm_cache;
    RealBounds ln3 = ln_bounds(Rat(3), prec + 8);
    RealBounds ln2 = ln2_bounds(prec + 8);
    auto eps_log = [&](long k) -> RealBounds {
      // enclosure of -ln(eps_k)
      if (cantor) return Rat(k) * ln3;
      const Rat& e = ex.eps.at(k - 1);
      if (sgn(e) <= 0) throw std::domain_error("dim_lower: eps_k must be positive");
      RealBounds l = ln_bounds(e, prec + 8);
      return RealBounds(-l.hi, -l.lo);
    };
    if (!cantor) {
      if (static_cast<long>(ex.m.size()) < K || static_cast<long>(ex.eps.size()) < K)
        throw std::domain_error("dim_lower: schedule shorter than K");
      for (long k = 1; k <= K; ++k) {
        if (m_at(k) < 2) throw std::domain_error("dim_lower: m_k must be >= 2");
        if (k > 1 && !(ex.eps[k - 1] < ex.eps[k - 2]))
          throw std::domain_error("dim_lower: eps_k must be strictly decreasing");
      }
    }
    RealBounds logprod(Dyadic(0), Dyadic(0));  // sum of ln m_i, i <= k-1
    for (long k = 2; k <= K; ++k) {
      logprod = logprod + (cantor ? ln2 : ln_bounds(Rat(m_at(k - 1)), prec + 8));
      // -log(m_k eps_k) = -ln m_k + (-ln eps_k)
      RealBounds lnmk = cantor ? ln2 : ln_bounds(Rat(m_at(k)), prec + 8);
      RealBounds den = eps_log(k) - lnmk;
      if (den.lo.sign() <= 0)
        throw std::domain_error("dim_lower: m_k eps_k must be < 1");
      rep.rows.push_back({k, rb_div(rb_round(logprod, prec + 16), den, prec)});
    }
  }

  rep.tail_start = std::max(2L, K / 2);
  RealBounds inf = rep.rows.back().r;
  for (const auto& row : rep.rows)
    if (row.k >= rep.tail_start) inf = rb_min(inf, row.r);
  rep.liminf_estimate = inf;

  // First k from which r stays above the threshold and non-decreasing.
  std::optional<long> kstar;
  for (auto it = rep.rows.rbegin(); it != rep.rows.rend(); ++it) {
    bool ok = it->r.lo.to_rat() >= kstar_threshold;
    if (ok) {
      if (it != rep.rows.rbegin()) {
        auto prev = std::prev(it);  // the row after *it in forward order
        if (cmp(prev->r.lo, it->r.lo) < 0) ok = false;
      }
    }
    if (ok)
      kstar = it->k;
    else
      break;
  }
  rep.k_star = kstar;
  return rep;
}

// --- Theorem 8 hypothesis sum ----------------------------------------------------

Theorem8Report theorem8_check(const danger::PsiSpec& psi0, const danger::PsiSpec& psi1,
                              const danger::PsiSpec& psi2, const Rat& eps, const Rat& delta,
                              const Rat& A, const std::vector<long>& X_grid, long prec) {
  if (!(A > 1) || !(eps > 0 && eps < 1) || !(delta > 0))
    throw std::domain_error("theorem8_check: need A > 1, 0 < eps < 1, delta > 0");
  Theorem8Report rep;

  // mu bound: mu <= nu + 2 - log2(delta)
  RealBounds ld = log2_bounds(delta, prec + 16);
  auto mu_max_for = [&](long nu) -> long {
    // floor(nu + 2 - log2 delta); decided because log2 delta is irrational
    // for non-power-of-two delta and exact otherwise.
    Rat lo = Rat(nu + 2) - ld.hi.to_rat();
    Rat hi = Rat(nu + 2) - ld.lo.to_rat();
    Int flo = round_down(lo, 0).mant, fhi = round_down(hi, 0).mant;
    if (flo != fhi) {
      RealBounds ld2 = log2_bounds(delta, 4 * kDefaultPrec);
      flo = round_down(Rat(nu + 2) - ld2.hi.to_rat(), 0).mant;
      fhi = round_down(Rat(nu + 2) - ld2.lo.to_rat(), 0).mant;
      if (flo != fhi) throw std::runtime_error("theorem8: mu bound undecided");
    }
    return flo.get_si();
  };

  long max_nu = 0;
  for (long X : X_grid) {
    Rat ax = A * Rat(X);
    Int top = round_up(ax, 0).mant;  // nu < A X
    long nu_hi = top.get_si() - (ax == Rat(top) ? 1 : 0);
    max_nu = std::max(max_nu, nu_hi);
  }

  bool fast = psi2.is_identity();
  std::vector<RealBounds> mu_prefix;  // prefix sums of 2^-mu / psi1(2^-mu)
  if (fast) {
    long max_mu = mu_max_for(max_nu);
    mu_prefix.resize(max_mu + 1, RealBounds(Dyadic(0), Dyadic(0)));
    RealBounds run(Dyadic(0), Dyadic(0));
    for (long mu = 1; mu <= max_mu; ++mu) {
      Rat arg(Int(1), Int(1) << mu);
      RealBounds p1 = psi1.eval(arg, prec);
      RealBounds term = rb_div(RealBounds::of_rat(arg, prec + 8), p1, prec + mu + 16);
      run = rb_round(run + term, prec + 32);
      mu_prefix[mu] = run;
    }
  }

  long budget = 2'000'000;
  for (long X : X_grid) {
    if (X < 1) throw std::domain_error("theorem8_check: X must be >= 1");
    Rat ax = A * Rat(X);
    Int top = round_up(ax, 0).mant;
    long nu_hi = top.get_si() - (ax == Rat(top) ? 1 : 0);
    RealBounds sum(Dyadic(0), Dyadic(0));
    for (long nu = X; nu <= nu_hi; ++nu) {
      long mu_max = mu_max_for(nu);
      Rat p2nu(Int(1) << nu);
      RealBounds p0 = psi0.eval(p2nu, prec);
      if (fast) {
        // sum_mu 2^(nu-mu) eps / (psi0 psi1(2^-mu)) = [2^nu eps / psi0] * prefix
        RealBounds lead = rb_div(RealBounds::of_rat(eps * p2nu, prec + 8), p0, prec + 16);
        sum = rb_round(sum + lead * mu_prefix[std::min<long>(mu_max, mu_prefix.size() - 1)],
                       prec + 32);
      } else {
        if ((budget -= mu_max) < 0)
          throw std::domain_error("theorem8_check: term budget exceeded for general psi2");
        for (long mu = 1; mu <= mu_max; ++mu) {
          Rat arg(Int(1), Int(1) << mu);
          RealBounds p1 = psi1.eval(arg, prec);
          RealBounds inner =
              psi2.inverse(rb_div(RealBounds::of_rat(eps, prec + 8), p0 * p1, prec + 16), prec);
          Rat scale = Rat(Int(1) << nu, Int(1) << mu);
          scale.canonicalize();
          sum = rb_round(sum + scale * inner, prec + 32);
        }
      }
    }
    rep.per_X.emplace_back(X, sum);
    if (rep.per_X.size() == 1 || cmp(sum.hi, rep.sup.hi) > 0) {
      rep.sup = sum;
      rep.arg_sup = X;
    }
  }
  rep.pass = rep.sup.hi.to_rat() <= Rat(1, 64);

  // Condition (iv): max over positive integers of psi0(x) psi2(x^(1-A)).
  RealBounds ivmax(Dyadic(0), Dyadic(0));
  long N0 = 256;
  for (long x = 1; x <= N0; ++x) {
    Rat xr(x);
    RealBounds xa = pow_bounds(xr, Rat(1) - A, prec);
    RealBounds v = psi0.eval(xr, prec) * psi2.eval(xa, prec);
    if (cmp(v.hi, ivmax.hi) > 0) ivmax = v;
  }
  // Tail: ln y <= sqrt(y) gives psi0(x) psi2(x^(1-A)) <= K x^E with
  // E = s0 + s2(1-A) + t0/2 provided psi2's log factor stays bounded at
  // small arguments; require E < 0 and bound the tail by the value at N0+1.
  bool tail_ok = false;
  Rat E = psi0.s + psi2.s * (Rat(1) - A) + psi0.t / 2;
  bool psi2_log_ok = psi2.logkind == danger::PsiSpec::LogKind::None ||
                     psi2.logkind == danger::PsiSpec::LogKind::LnEPlusX;
  bool psi0_log_ok = psi0.logkind == danger::PsiSpec::LogKind::None ||
                     psi0.logkind == danger::PsiSpec::LogKind::LnX ||
                     psi0.logkind == danger::PsiSpec::LogKind::LnEPlusX ||
                     psi0.logkind == danger::PsiSpec::LogKind::Log2X;
  if (E < 0 && psi2_log_ok && psi0_log_ok && psi0.t >= 0) {
    Rat xn(N0 + 1);
    // K = kappa0 kappa2 * 2^t0 (slack for ln(e+x) <= 2 sqrt(x) on x > N0),
    // times psi2's bounded log factor at small arguments (<= ln(e+1) <= 2).
    RealBounds bound = RealBounds::of_rat(psi0.kappa * psi2.kappa * 4, 16) *
                       pow_bounds(xn, E, prec) *
                       pow_bounds(Rat(2), psi0.t, prec) *
                       (psi2.t >= 0 ? pow_bounds(Rat(2), psi2.t, prec)
                                    : RealBounds::exactly(Dyadic(1)));
    tail_ok = bound.hi.to_rat() <= eps;
    if (!tail_ok) rep.notes.push_back("condition (iv) tail bound inconclusive");
  } else {
    rep.notes.push_back("condition (iv) tail: unsupported psi shape, grid check only");
  }
  rep.condition_iv_max = ivmax;
  rep.condition_iv_ok = ivmax.hi.to_rat() <= eps && tail_ok;
  if (!rep.condition_iv_ok) rep.notes.push_back("hypothesis failure: condition (iv)");

  // Conditions (i)-(iii), sampled: psi1, psi2 increasing on [0, 1] with
  // values <= 1 there; psi0 increasing for large arguments.
  auto sampled_increasing = [&](const danger::PsiSpec& psi, const Rat& lo, const Rat& hi,
                                bool cap_one) {
    Rat prev(-1);
    for (int i = 1; i <= 8; ++i) {
      Rat x = lo + (hi - lo) * Rat(i, 8);
      RealBounds v = psi.eval(x, prec);
      if (v.lo.to_rat() < prev - Rat(1, 1000)) return false;
      if (cap_one && v.lo.to_rat() > 1) return false;
      prev = v.hi.to_rat();
    }
    return true;
  };
  if (!sampled_increasing(psi1, Rat(0), Rat(1, 2), true))
    rep.notes.push_back("psi1 not increasing/bounded on the sampled [0, 1/2]");
  if (!sampled_increasing(psi2, Rat(0), Rat(1, 2), true))
    rep.notes.push_back("psi2 not increasing/bounded on the sampled [0, 1/2]");
  if (!sampled_increasing(psi0, Rat(16), Rat(4096), false))
    rep.notes.push_back("psi0 not increasing on the sampled large range");
  return rep;
}

}  // namespace litsieve::analysis
