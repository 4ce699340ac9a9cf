#include "litsieve/verify.hpp"

#include <algorithm>

#include "litsieve/parallel.hpp"

namespace litsieve::verify {

namespace {

// Exact enclosure of ||v|| over the rational interval [lo, hi].
// Zero width below 1; [0, 1/2] when the interval spans a unit.
std::pair<Rat, Rat> dist_int_exact(const Rat& lo, const Rat& hi) {
  if (hi - lo >= 1) return {Rat(0), Rat(1, 2)};
  auto frac_dist = [](const Rat& v) {
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), v.get_num().get_mpz_t(), v.get_den().get_mpz_t());
    Rat f = v - Rat(fl);
    Rat g = Rat(1) - f;
    return std::min(f, g);
  };
  Int nlo, nhi;
  mpz_fdiv_q(nlo.get_mpz_t(), lo.get_num().get_mpz_t(), lo.get_den().get_mpz_t());
  mpz_fdiv_q(nhi.get_mpz_t(), hi.get_num().get_mpz_t(), hi.get_den().get_mpz_t());
  Rat dlo = frac_dist(lo), dhi = frac_dist(hi);
  bool integer_inside = nlo != nhi || lo == Rat(nlo);
  Rat mind = integer_inside ? Rat(0) : std::min(dlo, dhi);
  // max of the tent: 1/2 when a half-integer is inside
  Rat h0 = Rat(nlo) + Rat(1, 2), h1 = Rat(nhi) + Rat(1, 2);
  bool half_inside = (lo <= h0 && h0 <= hi) || (lo <= h1 && h1 <= hi);
  Rat maxd = half_inside ? Rat(1, 2) : std::max(dlo, dhi);
  return {mind, maxd};
}

struct Row {
  RealBounds dist_alpha;
  RealBounds dist_beta;
  RealBounds product;
  bool undecided = false;
};

// The variant's product at one index, from scratch: no danger-module cover
// geometry is involved, only the weight formulas themselves.
Row product_at(const danger::DangerSpec& spec, const BetaPoint& beta, long q, long prec) {
  Row row;
  auto [dblo, dbhi] = [&] {
    if (std::holds_alternative<danger::Inhomogeneous>(spec.variant())) {
      const auto& sp = std::get<danger::Inhomogeneous>(spec.variant());
      return dist_int_exact(Rat(q) * beta.lo() + sp.eta, Rat(q) * beta.hi() + sp.eta);
    }
    danger::DangerSpec::Variant v = spec.variant();
    Int denom = std::visit(
        [&](const auto& sp) -> Int {
          using T = std::decay_t<decltype(sp)>;
          if constexpr (std::is_same_v<T, danger::Lacunary> ||
                        std::is_same_v<T, danger::Polynomial>)
            return sp.t.value(q);
          else
            return Int(q);
        },
        v);
    return dist_int_exact(Rat(denom) * beta.lo(), Rat(denom) * beta.hi());
  }();
  row.dist_beta = RealBounds(round_down(dblo, 2 * prec), round_up(dbhi, 2 * prec));
  row.undecided = beta.is_cell && dbhi - dblo >= Rat(1, 2) && dblo == 0;

  std::visit(
      [&](const auto& sp) {
        using T = std::decay_t<decltype(sp)>;
        RealBounds db(round_down(dblo, 2 * prec), round_up(dbhi, 2 * prec));
        if constexpr (std::is_same_v<T, danger::Multiplicative>) {
          RealBounds da = cf::dist_nearest(sp.alpha, Int(q), prec + 2 * bitlength(Int(q)) + 8);
          RealBounds L = log2_bounds(Rat(q), prec);
          row.dist_alpha = da;
          row.product = RealBounds::exactly(Dyadic(q)) * (L * L) * da * db;
        } else if constexpr (std::is_same_v<T, danger::WeightedLog>) {
          RealBounds da = cf::dist_nearest(sp.alpha, Int(q), prec + 2 * bitlength(Int(q)) + 8);
          RealBounds L = pow_bounds(log2_bounds(Rat(q), prec), Rat(2) - sp.a, prec);
          RealBounds li = pow_bounds(ln_bounds(rb_recip(da, prec + 8), prec), sp.a, prec);
          row.dist_alpha = da;
          row.product = RealBounds::exactly(Dyadic(q)) * L * li * da * db;
        } else if constexpr (std::is_same_v<T, danger::Padic>) {
          Int rest, pv;
          unsigned long v = mpz_remove(rest.get_mpz_t(), Int(q).get_mpz_t(), sp.p.get_mpz_t());
          mpz_pow_ui(pv.get_mpz_t(), sp.p.get_mpz_t(), v);
          Rat absp(Int(1), pv);
          absp.canonicalize();
          RealBounds L = pow_bounds(log2_bounds(Rat(q), prec), Rat(2) - sp.a, prec);
          RealBounds la = pow_bounds(ln_bounds(Rat(2) / absp, prec), sp.a, prec);
          row.dist_alpha = RealBounds::of_rat(absp, prec + 8);
          row.product = RealBounds::of_rat(Rat(q) * absp, prec + 8) * L * la * db;
        } else if constexpr (std::is_same_v<T, danger::Lacunary>) {
          Int tn = sp.t.value(q);
          RealBounds lnM = ln_bounds(sp.M, prec);
          RealBounds scale = RealBounds::of_rat(sp.M / sp.c, prec + 8) * lnM;
          row.dist_alpha = RealBounds::exactly(Dyadic(1));
          row.product = scale * db;  // ||t_n b|| M ln M / c, threshold 1
        } else if constexpr (std::is_same_v<T, danger::Polynomial>) {
          RealBounds lnn = ln_bounds(Rat(q), prec);
          RealBounds scale = RealBounds::of_rat(Rat(q) / sp.C, prec + 8) * lnn;
          row.dist_alpha = RealBounds::exactly(Dyadic(1));
          row.product = scale * db;  // ||t_n b|| n ln n / C, threshold 1
        } else {  // Inhomogeneous
          RealBounds da = cf::dist_nearest(sp.alpha, Int(q), prec + 2 * bitlength(Int(q)) + 8);
          RealBounds p0 = sp.psi0.eval(Rat(q), prec);
          RealBounds p1 = sp.psi1.eval(da, prec);
          RealBounds p2 = sp.psi2.eval(db, prec);
          row.dist_alpha = da;
          row.product = p0 * p1 * p2;
        }
      },
      spec.variant());
  return row;
}

Rat threshold_of(const danger::DangerSpec& spec) {
  Rat t = spec.eps();
  return sgn(t) > 0 ? t : Rat(1);
}

}  // namespace

BetaPoint BetaPoint::rational(const Rat& r) {
  BetaPoint b;
  b.point = r;
  return b;
}

BetaPoint BetaPoint::cell(const Int& a, long l) {
  BetaPoint b;
  b.is_cell = true;
  b.cell_a = a;
  b.cell_l = l;
  return b;
}

BetaPoint BetaPoint::parse(const std::string& s) {
  if (s.rfind("rational:", 0) == 0) return rational(parse_rat(s.substr(9)));
  if (s.rfind("dyadic:", 0) == 0) {
    Dyadic d = parse_dyadic_string(s.substr(7));
    return rational(d.to_rat());
  }
  if (s.rfind("cell:", 0) == 0) {
    Dyadic d = parse_dyadic_string(s.substr(5));
    return cell(d.mant, d.level);
  }
  throw std::invalid_argument("BetaPoint: unrecognized form '" + s + "'");
}

std::string BetaPoint::str() const {
  if (is_cell) return "cell:" + cell_a.get_str() + "/2^" + std::to_string(cell_l);
  return "rational:" + rat_str(point);
}

VerifyReport verify_pointwise(const danger::DangerSpec& spec, const BetaPoint& beta, long q0,
                              long Q, int workers, long prec) {
  if (beta.lo() < 0 || beta.hi() > 1)
    throw std::domain_error("verify_pointwise: beta must lie in [0,1]");
  VerifyReport rep;
  rep.q0 = q0;
  rep.Q = Q;
  rep.threshold = threshold_of(spec);
  long start = std::max(q0, spec.start_index());
  if (start > Q) {  // vacuous pass over the empty range
    rep.pass = true;
    rep.min_product = RealBounds(Dyadic(1), Dyadic(1));
    return rep;
  }

  constexpr long kChunk = 2048;
  long n = Q - start + 1;
  int nchunks = static_cast<int>((n + kChunk - 1) / kChunk);
  struct Part {
    bool have = false;
    RealBounds min;
    Int arg;
    std::vector<long> undecided;
  };
  std::vector<Part> parts(nchunks);
  parallel_chunks(start, Q + 1, workers, kChunk, [&](int c, long b, long e) {
    Part part;
    for (long q = b; q < e; ++q) {
      Row row = product_at(spec, beta, q, prec);
      if (row.undecided) part.undecided.push_back(q);
      if (!part.have || cmp(row.product.lo, part.min.lo) < 0) {
        part.have = true;
        part.min = row.product;
        part.arg = q;
      }
    }
    parts[c] = std::move(part);
  });
  bool have = false;
  for (auto& part : parts) {
    if (!part.have) continue;
    if (!have || cmp(part.min.lo, rep.min_product.lo) < 0) {
      have = true;
      rep.min_product = part.min;
      rep.argmin_q = part.arg;
    }
    rep.undecided.insert(rep.undecided.end(), part.undecided.begin(), part.undecided.end());
  }
  rep.pass = have && rep.undecided.empty() && rep.min_product.lo.to_rat() >= rep.threshold;
  return rep;
}

std::vector<TraceRow> liminf_trace(const danger::DangerSpec& spec, const BetaPoint& beta,
                                   long Q, long q0, long prec) {
  long start = std::max(std::max(q0, 2L), spec.start_index());
  std::vector<TraceRow> rows;
  bool have = false;
  Dyadic record;
  for (long q = start; q <= Q; ++q) {
    Row row = product_at(spec, beta, q, prec);
    if (!have || cmp(row.product.hi, record) < 0) {
      have = true;
      record = row.product.hi;
      rows.push_back(TraceRow{q, row.dist_alpha, row.dist_beta, row.product});
    }
  }
  return rows;
}

ReplayResult replay_certificate(const sieve::Certificate& cert, int workers) {
  ReplayResult res;
  sieve::SieveConfig config = sieve::SieveConfig::parse(cert.config);
  long start = std::max(cert.q0, config.spec.start_index());

  AuditDigest digest;
  digest.header(cert.config, cert.final_a, cert.final_l, cert.q0, cert.Q);

  constexpr long kChunk = 1024;
  long n = cert.Q - start + 1;
  if (n < 0) n = 0;
  int nchunks = n == 0 ? 0 : static_cast<int>((n + kChunk - 1) / kChunk);
  struct Part {
    std::vector<std::tuple<long, long, Int, bool>> steps;
    long killed_at = 0;
  };
  std::vector<Part> parts(nchunks);
  parallel_chunks(start, cert.Q + 1, workers, kChunk, [&](int c, long b, long e) {
    Part part;
    for (long x = b; x < e; ++x) {
      auto ctx = danger::make_step(config.spec, x);
      bool dead = danger::cell_killed(ctx, cert.final_a, cert.final_l);
      part.steps.emplace_back(x, ctx.lx, ctx.RM, !dead);
      if (dead && part.killed_at == 0) part.killed_at = x;
    }
    parts[c] = std::move(part);
  });
  for (auto& part : parts) {
    for (auto& [x, lx, rm, survive] : part.steps) digest.step(x, lx, rm, survive);
    if (part.killed_at != 0 && res.first_kill == 0) res.first_kill = part.killed_at;
  }
  res.recomputed_digest = digest.hex();
  if (res.first_kill != 0) {
    res.pass = false;
    res.reason = "final cell intersects the cover at x=" + std::to_string(res.first_kill);
  } else if (res.recomputed_digest != cert.audit_digest) {
    res.pass = false;
    res.reason = "audit digest mismatch (corrupt certificate)";
  } else {
    res.pass = true;
  }
  return res;
}

ReplayResult replay_planar_certificate(const planar::PlanarCertificate& cert, int workers) {
  ReplayResult res;
  planar::PlanarConfig config = planar::PlanarConfig::parse(cert.config);
  auto pairs = planar::enumerate_pairs(config.X);

  AuditDigest digest;
  digest.header(cert.config, cert.final_a, cert.final_l, 0, config.X);
  digest.integer(cert.final_b);

  constexpr long kChunk = 512;
  int nchunks = pairs.empty()
                    ? 0
                    : static_cast<int>((pairs.size() + kChunk - 1) / kChunk);
  struct Part {
    std::vector<std::tuple<long, long, long, Int, bool>> steps;
    long killed_at = 0;
  };
  std::vector<Part> parts(nchunks);
  parallel_chunks(0, static_cast<long>(pairs.size()), workers, kChunk,
                  [&](int c, long b, long e) {
    Part part;
    for (long i = b; i < e; ++i) {
      auto [x, y] = pairs[i];
      auto ctx = planar::make_pair_context(x, y, config.eps);
      bool dead = planar::square_killed(ctx, cert.final_a, cert.final_b, cert.final_l);
      part.steps.emplace_back(x, y, ctx.lp, ctx.HW, !dead);
      if (dead && part.killed_at == 0) part.killed_at = x * y;
    }
    parts[c] = std::move(part);
  });
  for (auto& part : parts) {
    for (auto& [x, y, lp, hw, survive] : part.steps) {
      digest.number(static_cast<uint64_t>(x));
      digest.number(static_cast<uint64_t>(y));
      digest.number(static_cast<uint64_t>(lp));
      digest.integer(hw);
      digest.number(survive ? 1 : 0);
    }
    if (part.killed_at != 0 && res.first_kill == 0) res.first_kill = part.killed_at;
  }
  res.recomputed_digest = digest.hex();
  if (res.first_kill != 0) {
    res.pass = false;
    res.reason = "final square intersects a strip at |xy|=" + std::to_string(res.first_kill);
  } else if (res.recomputed_digest != cert.audit_digest) {
    res.pass = false;
    res.reason = "audit digest mismatch (corrupt certificate)";
  } else {
    res.pass = true;
  }
  return res;
}

}  // namespace litsieve::verify
