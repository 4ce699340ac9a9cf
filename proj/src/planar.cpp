#include "litsieve/planar.hpp"

#include <algorithm>

#include "litsieve/parallel.hpp"
#include "litsieve/sieve.hpp"

namespace litsieve::planar {

namespace {

using u64 = unsigned long long;
using i128 = __int128;

i128 floordiv(i128 a, i128 b) {  // b > 0
  i128 q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

Rat parse_eps_str(const std::string& s) {
  Dyadic d = parse_dyadic_string(s);
  if (d.sign() <= 0) throw std::invalid_argument("planar: eps must be positive");
  return d.to_rat();
}

std::string eps_str(const Rat& eps) {
  Int num = eps.get_num(), den = eps.get_den();
  if (num == 1 && is_power_of_two(den)) return "2^-" + std::to_string(floor_log2(den));
  return num.get_str() + "/2^" + std::to_string(floor_log2(den));
}

}  // namespace

std::string PlanarConfig::str() const {
  return "planar:eps=" + eps_str(eps) + ";X=" + std::to_string(X) +
         ";width=" + std::to_string(width);
}

PlanarConfig PlanarConfig::parse(const std::string& s) {
  std::string body = s;
  if (body.rfind("planar:", 0) == 0) body = body.substr(7);
  PlanarConfig c;
  bool got_eps = false, got_X = false;
  size_t pos = 0;
  while (pos < body.size()) {
    auto semi = body.find(';', pos);
    std::string field = body.substr(pos, semi == std::string::npos ? semi : semi - pos);
    pos = semi == std::string::npos ? body.size() : semi + 1;
    auto eq = field.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("planar: bad field '" + field + "'");
    std::string k = field.substr(0, eq), v = field.substr(eq + 1);
    if (k == "eps") c.eps = parse_eps_str(v), got_eps = true;
    else if (k == "X") c.X = std::stol(v), got_X = true;
    else if (k == "width") c.width = std::stol(v);
    else throw std::invalid_argument("planar: unknown field '" + k + "'");
  }
  if (!got_eps || !got_X) throw std::invalid_argument("planar: need eps and X");
  return c;
}

RealBounds strip_halfwidth(long x, long y, const Rat& eps, long prec) {
  long n = std::labs(x) * std::labs(y);
  if (n < 2) throw std::domain_error("strip_halfwidth: |xy| must be >= 2");
  RealBounds lnn = ln_bounds(Rat(n), prec);
  RealBounds W = RealBounds::of_rat(Rat(n) / eps, prec + 4) * (lnn * lnn);
  return rb_recip(W, prec + 2 * bitlength(Int(n)) + 16);
}

std::vector<Strip> strips_for_pair(long x, long y, const Rat& eps, long prec) {
  RealBounds hw = strip_halfwidth(x, y, eps, prec);
  RealBounds norm = sqrt_bounds(Rat(x) * Rat(x) + Rat(y) * Rat(y), prec);
  RealBounds geo = rb_div(hw, norm, prec + 16);
  std::vector<Strip> out;
  for (long z = -(x + y); z <= 0; ++z)
    out.push_back(Strip{x, y, Int(z), hw, geo});
  return out;
}

StripSumReport strip_sum_check(long q, const Rat& eps, long prec, int workers) {
  if (q < 2) throw std::domain_error("strip_sum_check: q must be >= 2");
  if (q > 64) throw std::domain_error("strip_sum_check: q exceeds the desk budget (64)");
  long hi = q * q * q;
  // divisor-count sieve over [q, hi]
  std::vector<int> divs(hi + 1, 0);
  for (long d = 1; d <= hi; ++d)
    for (long n = d; n <= hi; n += d) ++divs[n];

  constexpr long kChunk = 2048;
  long n_items = hi - q + 1;
  int nchunks = static_cast<int>((n_items + kChunk - 1) / kChunk);
  std::vector<RealBounds> parts(nchunks, RealBounds(Dyadic(0), Dyadic(0)));
  std::vector<Int> counts(nchunks, Int(0));
  parallel_chunks(q, hi + 1, workers, kChunk, [&](int c, long b, long e) {
    RealBounds sum(Dyadic(0), Dyadic(0));
    Int cnt = 0;
    for (long n = b; n < e; ++n) {
      RealBounds lnn = ln_bounds(Rat(n), prec);
      RealBounds W = RealBounds::of_rat(Rat(n) / (eps * Rat(divs[n])), prec + 4) * (lnn * lnn);
      sum = sum + rb_recip(W, prec + 2 * bitlength(Int(n)) + 16);
      cnt += divs[n];
    }
    parts[c] = sum;
    counts[c] = cnt;
  });
  StripSumReport rep;
  rep.q = q;
  RealBounds total(Dyadic(0), Dyadic(0));
  for (int c = 0; c < nchunks; ++c) {
    total = total + parts[c];
    rep.pair_count += counts[c];
  }
  rep.value = rb_round(total, prec + 8);
  rep.ratio_to_eps = rb_div(rep.value, RealBounds::of_rat(eps, prec + 8), prec);
  return rep;
}

std::vector<std::pair<long, long>> enumerate_pairs(long X) {
  std::vector<std::tuple<long, long, long>> keyed;
  for (long x = 1; x <= X; ++x)
    for (long y = 1; y <= X; ++y)
      if (x * y >= 2) keyed.emplace_back(x * y, x, y);
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::pair<long, long>> out;
  out.reserve(keyed.size());
  for (auto& [n, x, y] : keyed) out.emplace_back(x, y);
  return out;
}

PairContext make_pair_context(long x, long y, const Rat& eps) {
  PairContext ctx;
  ctx.x = x;
  ctx.y = y;
  ctx.n = x * y;
  ctx.hw = strip_halfwidth(x, y, eps);
  // level: the square's f-extent (x+y)/2^lp sits in [2 hw, 4 hw)
  ctx.lp = decided_floor_log2([&](long p) {
    RealBounds hw = strip_halfwidth(x, y, eps, p);
    return rb_div(RealBounds::exactly(Dyadic(Int(x + y))),
                  RealBounds(mul_pow2(hw.lo, 1), mul_pow2(hw.hi, 1)), p + 16);
  });
  if (ctx.lp < 1) throw std::domain_error("planar: parameters too coarse");
  ctx.HW = ceil_int(mul_pow2(ctx.hw.hi, ctx.lp + danger::kGuardBits)) + 1;
  return ctx;
}

bool square_killed(const PairContext& ctx, const Int& a, const Int& b, long L) {
  if (L < ctx.lp) throw std::logic_error("square_killed: square coarser than pair level");
  Int pa = a >> (L - ctx.lp), pb = b >> (L - ctx.lp);
  // f over the parent square, in lattice units at level lp
  Int flo = Int(ctx.x) * pa + Int(ctx.y) * pb;
  Int fhi = Int(ctx.x) * (pa + 1) + Int(ctx.y) * (pb + 1);
  // killed iff some integer z has |f + z| <= HW / 2^(lp+G) somewhere:
  // iff [flo*2^G - HW, fhi*2^G + HW] / 2^(lp+G) contains an integer.
  Int S = Int(1) << (ctx.lp + danger::kGuardBits);
  Int lo = (flo << danger::kGuardBits) - ctx.HW;
  Int hi = (fhi << danger::kGuardBits) + ctx.HW;
  Int zlo, zhi;
  mpz_cdiv_q(zlo.get_mpz_t(), lo.get_mpz_t(), S.get_mpz_t());
  mpz_fdiv_q(zhi.get_mpz_t(), hi.get_mpz_t(), S.get_mpz_t());
  return zlo <= zhi;
}

namespace {

struct FastPair {
  bool ok = false;
  long lp = 0;
  long shift = 0;
  i128 hwm = 0;
  long x = 0, y = 0;
};

FastPair to_fast(const PairContext& ctx, long level) {
  FastPair f;
  if (!ctx.HW.fits_slong_p()) return f;
  if (ctx.lp + danger::kGuardBits + 12 > 120 || level > 62) return f;
  f.lp = ctx.lp;
  f.shift = ctx.lp + danger::kGuardBits;
  f.hwm = ctx.HW.get_si();
  f.x = ctx.x;
  f.y = ctx.y;
  f.ok = true;
  return f;
}

bool fast_killed(const FastPair& f, u64 a, u64 b, long L) {
  u64 pa = a >> (L - f.lp), pb = b >> (L - f.lp);
  i128 flo = static_cast<i128>(f.x) * pa + static_cast<i128>(f.y) * pb;
  i128 fhi = flo + f.x + f.y;
  i128 lo = (flo << danger::kGuardBits) - f.hwm;
  i128 hi = (fhi << danger::kGuardBits) + f.hwm;
  i128 S = static_cast<i128>(1) << f.shift;
  i128 zlo = -floordiv(-lo, S);  // ceil
  i128 zhi = floordiv(hi, S);
  return zlo <= zhi;
}

struct Resume {
  size_t pair_index;
  long level;
  std::vector<std::pair<u64, u64>> squares;
};

}  // namespace

PlanarCertificate run_planar_beam(const PlanarConfig& config) {
  if (config.width < 1) throw std::invalid_argument("planar: width must be >= 1");
  if (sgn(config.eps) <= 0) throw std::invalid_argument("planar: eps must be positive");
  auto pairs = enumerate_pairs(config.X);

  // pair contexts are shared by the run and the audit pass
  std::vector<PairContext> ctxs;
  ctxs.reserve(pairs.size());
  for (auto& [x, y] : pairs) ctxs.push_back(make_pair_context(x, y, config.eps));

  long level = 0;
  std::vector<std::pair<u64, u64>> squares = {{0, 0}};
  std::vector<Resume> stack;
  long backtracks = 0;
  std::vector<std::pair<u64, u64>> scratch;

  size_t i = 0;
  while (i < pairs.size()) {
    const PairContext& ctx = ctxs[i];
    if (ctx.lp > level) {
      long d = ctx.lp - level;
      if (d > 20) throw std::runtime_error("planar: resolution jump too large");
      scratch.clear();
      scratch.reserve(squares.size() << (2 * d));
      for (auto& [a, b] : squares)
        for (u64 ia = 0; ia < (1ULL << d); ++ia)
          for (u64 ib = 0; ib < (1ULL << d); ++ib)
            scratch.emplace_back((a << d) | ia, (b << d) | ib);
      std::sort(scratch.begin(), scratch.end());
      squares.swap(scratch);
      level = ctx.lp;
      if (level > 62) throw std::runtime_error("planar: level exceeds 62-bit indexing");
    }

    FastPair fast = to_fast(ctx, level);
    scratch.clear();
    for (auto& [a, b] : squares) {
      bool dead = fast.ok
                      ? fast_killed(fast, a, b, level)
                      : square_killed(ctx, Int(static_cast<unsigned long>(a)),
                                      Int(static_cast<unsigned long>(b)), level);
      if (!dead) scratch.emplace_back(a, b);
    }
    if (scratch.empty()) {
      if (stack.empty()) throw sieve::StarvationError(ctx.n);
      Resume rp = std::move(stack.back());
      stack.pop_back();
      ++backtracks;
      squares = std::move(rp.squares);
      level = rp.level;
      i = rp.pair_index;
      continue;
    }
    if (static_cast<long>(scratch.size()) > config.width) {
      Resume rp;
      rp.pair_index = i + 1;
      rp.level = level;
      rp.squares.assign(scratch.begin() + config.width, scratch.end());
      stack.push_back(std::move(rp));
      scratch.resize(config.width);
    }
    squares.swap(scratch);
    ++i;
  }

  PlanarCertificate cert;
  cert.config = config.str();
  cert.eps = config.eps;
  cert.X = config.X;
  cert.width = config.width;
  cert.final_a = Int(static_cast<unsigned long>(squares.front().first));
  cert.final_b = Int(static_cast<unsigned long>(squares.front().second));
  cert.final_l = level;
  cert.backtracks = backtracks;

  // audit pass over the final square
  AuditDigest digest;
  digest.header(cert.config, cert.final_a, cert.final_l, 0, config.X);
  digest.integer(cert.final_b);
  bool have_min = false;
  Rat minlo, minhi;
  Int scale = Int(1) << cert.final_l;
  for (size_t j = 0; j < pairs.size(); ++j) {
    const PairContext& ctx = ctxs[j];
    bool dead = square_killed(ctx, cert.final_a, cert.final_b, cert.final_l);
    digest.number(static_cast<uint64_t>(ctx.x));
    digest.number(static_cast<uint64_t>(ctx.y));
    digest.number(static_cast<uint64_t>(ctx.lp));
    digest.integer(ctx.HW);
    digest.number(dead ? 0 : 1);
    if (dead)
      throw std::logic_error("planar: final square fails replay at pair (" +
                             std::to_string(ctx.x) + "," + std::to_string(ctx.y) + ")");
    // exact distance of f(square) to the nearest integer, f in real units
    Rat flo = Rat(Int(ctx.x) * cert.final_a + Int(ctx.y) * cert.final_b, scale);
    Rat fhi = Rat(Int(ctx.x) * (cert.final_a + 1) + Int(ctx.y) * (cert.final_b + 1), scale);
    flo.canonicalize();
    fhi.canonicalize();
    Int nlo;
    mpz_fdiv_q(nlo.get_mpz_t(), flo.get_num().get_mpz_t(), flo.get_den().get_mpz_t());
    Rat dist(-1);
    for (Int z = nlo; z <= nlo + 2; ++z) {
      Rat d;
      if (Rat(z) < flo)
        d = flo - Rat(z);
      else if (Rat(z) > fhi)
        d = Rat(z) - fhi;
      else
        d = Rat(0);
      if (dist < 0 || d < dist) dist = d;
    }
    // value = n ln^2 n ||f|| >= dist * eps / hw_hi
    Rat plo = dist * config.eps / ctx.hw.hi.to_rat();
    Rat phi = (dist + (fhi - flo)) * config.eps / ctx.hw.lo.to_rat();
    if (!have_min || plo < minlo) {
      have_min = true;
      minlo = plo;
      cert.min_arg_x = ctx.x;
      cert.min_arg_y = ctx.y;
    }
    if (j == 0 || phi < minhi) minhi = phi;
  }
  if (have_min) {
    cert.min_value =
        RealBounds(round_down(minlo, 2 * kDefaultPrec), round_up(minhi, 2 * kDefaultPrec));
  } else {
    // no pair qualified (X <= 1): vacuous certificate over [0,1]^2
    cert.min_value = RealBounds(Dyadic(0), Dyadic(0));
  }
  cert.audit_digest = digest.hex();
  return cert;
}

}  // namespace litsieve::planar
