#include "litsieve/sieve.hpp"

#include <algorithm>

#include "litsieve/analysis.hpp"

namespace litsieve::sieve {

namespace {

using u64 = unsigned long long;
using i128 = __int128;

i128 floordiv(i128 a, i128 b) {  // b > 0
  i128 q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

// Fast-path step data: exact mirrors of danger::StepContext in machine words.
struct FastStep {
  bool ok = false;
  long lx = 0;
  long shift = 0;   // lx + kGuardBits
  i128 rm = 0;      // kill radius mantissa
  i128 cden = 0;    // center denominator (times eta_den; fast path: eta = 0)
  i128 dden = 0;    // cden << kGuardBits
  i128 rmc = 0;     // rm * cden
};

FastStep to_fast(const danger::StepContext& ctx, long cur_level) {
  FastStep f;
  if (ctx.cnum_base != 0 || ctx.cnum_step != 1) return f;
  if (!ctx.RM.fits_slong_p() || !ctx.cden.fits_slong_p()) return f;
  long bits_needed = ctx.lx + danger::kGuardBits + bitlength(ctx.cden) + 4;
  if (bits_needed > 120 || cur_level > 62) return f;
  f.lx = ctx.lx;
  f.shift = ctx.lx + danger::kGuardBits;
  f.rm = ctx.RM.get_si();
  f.cden = ctx.cden.get_si();
  f.dden = f.cden << danger::kGuardBits;
  f.rmc = f.rm * f.cden;
  f.ok = true;
  return f;
}

// Kill test for the level-L cell with index `cell` (L >= f.lx).
bool fast_killed(const FastStep& f, u64 cell, long L) {
  u64 parent = cell >> (L - f.lx);
  i128 pd = static_cast<i128>(parent) * f.dden;
  // candidate centers y with killed range possibly containing `parent`
  i128 y0 = floordiv(pd - f.rmc, static_cast<i128>(1) << f.shift);
  for (i128 y = y0; y <= y0 + 2; ++y) {
    i128 scaled = y << f.shift;
    i128 nlo = scaled - f.rmc, nhi = scaled + f.rmc;
    i128 b = floordiv(nlo, f.dden);
    if (nlo % f.dden == 0) --b;
    i128 e = -floordiv(-nhi, f.dden);  // ceil
    if (nhi % f.dden == 0) ++e;
    if (b <= static_cast<i128>(parent) && static_cast<i128>(parent) < e) return true;
  }
  return false;
}

bool slow_killed(const danger::StepContext& ctx, const Int& cell, long L) {
  return danger::cell_killed(ctx, cell, L);
}

}  // namespace

std::string SieveConfig::str() const {
  std::string m = mode == Mode::Exhaustive ? "exhaustive" : "beam";
  std::string a = admissibility == Admissibility::Strict ? "strict" : "relaxed";
  return "spec=" + spec.str() + ";q0=" + std::to_string(q0) + ";mode=" + m +
         ";width=" + std::to_string(width) + ";admissibility=" + a;
}

SieveConfig SieveConfig::parse(const std::string& s) {
  // split on ';' at the known trailing keys; the spec value itself may
  // contain semicolons, so locate ";q0=" from the right.
  auto pos = s.rfind(";q0=");
  if (pos == std::string::npos || s.rfind("spec=", 0) != 0)
    throw std::invalid_argument("SieveConfig: malformed fingerprint '" + s + "'");
  SieveConfig c{danger::DangerSpec::parse(s.substr(5, pos - 5))};
  std::string rest = s.substr(pos + 1);
  std::string cur;
  for (size_t i = 0; i <= rest.size(); ++i) {
    if (i == rest.size() || rest[i] == ';') {
      auto eq = cur.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("SieveConfig: bad field '" + cur + "'");
      std::string k = cur.substr(0, eq), v = cur.substr(eq + 1);
      if (k == "q0")
        c.q0 = std::stol(v);
      else if (k == "mode")
        c.mode = v == "exhaustive" ? Mode::Exhaustive : Mode::Beam;
      else if (k == "width")
        c.width = std::stol(v);
      else if (k == "admissibility")
        c.admissibility = v == "strict" ? Admissibility::Strict : Admissibility::Relaxed;
      else
        throw std::invalid_argument("SieveConfig: unknown field '" + k + "'");
      cur.clear();
    } else {
      cur.push_back(rest[i]);
    }
  }
  return c;
}

// --- admissibility ------------------------------------------------------------

AdmissReport check_admissible(const SieveConfig& config) {
  AdmissReport rep;
  rep.relaxed = config.admissibility == SieveConfig::Admissibility::Relaxed;
  rep.eps = config.spec.eps();
  if (sgn(rep.eps) <= 0) {
    rep.warnings.push_back("variant has no eps parameter; (4.2)/(4.6) checks skipped");
    rep.pass = rep.relaxed;
    return rep;
  }

  if (config.spec.has_alpha()) {
    const cf::AlphaSpec& alpha = config.spec.alpha();
    rep.fit_grid = {2, 4, 8, 16};
    auto fit = analysis::fit_lemma2_constant(alpha, rep.fit_grid);
    rep.fitted_C = fit.value;
    // (4.2): eps < (2^10 C)^-1
    rep.eps_ok = rep.eps * Rat(1024) * rep.fitted_C < 1;
    rep.delta = cf::delta_lower_bound(alpha, Int(4096));

    // ||q0 alpha|| >= 1/4, and the smallest q >= q0 satisfying it
    RealBounds d0 = cf::dist_nearest(alpha, Int(config.q0), 80);
    rep.dist_ok = d0.lo.to_rat() >= Rat(1, 4);
    rep.smallest_good_q0 = 0;
    for (long q = config.q0; q < config.q0 + 1000000; ++q) {
      RealBounds d = cf::dist_nearest(alpha, Int(q), 80);
      if (d.lo.to_rat() >= Rat(1, 4)) {
        rep.smallest_good_q0 = q;
        break;
      }
    }
  } else {
    rep.eps_ok = true;  // no Lemma-2 constant applies (p-adic route has its own)
    rep.dist_ok = true;
    rep.smallest_good_q0 = config.q0;
    rep.warnings.push_back("variant has no alpha; C(alpha) and ||q0 alpha|| checks skipped");
  }

  // (4.6) conservative reading: q0 >= (100/eps)^3
  Rat inv = Rat(100) / rep.eps;
  rep.q0_conservative_bound = inv * inv * inv;
  rep.q0_conservative_ok = Rat(config.q0) >= rep.q0_conservative_bound;
  // literal reading: q0 >= (100 eps)^3
  Rat lit = Rat(100) * rep.eps;
  rep.q0_literal_bound = lit * lit * lit;
  rep.q0_literal_ok = Rat(config.q0) >= rep.q0_literal_bound;
  rep.literal_suspicious = rep.q0_literal_bound < 1;
  if (rep.literal_suspicious)
    rep.warnings.push_back("literal (100 eps)^3 bound is vacuous for eps < 1/100");

  bool strict_ok = rep.eps_ok && rep.q0_conservative_ok && rep.dist_ok;
  if (!rep.eps_ok) rep.warnings.push_back("eps does not satisfy (4.2) for the fitted C(alpha)");
  if (!rep.q0_conservative_ok)
    rep.warnings.push_back("q0 below the conservative (100/eps)^3 bound");
  if (!rep.dist_ok) rep.warnings.push_back("||q0 alpha|| < 1/4");
  rep.pass = strict_ok || rep.relaxed;
  return rep;
}

// --- exhaustive mode ------------------------------------------------------------

long block_level(const Rat& eps, const Int& qk) {
  if (sgn(eps) <= 0) throw std::domain_error("block_level: eps must be positive");
  return decided_floor_log2([&](long p) {
    RealBounds lg = log2_bounds(Rat(qk), p);
    return RealBounds::of_rat(Rat(qk) * Rat(qk) / (4 * eps), p + 8) * (lg * lg);
  });
}

SelectionOutcome select_blocks(const BlockState& state, long L_next,
                               const std::vector<Int>& next_survivors, bool strict) {
  SelectionOutcome out;
  out.report.k = state.k;
  long dshift = L_next - state.Lk;
  if (dshift < 0) throw std::logic_error("select_blocks: L_next below block level");

  // Thin each parent's children left-to-right so consecutive kept cells are
  // separated by at least 2^-L_next, then count qualifying parents.
  Int child_target = Int(1) << std::max(0L, L_next - state.Lk - 3);
  out.report.child_target = child_target;
  long d_shift = state.Lk - 5 * state.k - 5;
  Int D_target = d_shift >= 0 ? Int(1) << d_shift : Int(1);
  out.report.target_D = D_target;
  Int C_next_target = (L_next - 5 * (state.k + 1) - 3) >= 0
                          ? Int(1) << (L_next - 5 * (state.k + 1) - 3)
                          : Int(1);
  out.report.target_C_next = C_next_target;

  std::vector<std::pair<Int, std::vector<Int>>> qualified;  // parent -> kept children
  size_t i = 0;
  for (const Int& parent : state.C) {
    Int lo = parent << dshift, hi = (parent + 1) << dshift;
    while (i < next_survivors.size() && next_survivors[i] < lo) ++i;
    std::vector<Int> kept;
    Int last = -2;
    size_t j = i;
    while (j < next_survivors.size() && next_survivors[j] < hi) {
      if (next_survivors[j] > last + 1) {
        kept.push_back(next_survivors[j]);
        last = next_survivors[j];
      }
      ++j;
    }
    i = j;
    if (Int(kept.size()) >= child_target && !kept.empty())
      qualified.emplace_back(parent, std::move(kept));
  }

  out.report.actual_D = qualified.size();
  Int take_D = std::min(Int(qualified.size()), D_target);
  for (Int d = 0; d < take_D; ++d) out.D.push_back(qualified[d.get_ui()].first);
  for (Int d = 0; d < take_D; ++d) {
    const auto& kids = qualified[d.get_ui()].second;
    for (const Int& c : kids) {
      if (Int(out.C_next.size()) >= C_next_target) break;
      out.C_next.push_back(c);
    }
  }
  out.report.actual_C_next = out.C_next.size();
  out.report.met = out.report.actual_D >= D_target && out.report.actual_C_next >= C_next_target;
  if (strict && !out.report.met)
    throw std::runtime_error("select_blocks: (P_k) counts not met in strict mode at k=" +
                             std::to_string(state.k));
  return out;
}

namespace {

// Exhaustive survivor state: all cells at a common level.
struct ExhaustiveState {
  long level = 0;
  std::vector<Int> cells;              // sorted survivor indices
  std::vector<std::pair<Int, Int>> cover;  // merged killed ranges at `level`

  void subdivide_to(long L, const Int& cap) {
    if (L <= level) return;
    long d = L - level;
    Int factor = Int(1) << d;
    if (Int(cells.size()) * factor > cap)
      throw std::runtime_error("cell-count cap exceeded; use beam mode");
    std::vector<Int> next;
    next.reserve(cells.size() << d);
    for (const Int& c : cells) {
      Int base = c << d;
      for (Int j = 0; j < factor; ++j) next.push_back(base + j);
    }
    cells = std::move(next);
    for (auto& r : cover) {
      r.first <<= d;
      r.second <<= d;
    }
    level = L;
  }

  void remove_ranges(const std::vector<std::pair<Int, Int>>& ranges, long range_level) {
    long d = level - range_level;
    std::vector<Int> kept;
    kept.reserve(cells.size());
    size_t ri = 0;
    for (const Int& c : cells) {
      Int cp = c >> d;
      while (ri < ranges.size() && ranges[ri].second <= cp) ++ri;
      bool killed = ri < ranges.size() && ranges[ri].first <= cp && cp < ranges[ri].second;
      if (!killed) kept.push_back(c);
    }
    cells = std::move(kept);
    for (const auto& r : ranges)
      cover.emplace_back(r.first << d, r.second << d);
    std::sort(cover.begin(), cover.end());
    std::vector<std::pair<Int, Int>> merged;
    for (auto& r : cover) {
      if (!merged.empty() && r.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, r.second);
      else
        merged.push_back(r);
    }
    cover = std::move(merged);
  }

  Rat survivor_measure() const {
    Rat m(Int(cells.size()), Int(1) << level);
    m.canonicalize();
    return m;
  }
  Rat cover_measure() const {
    Int covered = 0;
    for (const auto& r : cover) covered += r.second - r.first;
    Rat m(covered, Int(1) << level);
    m.canonicalize();
    return m;
  }
};

}  // namespace

ExhaustiveResult run_exhaustive(const SieveConfig& config, long Q, long blocks_K,
                                const Observer& obs) {
  const long q0 = config.q0;
  ExhaustiveState st;
  st.cells = {Int(0)};  // [0,1] at level 0

  ExhaustiveResult res;
  res.q0 = q0;
  res.Q = Q;

  std::vector<Int> qk_list;  // block checkpoints q_k = q0^(3^k)
  if (blocks_K >= 0) {
    Int qk(q0);
    for (long k = 0; k <= blocks_K; ++k) {
      qk_list.push_back(qk);
      Int next = qk * qk * qk;
      qk = next;
    }
    if (qk_list.back() > Q)
      throw std::domain_error("run_exhaustive: block q_K exceeds Q");
  }

  long next_block = 0;
  const Rat eps = config.spec.eps();
  auto handle_block = [&](long q) {
    if (blocks_K < 0 || next_block > blocks_K) return;
    if (Int(q) != qk_list[next_block]) return;
    long Lk = block_level(eps, qk_list[next_block]);
    if (st.level > Lk)
      throw std::logic_error("run_exhaustive: l_x exceeded L_k (monotonicity guard)");
    ExhaustiveState snap = st;
    snap.subdivide_to(Lk, config.cell_cap);
    BlockState bs;
    bs.k = next_block;
    bs.Lk = Lk;
    bs.measure = snap.survivor_measure();
    if (next_block == 0) {
      // C_0: thin B_{q_0} to separated cells, target 2^(L_0 - 3)
      Int target = Lk >= 3 ? Int(1) << (Lk - 3) : Int(1);
      Int last = -2;
      for (const Int& c : snap.cells) {
        if (Int(bs.C.size()) >= target) break;
        if (c > last + 1) {
          bs.C.push_back(c);
          last = c;
        }
      }
      bs.T = bs.C.size();
      res.blocks.push_back(std::move(bs));
    } else {
      BlockState& prev = res.blocks.back();
      auto sel = select_blocks(prev, Lk, snap.cells,
                               config.admissibility == SieveConfig::Admissibility::Strict);
      prev.D = sel.D;
      bs.C = std::move(sel.C_next);
      bs.T = bs.C.size();
      res.selections.push_back(sel.report);
      res.blocks.push_back(std::move(bs));
    }
    ++next_block;
  };

  for (long x = q0; x <= Q; ++x) {
    if (x >= config.spec.start_index()) {
      auto ctx = danger::make_step(config.spec, x);
      st.subdivide_to(ctx.lx, config.cell_cap);
      auto ranges = danger::covered_ranges(ctx);
      st.remove_ranges(ranges, ctx.lx);
    }
    Rat m = st.survivor_measure();
    // Exact ledger identity: survivors + union of covers fill [0,1].
    if (m + st.cover_measure() != 1)
      throw std::logic_error("run_exhaustive: measure ledger identity violated");
    res.measures.push_back(m);
    if (obs) obs(x, st.level, Int(st.cells.size()), m);
    handle_block(x);
  }

  res.level = st.level;
  res.cells = std::move(st.cells);
  res.cover_measure = st.cover_measure();
  return res;
}

// --- beam mode --------------------------------------------------------------------

namespace {

struct ResumePoint {
  long x;
  long level;
  std::vector<u64> cells;
};

}  // namespace

Certificate run_beam(const SieveConfig& config, long Q) {
  const long q0 = config.q0;
  const long W = config.width;
  if (W < 1) throw std::invalid_argument("run_beam: width must be >= 1");

  long level = 0;
  std::vector<u64> cells = {0};
  std::vector<ResumePoint> stack;
  long backtracks = 0;
  std::vector<std::pair<long, long>> kill_log;
  const long start = std::max(q0, config.spec.start_index());

  std::vector<u64> scratch;
  long x = q0;
  while (x <= Q) {
    if (x < start) {
      ++x;
      continue;
    }
    danger::StepContext ctx;
    try {
      ctx = danger::make_step(config.spec, x);
    } catch (const danger::TooCoarseError& e) {
      // Every cell dies at this index whatever the frontier; backtracking
      // cannot help.
      throw StarvationError(e.x);
    }

    // refine to the running max resolution
    if (ctx.lx > level) {
      long d = ctx.lx - level;
      if (d > 40) throw std::runtime_error("run_beam: resolution jump too large");
      scratch.clear();
      scratch.reserve(cells.size() << d);
      for (u64 c : cells)
        for (u64 j = 0; j < (1ULL << d); ++j) scratch.push_back((c << d) | j);
      cells.swap(scratch);
      level = ctx.lx;
      if (level > 62) throw std::runtime_error("run_beam: level exceeds 62-bit cell indexing");
    }

    FastStep fast = to_fast(ctx, level);
    scratch.clear();
    long killed = 0;
    for (u64 c : cells) {
      bool dead = fast.ok ? fast_killed(fast, c, level)
                          : slow_killed(ctx, Int(static_cast<unsigned long>(c)), level);
      if (dead)
        ++killed;
      else
        scratch.push_back(c);
    }
    if (killed > 0 && kill_log.size() < 64) kill_log.emplace_back(x, killed);

    if (scratch.empty()) {
      if (stack.empty()) throw StarvationError(x);
      ResumePoint rp = std::move(stack.back());
      stack.pop_back();
      ++backtracks;
      cells = std::move(rp.cells);
      level = rp.level;
      x = rp.x;
      continue;
    }
    if (static_cast<long>(scratch.size()) > W) {
      ResumePoint rp;
      rp.x = x + 1;
      rp.level = level;
      rp.cells.assign(scratch.begin() + W, scratch.end());
      stack.push_back(std::move(rp));
      scratch.resize(W);
    }
    cells.swap(scratch);
    ++x;
  }

  Certificate cert;
  cert.config = config.str();
  cert.q0 = q0;
  cert.Q = Q;
  cert.final_a = Int(static_cast<unsigned long>(cells.front()));
  cert.final_l = level;
  cert.backtracks = backtracks;
  cert.kill_log = std::move(kill_log);

  // Post pass over the final cell: audit digest and certified minimum product.
  AuditDigest digest;
  digest.header(cert.config, cert.final_a, cert.final_l, q0, Q);
  bool have_min = false;
  Rat minp_lo, minp_hi;
  Int minp_arg = 0;
  Rat cell_lo(cert.final_a, Int(1) << cert.final_l);
  Rat cell_hi(cert.final_a + 1, Int(1) << cert.final_l);
  cell_lo.canonicalize();
  cell_hi.canonicalize();
  for (long xx = start; xx <= Q; ++xx) {
    auto ctx = danger::make_step(config.spec, xx);
    bool dead = danger::cell_killed(ctx, cert.final_a, cert.final_l);
    digest.step(xx, ctx.lx, ctx.RM, !dead);
    if (dead)
      throw std::logic_error("run_beam: final cell fails replay at x=" + std::to_string(xx));

    // exact distance from the cell to the nearest center (y any integer)
    Rat c0 = Rat(ctx.cnum_base, ctx.cden);
    Rat step(ctx.cnum_step, ctx.cden);
    c0.canonicalize();
    step.canonicalize();
    // nearest center indices around the cell midpoint
    Rat mid = (cell_lo + cell_hi) / 2;
    Rat yr = (mid - c0) / step;
    Int y0(yr.get_num() / yr.get_den());
    Rat dist(-1);
    for (Int y = y0 - 1; y <= y0 + 2; ++y) {
      Rat c = c0 + Rat(y) * step;
      Rat d;
      if (c < cell_lo)
        d = cell_lo - c;
      else if (c > cell_hi)
        d = c - cell_hi;
      else
        d = Rat(0);
      if (dist < 0 || d < dist) dist = d;
    }
    // P(x) >= dist * threshold / r, with threshold = eps (or 1 normalized)
    Rat thr = config.spec.eps();
    if (sgn(thr) <= 0) thr = Rat(1);
    Rat plo = dist * thr / ctx.radius.hi.to_rat();
    Rat far = dist + (cell_hi - cell_lo);
    Rat phi = far * thr / ctx.radius.lo.to_rat();
    if (!have_min || plo < minp_lo) {
      have_min = true;
      minp_lo = plo;
      minp_arg = xx;
    }
    if (xx == start || phi < minp_hi) minp_hi = phi;
  }
  cert.min_product =
      RealBounds(round_down(minp_lo, 2 * kDefaultPrec), round_up(minp_hi, 2 * kDefaultPrec));
  cert.min_product_arg = minp_arg;
  cert.audit_digest = digest.hex();
  return cert;
}

BetaExtract extract_beta(const Certificate& cert, long digits) {
  BetaExtract out;
  out.cell_a = cert.final_a;
  out.cell_l = cert.final_l;
  if (digits <= 0 && cert.final_l != 0)
    throw std::domain_error("extract_beta: zero digits requested for a refined cell");
  Dyadic mid(2 * cert.final_a + 1, cert.final_l + 1);
  if (digits >= cert.final_l) {
    out.beta = mid;  // exact midpoint; cannot certify digits beyond the cell
    out.truncated = digits > cert.final_l;
    return out;
  }
  out.beta = round_dir(mid, digits, false);
  return out;
}

}  // namespace litsieve::sieve
