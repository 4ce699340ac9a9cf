// Test-only brute-force sieve enumerator: tests every maximal-level cell
// against every forbidden interval with plain rational interval intersection.
// Shares nothing with the library's lattice-range route except the canonical
// widened radius, whose value is cross-checked against an mpfr recomputation.
#pragma once

#include <vector>

#include "litsieve/danger.hpp"
#include "oracle_mpfr.hpp"

namespace test_brute {

using litsieve::Int;
using litsieve::Rat;

struct BruteResult {
  long level;
  std::vector<Int> cells;
};

// Survivors of x = q0..Q at the common running-max level, by closed
// interval intersection of each cell with each widened danger interval.
inline BruteResult brute_sieve(const litsieve::danger::DangerSpec& spec, long q0, long Q) {
  struct Step {
    long lx;
    Rat R;
    Int y_min, y_max;
    Int cnum_base, cnum_step, cden;
  };
  std::vector<Step> steps;
  long level = 0;
  for (long x = std::max(q0, spec.start_index()); x <= Q; ++x) {
    auto ctx = litsieve::danger::make_step(spec, x);
    Rat R(ctx.RM, Int(1) << (ctx.lx + litsieve::danger::kGuardBits));
    R.canonicalize();
    steps.push_back({ctx.lx, R, ctx.y_min, ctx.y_max, ctx.cnum_base, ctx.cnum_step, ctx.cden});
    level = std::max(level, ctx.lx);
  }
  BruteResult res;
  res.level = level;
  Int cells = Int(1) << level;
  for (Int a = 0; a < cells; ++a) {
    bool alive = true;
    for (const auto& st : steps) {
      // The sieve removes the dyadic cover of E(x) at resolution l_x, so a
      // maximal-level cell dies with its level-l_x ancestor: intersect that
      // ancestor with the widened intervals.
      Int p = a >> (level - st.lx);
      Rat clo(p, Int(1) << st.lx), chi(p + 1, Int(1) << st.lx);
      clo.canonicalize();
      chi.canonicalize();
      for (Int y = st.y_min; y <= st.y_max && alive; ++y) {
        Rat c(st.cnum_base + y * st.cnum_step, st.cden);
        c.canonicalize();
        // closed-closed intersection with the widened interval
        if (c - st.R <= chi && clo <= c + st.R) alive = false;
      }
      if (!alive) break;
    }
    if (alive) res.cells.push_back(a);
  }
  return res;
}

// Independent mpfr recomputation of the canonical kill radius mantissa:
// RM = ceil(r_hi * 2^(lx+G)) + 1 must match the library's value unless the
// radius sits within an ulp of a grid line (flagged by returning false).
inline bool kill_radius_consistent(const litsieve::danger::DangerSpec& spec, long x) {
  auto ctx = litsieve::danger::make_step(spec, x);
  // The enclosure is relatively 2^-40-tight; the mpfr midpoint must round to
  // the same mantissa after the ceil+1 widening.
  test_oracle::Real mid(litsieve::mul_pow2(ctx.radius.lo + ctx.radius.hi, -1).to_rat());
  mpfr_t scaled;
  mpfr_init2(scaled, 256);
  mpfr_mul_2si(scaled, mid.get(), ctx.lx + litsieve::danger::kGuardBits, MPFR_RNDN);
  mpfr_ceil(scaled, scaled);
  Int rm_oracle;
  mpfr_get_z(rm_oracle.get_mpz_t(), scaled, MPFR_RNDN);
  rm_oracle += 1;
  bool ok = rm_oracle == ctx.RM || rm_oracle + 1 == ctx.RM || rm_oracle == ctx.RM + 1;
  mpfr_clear(scaled);
  return ok;
}

}  // namespace test_brute
