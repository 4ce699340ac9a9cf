#pragma once

#include <string>
#include <vector>

#include "litsieve/danger.hpp"
#include "litsieve/digest.hpp"

namespace litsieve::planar {

struct PlanarConfig {
  Rat eps;  // dyadic
  long X = 0;
  long width = 4096;
  std::string str() const;
  static PlanarConfig parse(const std::string& s);
};

// eps / (|xy| ln^2 |xy|); requires |xy| >= 2.
RealBounds strip_halfwidth(long x, long y, const Rat& eps, long prec = kDefaultPrec);

/// One strip |x X + y Y + z| <= eps_{x,y} around the line x X + y Y + z = 0.
struct Strip {
  long x = 0, y = 0;
  Int z;
  RealBounds halfwidth;           // algebraic bound eps_{x,y}
  RealBounds geometric_halfwidth; // eps_{x,y} / sqrt(x^2 + y^2)
};

// The strips of a pair whose line meets the unit square (z in [-(x+y), 0]).
std::vector<Strip> strips_for_pair(long x, long y, const Rat& eps, long prec = kDefaultPrec);

struct StripSumReport {
  long q = 0;
  RealBounds value;         // sum over q <= xy <= q^3 of eps_{x,y}
  RealBounds ratio_to_eps;
  Int pair_count;
};
StripSumReport strip_sum_check(long q, const Rat& eps, long prec = kDefaultPrec,
                               int workers = 1);

// Pairs (x, y), x,y >= 1, xy >= 2, x,y <= X, in increasing |xy|, ties
// lexicographic.
std::vector<std::pair<long, long>> enumerate_pairs(long X);

/// Per-pair kill geometry: canonical widened halfwidth HW / 2^(lp + G) at the
/// pair's own resolution lp (square f-extent within [2 hw, 4 hw)).
struct PairContext {
  long x = 0, y = 0;
  long n = 0;       // xy
  long lp = 0;      // lattice level for this pair
  Int HW;           // widened halfwidth mantissa at scale 2^(lp + kGuardBits)
  RealBounds hw;    // tight enclosure of the true halfwidth
};
PairContext make_pair_context(long x, long y, const Rat& eps);

// Reference kill test for the level-L square [a,(a+1)]x[b,(b+1)] / 2^L.
bool square_killed(const PairContext& ctx, const Int& a, const Int& b, long L);

struct PlanarCertificate {
  std::string config;
  Rat eps;
  long X = 0;
  long width = 0;
  Int final_a, final_b;
  long final_l = 0;
  RealBounds min_value;  // min over pairs of max{2,xy} ||x a + y b|| ln^2 max{2,xy}
  long min_arg_x = 0, min_arg_y = 0;
  long backtracks = 0;
  std::string audit_digest;
};

PlanarCertificate run_planar_beam(const PlanarConfig& config);

}  // namespace litsieve::planar
