#pragma once

#include <string>
#include <vector>

#include "litsieve/planar.hpp"
#include "litsieve/sieve.hpp"

namespace litsieve::verify {

/// A claimed beta: an exact rational point or a certified dyadic cell.
struct BetaPoint {
  bool is_cell = false;
  Rat point;
  Int cell_a;
  long cell_l = 0;

  static BetaPoint rational(const Rat& r);
  static BetaPoint cell(const Int& a, long l);
  // "rational:1/3", "dyadic:a/2^l" (point), "cell:a/2^l"
  static BetaPoint parse(const std::string& s);
  std::string str() const;
  Rat lo() const { return is_cell ? Rat(cell_a, Int(1) << cell_l) : point; }
  Rat hi() const { return is_cell ? Rat(cell_a + 1, Int(1) << cell_l) : point; }
};

struct VerifyReport {
  long q0 = 0, Q = 0;
  RealBounds min_product;
  Int argmin_q;
  Rat threshold;
  bool pass = false;
  std::vector<long> undecided;  // q where the cell is too wide to decide
  std::string trace_ref;        // path of the record-low trace, when written
};

// Recomputes, for every q in [q0, Q], a sound lower bound of the variant's
// product valid for every beta' in the interval, and the minimum thereof.
// This path never touches the sieve's intersection routines.
VerifyReport verify_pointwise(const danger::DangerSpec& spec, const BetaPoint& beta, long q0,
                              long Q, int workers = 1, long prec = kDefaultPrec);

struct TraceRow {
  long q = 0;
  RealBounds dist_alpha;  // ||q alpha|| (or |q|_p for the p-adic variant)
  RealBounds dist_beta;
  RealBounds product;
};

// Record-low rows of the product over q = start..Q.
std::vector<TraceRow> liminf_trace(const danger::DangerSpec& spec, const BetaPoint& beta,
                                   long Q, long q0 = 0, long prec = kDefaultPrec);

struct ReplayResult {
  bool pass = false;
  std::string recomputed_digest;
  long first_kill = 0;  // index (or pair product) that kills a corrupt cell
  std::string reason;
};

// Re-tests the certified cell against every processed cover and matches the
// audit digest.
ReplayResult replay_certificate(const sieve::Certificate& cert, int workers = 1);
ReplayResult replay_planar_certificate(const planar::PlanarCertificate& cert,
                                       int workers = 1);

}  // namespace litsieve::verify
