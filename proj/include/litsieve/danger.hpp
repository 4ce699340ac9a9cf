#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "litsieve/cf.hpp"
#include "litsieve/exact.hpp"

namespace litsieve::danger {

// Guard bits for the canonical widened kill radius.  The kill radius is the
// 64-bit upper enclosure of the true radius, rounded up to the grid
// 2^-(l_x + kGuardBits) and bumped one ulp.  Removal always uses this widened
// value; verification uses lower bounds, so certificates stay sound, and the
// relative widening (~2^-31) dominates every enclosure error downstream.
inline constexpr long kGuardBits = 32;

struct TooCoarseError : std::runtime_error {
  long x;
  explicit TooCoarseError(long x_)
      : std::runtime_error("parameters too coarse: danger radius >= 1/4 at index " +
                           std::to_string(x_)),
        x(x_) {}
};

/// Weight function family kappa * x^s * log(.)^t used by the generalized
/// inhomogeneous variant.
struct PsiSpec {
  enum class LogKind { None, LnX, Log2X, LnEPlusX, LnOneOverX, LnEOverX };

  Rat kappa{1};
  Rat s{1};
  Rat t{0};
  LogKind logkind = LogKind::None;

  static PsiSpec identity() { return PsiSpec{}; }
  bool is_identity() const { return kappa == 1 && s == 1 && t == 0; }
  bool is_pure_power() const { return t == 0; }

  RealBounds eval(const RealBounds& x, long prec) const;
  RealBounds eval(const Rat& x, long prec) const;
  // Inverse on the increasing branch through 0 (bisection unless closed form).
  RealBounds inverse(const RealBounds& v, long prec) const;

  std::string str() const;
  static PsiSpec parse(const std::string& s);
};

/// Integer sequence descriptor for t_n: geometric b^n or power n^g.
struct SeqDescriptor {
  enum class Kind { Geometric, Power };
  Kind kind = Kind::Geometric;
  Int param{2};

  Int value(long n) const;
  std::string str() const;
  static SeqDescriptor parse(const std::string& s);
};

// ---------------------------------------------------------------------------
// Variants

struct Multiplicative {
  cf::AlphaSpec alpha;
  Rat eps;
};
struct WeightedLog {
  cf::AlphaSpec alpha;
  Rat eps;
  Rat a;  // 0 < a < 1
};
struct Padic {
  Int p;
  Rat eps;
  Rat a;  // 0 <= a < 1
};
struct Lacunary {
  SeqDescriptor t;
  Rat M;
  Rat c;  // 0 < c < 1/10
};
struct Polynomial {
  SeqDescriptor t;
  Rat C;
  long n0 = 3;
};
struct Inhomogeneous {
  cf::AlphaSpec alpha;
  PsiSpec psi0, psi1, psi2;
  Rat eta;  // constant shift sequence eta_q = eta
  Rat eps;
};

class DangerSpec {
 public:
  using Variant =
      std::variant<Multiplicative, WeightedLog, Padic, Lacunary, Polynomial, Inhomogeneous>;

  DangerSpec(Variant v, bool relaxed = false);

  static DangerSpec parse(const std::string& s);
  std::string str() const;

  const Variant& variant() const { return v_; }
  bool relaxed() const { return relaxed_; }

  // First index at which the weights are defined and positive.
  long start_index() const;
  // Sieve threshold: eps for the eps-variants, c/(M ln M) style bound else.
  Rat eps() const;
  bool has_alpha() const;
  const cf::AlphaSpec& alpha() const;

 private:
  void validate() const;
  Variant v_;
  bool relaxed_ = false;
};

// ---------------------------------------------------------------------------
// Operations

// Sound enclosure of the variant's half-width at index x.
RealBounds radius(const DangerSpec& spec, long x, long prec = kDefaultPrec);

// Resolution level: 2^-l_x in [2 r, 4 r).  Throws TooCoarseError if r >= 1/4.
long level(const DangerSpec& spec, long x);

struct DangerInterval {
  Rat center;
  RealBounds radius;
  long index_x;
  Int index_y;
};

// The forbidden intervals E(x, y) clipped to [0,1]: centers y/x (or y/t_n,
// or (y - eta)/q).
std::vector<DangerInterval> intervals(const DangerSpec& spec, long x);

/// Everything the sieve needs for one index, with the canonical widened
/// radius fixed once per index.
struct StepContext {
  long x = 0;
  Int denom;       // denominator of the centers
  Int cden;        // scaled center denominator (denom * eta_den)
  Int cnum_step;   // center numerator = cnum_base + y * cnum_step
  Int cnum_base;
  long lx = 0;
  Int RM;              // kill radius = RM / 2^(lx + kGuardBits)
  RealBounds radius;   // tight enclosure of the true radius
  Int y_min, y_max;    // centers whose widened interval can meet [0,1]
};
StepContext make_step(const DangerSpec& spec, long x);

// Killed cell indices at level ctx.lx for center y, as a half-open range
// [b, e) clipped to [0, 2^lx); empty if the interval misses [0,1].
std::pair<Int, Int> killed_range(const StepContext& ctx, const Int& y);

// Merged killed ranges over all y (exhaustive use; index space 2^lx).
std::vector<std::pair<Int, Int>> covered_ranges(const StepContext& ctx);
// Merged killed ranges restricted to parents [plo, phi) at level ctx.lx.
std::vector<std::pair<Int, Int>> covered_ranges_near(const StepContext& ctx, const Int& plo,
                                                     const Int& phi);

// Reference kill test for one cell at level L >= ctx.lx (rational route).
bool cell_killed(const StepContext& ctx, const Int& cell, long L);

struct DyadicCoverA {
  long level = 0;
  struct Piece {
    Int b;
    int z;
  };
  std::vector<Piece> pieces;  // open intervals (b/2^l, (b+z)/2^l)
};

// Minimal union of open dyadic pieces covering E(x) at level l_x.
DyadicCoverA dyadic_cover(const DangerSpec& spec, long x);

}  // namespace litsieve::danger
