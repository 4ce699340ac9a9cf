#include <doctest.h>

#include <set>

#include "litsieve/danger.hpp"
#include "oracle_mpfr.hpp"

using namespace litsieve;
using danger::DangerSpec;

namespace {

// Frozen reference values (independent derivation, 28+ digits).
const char* kMultRadiusPhi4 = "3.2318633861540143557809247350550e-5";  // eps=2^-10, x=4
const char* kPadicRadius12 = "2.1613657480146993749490594409e-3";      // p=2, eps=1, a=0, x=12
const char* kLacunaryBase = "2.1714724095162591382556445946e-3";       // (1/20)/(10 ln 10)

DangerSpec mult_phi(const char* eps) {
  return DangerSpec::parse(std::string("mult:alpha=quadratic:P=-1,D=5,Q=2;eps=") + eps);
}

bool contains_dec(const RealBounds& b, const char* dec) {
  return test_oracle::contains_decimal(b.lo.to_rat(), b.hi.to_rat(), dec);
}

}  // namespace

TEST_SUITE_BEGIN("danger");

TEST_CASE("spec parsing round trips") {
  const char* forms[] = {
      "mult:alpha=quadratic:P=-1,D=5,Q=2;eps=2^-8",
      "mult:alpha=cf:0;1,(1);eps=2^-8",
      "wlog:alpha=quadratic:P=-1,D=5,Q=2;a=1/2;eps=2^-6",
      "padic:p=2;a=0;eps=2^-8",
      "padic:p=3;a=1/2;eps=2^-10",
      "lacunary:t=2^n;M=10;c=1/20",
      "poly:t=n^2;C=1/4;n0=3",
      "inhom:alpha=quadratic:P=-1,D=5,Q=2;psi0=k=1,s=1,t=2,log=log2x;"
      "psi1=k=1,s=1,t=0,log=none;psi2=k=1,s=1,t=0,log=none;eta=0;eps=2^-8",
  };
  for (const char* f : forms) {
    DangerSpec a = DangerSpec::parse(f);
    DangerSpec b = DangerSpec::parse(a.str());
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("spec domain validation") {
  CHECK_THROWS_AS(DangerSpec::parse("wlog:alpha=phi;a=2;eps=2^-8"), std::invalid_argument);
  CHECK_THROWS_AS(DangerSpec::parse("padic:p=4;a=0;eps=2^-8"), std::invalid_argument);
  CHECK_THROWS_AS(DangerSpec::parse("lacunary:t=2^n;M=10;c=1/2"), std::invalid_argument);
  CHECK_THROWS_AS(DangerSpec::parse("mult:alpha=phi;eps=0.5"), std::invalid_argument);
  DangerSpec relaxed = DangerSpec::parse("lacunary:t=2^n;M=10;c=1/2;relaxed=1");
  CHECK(relaxed.relaxed());
  CHECK_THROWS_AS(DangerSpec::parse("lacunary:t=2^n;M=1/2;c=1/20"), std::invalid_argument);
}

TEST_CASE("multiplicative radius at x=4") {
  DangerSpec spec = mult_phi("2^-10");
  RealBounds r = danger::radius(spec, 4);
  CHECK(contains_dec(r, kMultRadiusPhi4));
  // avoidance identity: r * ||4a|| * 16 * log2^2(4) encloses eps
  RealBounds d = cf::dist_nearest(spec.alpha(), Int(4), 80);
  RealBounds prod = r * d * RealBounds::exactly(Dyadic(64));
  CHECK(prod.contains(Rat(1, 1024)));
  CHECK_THROWS_AS(danger::radius(spec, 1), std::domain_error);
}

TEST_CASE("p-adic radius at x=12") {
  DangerSpec spec = DangerSpec::parse("padic:p=2;a=0;eps=1;relaxed=1");
  RealBounds r = danger::radius(spec, 12);
  CHECK(contains_dec(r, kPadicRadius12));
}

TEST_CASE("lacunary radius closed form") {
  DangerSpec spec = DangerSpec::parse("lacunary:t=2^n;M=10;c=1/20");
  for (long n : {1L, 3L, 7L}) {
    RealBounds r = danger::radius(spec, n);
    test_oracle::Real base(kLacunaryBase);
    test_oracle::Real expect = base / test_oracle::Real(Rat(Int(1) << n));
    CHECK(test_oracle::in_bounds(expect, r.lo.to_rat(), r.hi.to_rat()));
  }
}

TEST_CASE("level sandwich 2^-l in [2r, 4r)") {
  for (const char* f : {"mult:alpha=phi;eps=2^-10", "padic:p=2;a=0;eps=2^-6",
                        "lacunary:t=2^n;M=10;c=1/20", "poly:t=n^2;C=1/4;n0=3"}) {
    DangerSpec spec = DangerSpec::parse(f);
    for (long x = spec.start_index(); x < spec.start_index() + 6; ++x) {
      long l = danger::level(spec, x);
      RealBounds r = danger::radius(spec, x);
      Rat cell(Int(1), Int(1) << l);
      CHECK(cell >= 2 * r.lo.to_rat());  // 2^-l >= 2r
      CHECK(cell < 4 * r.hi.to_rat());   // 2^-l < 4r
    }
  }
}

TEST_CASE("level of the x=4 multiplicative example is 13") {
  CHECK(danger::level(mult_phi("2^-10"), 4) == 13);
}

TEST_CASE("floor rule at an exact radius boundary") {
  // r = 2^-m / 2 exactly: l = floor(log2(1/(2r))) = m; just above the
  // boundary the floor drops to m - 1.
  for (long m : {3L, 10L, 31L}) {
    Rat r(Int(1), Int(1) << (m + 1));
    CHECK(floor_log2(Rat(1) / (2 * r)) == m);
    Rat above = r * Rat(33, 32);
    CHECK(floor_log2(Rat(1) / (2 * above)) == m - 1);
  }
}

TEST_CASE("too coarse parameters are rejected") {
  DangerSpec spec = mult_phi("1");
  CHECK_THROWS_AS(danger::level(spec, 2), danger::TooCoarseError);
}

TEST_CASE("interval families") {
  auto iv = danger::intervals(mult_phi("2^-8"), 2);
  REQUIRE(iv.size() == 3);
  CHECK(iv[0].center == Rat(0));
  CHECK(iv[1].center == Rat(1, 2));
  CHECK(iv[2].center == Rat(1));

  auto lv = danger::intervals(DangerSpec::parse("lacunary:t=2^n;M=10;c=1/20"), 3);
  REQUIRE(lv.size() == 9);
  for (int k = 0; k < 9; ++k) {
    Rat want(k, 8);
    want.canonicalize();
    CHECK(lv[k].center == want);
  }
}

TEST_CASE("zero-shift inhomogeneous reproduces multiplicative radii") {
  DangerSpec mult = mult_phi("2^-8");
  DangerSpec inhom = DangerSpec::parse(
      "inhom:alpha=quadratic:P=-1,D=5,Q=2;psi0=k=1,s=1,t=2,log=log2x;"
      "psi1=k=1,s=1,t=0,log=none;psi2=k=1,s=1,t=0,log=none;eta=0;eps=2^-8");
  for (long x : {2L, 5L, 11L, 32L}) {
    RealBounds rm = danger::radius(mult, x);
    RealBounds ri = danger::radius(inhom, x);
    // same real value: enclosures must overlap
    CHECK(cmp(rm.lo, ri.hi) <= 0);
    CHECK(cmp(ri.lo, rm.hi) <= 0);
    CHECK(danger::level(mult, x) == danger::level(inhom, x));
    auto a = danger::intervals(mult, x);
    auto b = danger::intervals(inhom, x);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].center == b[i].center);
  }
}

TEST_CASE("kill geometry: interior, boundary, clipping") {
  // Synthetic context at level 8, centers y/10, kill radius 3/2^(8+G).
  danger::StepContext ctx;
  ctx.x = 10;
  ctx.denom = 10;
  ctx.cden = 10;
  ctx.cnum_step = 1;
  ctx.cnum_base = 0;
  ctx.lx = 8;
  ctx.RM = 3;
  ctx.y_min = 0;
  ctx.y_max = 10;

  // y=1: center 1/10 -> cell 25.6: interior, one cell killed (z=1)
  auto [b1, e1] = danger::killed_range(ctx, Int(1));
  CHECK(b1 == 25);
  CHECK(e1 == 26);
  // y=5: center 1/2 -> exactly cell boundary 128: two cells killed (z=2)
  auto [b5, e5] = danger::killed_range(ctx, Int(5));
  CHECK(b5 == 127);
  CHECK(e5 == 129);
  // y=0: center 0: clipped at the left edge
  auto [b0, e0] = danger::killed_range(ctx, Int(0));
  CHECK(b0 == 0);
  CHECK(e0 == 1);
  // fat radius R = one full cell: spans at least two cells
  ctx.RM = Int(1) << 32;
  auto [bc, ec] = danger::killed_range(ctx, Int(1));
  CHECK(ec - bc >= 2);
}

TEST_CASE("cover is sound and minimal on the x=4 instance") {
  DangerSpec spec = mult_phi("2^-4");
  long x = 4;
  auto ctx = danger::make_step(spec, x);
  auto cover = danger::dyadic_cover(spec, x);
  CHECK(cover.level == ctx.lx);
  for (const auto& p : cover.pieces) {
    CHECK(p.z >= 1);
    CHECK(p.z <= 2);
  }

  // Soundness: center and both widened endpoints of every interval lie
  // strictly inside some open piece.
  Rat R(ctx.RM, Int(1) << (ctx.lx + danger::kGuardBits));
  for (Int y = 0; y <= ctx.denom; ++y) {
    Rat c(y, ctx.denom);
    c.canonicalize();
    Rat clo = c - R, chi = c + R;
    for (Rat pt : {clo, c, chi}) {
      if (pt < 0 || pt > 1) continue;
      bool inside = false;
      for (const auto& p : cover.pieces) {
        Rat lo(p.b, Int(1) << ctx.lx), hi(p.b + p.z, Int(1) << ctx.lx);
        if (lo < pt && pt < hi) inside = true;
      }
      CHECK(inside);
    }
  }

  // Minimality oracle: each E(x,y) here is isolated (spacing 32 cells) and
  // centered on a lattice point, so the optimal cover uses exactly one piece
  // per center inside [0,1].
  CHECK(cover.pieces.size() == 5);
}

TEST_CASE("cell_killed matches covered_ranges on a toy instance") {
  DangerSpec spec = mult_phi("2^-4");
  for (long x = 4; x <= 9; ++x) {
    auto ctx = danger::make_step(spec, x);
    auto ranges = danger::covered_ranges(ctx);
    std::set<long> killed;
    for (auto& [b, e] : ranges)
      for (Int i = b; i < e; ++i) killed.insert(i.get_si());
    Int cells = Int(1) << ctx.lx;
    for (Int i = 0; i < cells; ++i) {
      bool k1 = danger::cell_killed(ctx, i, ctx.lx);
      CHECK(k1 == (killed.count(i.get_si()) > 0));
    }
    for (Int i = 0; i < cells * 2; ++i) {
      bool k2 = danger::cell_killed(ctx, i, ctx.lx + 1);
      Int parent = i >> 1;
      CHECK(k2 == (killed.count(parent.get_si()) > 0));
    }
  }
}

TEST_CASE("avoidance identity for points outside the cover") {
  DangerSpec spec = mult_phi("2^-4");
  long x = 7;
  auto ctx = danger::make_step(spec, x);
  auto ranges = danger::covered_ranges(ctx);
  std::set<long> killed;
  for (auto& [b, e] : ranges)
    for (Int i = b; i < e; ++i) killed.insert(i.get_si());
  RealBounds d = cf::dist_nearest(spec.alpha(), Int(x), 80);
  RealBounds lg = log2_bounds(Rat(x), 80);
  Int cells = Int(1) << ctx.lx;
  int tested = 0;
  for (Int i = 0; i < cells; ++i) {
    if (killed.count(i.get_si())) continue;
    Rat beta(2 * i + 1, cells * 2);  // cell midpoint, avoids every E(x,y)
    Rat xb = Rat(x) * beta;
    Int n;
    mpz_fdiv_q(n.get_mpz_t(), xb.get_num().get_mpz_t(), xb.get_den().get_mpz_t());
    Rat f = xb - Rat(n);
    Rat g = Rat(1) - f;
    Rat dist_b = std::min(f, g);
    // x * ||x b|| * ||x a|| * log2^2 x >= eps (up to enclosure slack)
    Rat lhs = Rat(x) * dist_b * d.lo.to_rat() * lg.lo.to_rat() * lg.lo.to_rat();
    CHECK(lhs >= Rat(1, 16) * Rat(1023, 1024));
    ++tested;
  }
  CHECK(tested > 0);
}

TEST_SUITE_END();
