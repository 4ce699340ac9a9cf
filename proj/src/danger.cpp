#include "litsieve/danger.hpp"

#include <algorithm>
#include <sstream>

namespace litsieve::danger {

namespace {

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

// Split "k1=v1;k2=v2;..." re-joining fragments without '=' into the previous
// value (alpha words like "cf:0;1,(1)" contain semicolons).
std::vector<std::pair<std::string, std::string>> split_fields(const std::string& body) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& frag : split(body, ';')) {
    auto eq = frag.find('=');
    if (eq == std::string::npos) {
      if (out.empty())
        throw std::invalid_argument("DangerSpec: dangling fragment '" + frag + "'");
      out.back().second += ';' + frag;
    } else {
      out.emplace_back(frag.substr(0, eq), frag.substr(eq + 1));
    }
  }
  return out;
}

Rat parse_eps(const std::string& s) {
  Dyadic d = parse_dyadic_string(s);  // decimal eps is rejected here
  if (d.sign() <= 0) throw std::invalid_argument("eps must be positive");
  return d.to_rat();
}

std::string eps_str(const Rat& eps) {
  // eps is dyadic by construction
  Int num = eps.get_num(), den = eps.get_den();
  if (num == 1 && is_power_of_two(den)) return "2^-" + std::to_string(floor_log2(den));
  if (den == 1 && is_power_of_two(num)) return "2^" + std::to_string(floor_log2(num));
  return num.get_str() + "/2^" + std::to_string(floor_log2(den));
}

bool is_prime(const Int& p) {
  return p > 1 && mpz_probab_prime_p(p.get_mpz_t(), 40) != 0;
}

}  // namespace

// --- PsiSpec -----------------------------------------------------------------

namespace {

// Enclosure of the log factor over a positive interval; monotone per kind.
RealBounds psi_log_factor(PsiSpec::LogKind kind, const RealBounds& x, long prec) {
  switch (kind) {
    case PsiSpec::LogKind::None:
      return RealBounds::exactly(Dyadic(1));
    case PsiSpec::LogKind::LnX:
      return ln_bounds(x, prec);
    case PsiSpec::LogKind::Log2X:
      return log2_bounds(x, prec);
    case PsiSpec::LogKind::LnEPlusX: {
      RealBounds arg = e_bounds(prec + 4) + x;
      return ln_bounds(arg, prec);
    }
    case PsiSpec::LogKind::LnOneOverX: {
      RealBounds inv = rb_recip(x, prec + 8);
      return ln_bounds(inv, prec);
    }
    case PsiSpec::LogKind::LnEOverX: {
      RealBounds ratio = rb_div(e_bounds(prec + 4), x, prec + 8);
      return ln_bounds(ratio, prec);
    }
  }
  throw std::logic_error("psi_log_factor: bad kind");
}

// [lo^t, hi^t] allowing lo == 0 (t > 0).
RealBounds pow_allow_zero(const RealBounds& b, const Rat& t, long prec) {
  if (t == 0) return RealBounds::exactly(Dyadic(1));
  if (b.lo.sign() < 0) throw std::domain_error("psi: negative log factor");
  if (b.lo.sign() == 0) {
    RealBounds hi = b.hi.sign() == 0 ? RealBounds::exactly(Dyadic(0))
                                     : pow_bounds(b.hi.to_rat(), t, prec);
    return {Dyadic(0), hi.hi};
  }
  return pow_bounds(b, t, prec);
}

}  // namespace

RealBounds PsiSpec::eval(const RealBounds& x, long prec) const {
  if (x.lo.sign() < 0) throw std::domain_error("psi: negative argument");
  if (x.hi.sign() == 0) return RealBounds::exactly(Dyadic(0));  // psi(0) = 0
  RealBounds xs = x.lo.sign() == 0
                      ? RealBounds(Dyadic(0), pow_bounds(x.hi.to_rat(), s, prec).hi)
                      : pow_bounds(x, s, prec);
  RealBounds r = kappa * xs;
  if (t != 0) {
    RealBounds xa = x.lo.sign() == 0 ? RealBounds(x.hi, x.hi) : x;
    RealBounds lf = psi_log_factor(logkind, xa, prec);
    r = r * pow_allow_zero(lf, t, prec);
    if (x.lo.sign() == 0) r.lo = Dyadic(0);
  }
  return r;
}

RealBounds PsiSpec::eval(const Rat& x, long prec) const {
  return eval(RealBounds::of_rat(x, prec + 8), prec);
}

RealBounds PsiSpec::inverse(const RealBounds& v, long prec) const {
  if (v.lo.sign() <= 0) throw std::domain_error("psi inverse: target must be positive");
  if (is_identity()) return v;
  if (is_pure_power()) {
    // (v / kappa)^(1/s)
    Rat inv_s = Rat(s.get_den(), s.get_num());
    Rat k_inv = Rat(1) / kappa;
    RealBounds scaled = k_inv * v;
    return pow_bounds(scaled, inv_s, prec);
  }
  // Monotone bisection on the increasing branch through 0.
  long p = prec + 16;
  Dyadic xl(0);
  Dyadic xh(Int(1), 8);
  for (int grow = 0;; ++grow) {
    RealBounds fx = eval(RealBounds::exactly(xh), p);
    if (cmp(fx.lo, v.hi) >= 0) break;
    xh = mul_pow2(xh, 1);
    if (grow >= 200) throw std::runtime_error("psi inverse: target beyond range");
  }
  for (int it = 0; it < 4 * static_cast<int>(prec) + 64; ++it) {
    if (cmp(xh - xl, Dyadic(Int(1), prec)) <= 0 && xl.sign() > 0) break;
    Dyadic mid = mul_pow2(xl + xh, -1);
    RealBounds fm = eval(RealBounds::exactly(mid), p);
    if (cmp(fm.hi, v.lo) <= 0) {
      xl = mid;
    } else if (cmp(fm.lo, v.hi) >= 0) {
      xh = mid;
    } else {
      p *= 2;  // comparison undecided; tighten
      if (p > kMaxPrec) break;
    }
  }
  return {xl, xh};
}

std::string PsiSpec::str() const {
  std::string lk;
  switch (logkind) {
    case LogKind::None: lk = "none"; break;
    case LogKind::LnX: lk = "lnx"; break;
    case LogKind::Log2X: lk = "log2x"; break;
    case LogKind::LnEPlusX: lk = "ln_e_plus_x"; break;
    case LogKind::LnOneOverX: lk = "ln_1_over_x"; break;
    case LogKind::LnEOverX: lk = "ln_e_over_x"; break;
  }
  return "k=" + rat_str(kappa) + ",s=" + rat_str(s) + ",t=" + rat_str(t) + ",log=" + lk;
}

PsiSpec PsiSpec::parse(const std::string& s) {
  if (s == "identity" || s == "id") return identity();
  PsiSpec p;
  for (const auto& kv : split(s, ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("PsiSpec: bad field '" + kv + "'");
    std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k == "k" || k == "kappa")
      p.kappa = parse_rat(v);
    else if (k == "s")
      p.s = parse_rat(v);
    else if (k == "t")
      p.t = parse_rat(v);
    else if (k == "log") {
      if (v == "none") p.logkind = LogKind::None;
      else if (v == "lnx") p.logkind = LogKind::LnX;
      else if (v == "log2x") p.logkind = LogKind::Log2X;
      else if (v == "ln_e_plus_x") p.logkind = LogKind::LnEPlusX;
      else if (v == "ln_1_over_x") p.logkind = LogKind::LnOneOverX;
      else if (v == "ln_e_over_x") p.logkind = LogKind::LnEOverX;
      else throw std::invalid_argument("PsiSpec: unknown log kind '" + v + "'");
    } else {
      throw std::invalid_argument("PsiSpec: unknown field '" + k + "'");
    }
  }
  if (sgn(p.kappa) <= 0 || sgn(p.s) < 0)
    throw std::invalid_argument("PsiSpec: kappa > 0 and s >= 0 required");
  return p;
}

// --- SeqDescriptor -----------------------------------------------------------

Int SeqDescriptor::value(long n) const {
  if (n < 1) throw std::domain_error("SeqDescriptor: n must be >= 1");
  Int r;
  if (kind == Kind::Geometric) {
    mpz_pow_ui(r.get_mpz_t(), param.get_mpz_t(), static_cast<unsigned long>(n));
  } else {
    Int base(n);
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), param.get_ui());
  }
  return r;
}

std::string SeqDescriptor::str() const {
  if (kind == Kind::Geometric) return param.get_str() + "^n";
  return "n^" + param.get_str();
}

SeqDescriptor SeqDescriptor::parse(const std::string& s) {
  auto caret = s.find('^');
  if (caret == std::string::npos || caret == 0 || caret + 1 >= s.size())
    throw std::invalid_argument("SeqDescriptor: expected 'b^n' or 'n^g', got '" + s + "'");
  std::string head = s.substr(0, caret), tail = s.substr(caret + 1);
  SeqDescriptor d;
  if (tail == "n") {
    d.kind = Kind::Geometric;
    d.param = Int(head);
    if (d.param < 2) throw std::invalid_argument("SeqDescriptor: geometric base must be >= 2");
  } else if (head == "n") {
    d.kind = Kind::Power;
    d.param = Int(tail);
    if (d.param < 1) throw std::invalid_argument("SeqDescriptor: power must be >= 1");
  } else {
    throw std::invalid_argument("SeqDescriptor: expected 'b^n' or 'n^g', got '" + s + "'");
  }
  return d;
}

// --- DangerSpec --------------------------------------------------------------

DangerSpec::DangerSpec(Variant v, bool relaxed) : v_(std::move(v)), relaxed_(relaxed) {
  validate();
}

void DangerSpec::validate() const {
  auto domain_check = [&](bool ok, const char* what) {
    if (!ok && !relaxed_)
      throw std::invalid_argument(std::string("DangerSpec: ") + what +
                                  " (pass relaxed=1 to override)");
  };
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Multiplicative>) {
          domain_check(sgn(spec.eps) > 0, "eps must be positive");
        } else if constexpr (std::is_same_v<T, WeightedLog>) {
          domain_check(sgn(spec.eps) > 0, "eps must be positive");
          domain_check(spec.a > 0 && spec.a < 1, "a must satisfy 0 < a < 1");
        } else if constexpr (std::is_same_v<T, Padic>) {
          if (!is_prime(spec.p)) throw std::invalid_argument("DangerSpec: p must be prime");
          domain_check(sgn(spec.eps) > 0, "eps must be positive");
          domain_check(spec.a >= 0 && spec.a < 1, "a must satisfy 0 <= a < 1");
        } else if constexpr (std::is_same_v<T, Lacunary>) {
          domain_check(spec.c > 0 && spec.c < Rat(1, 10), "c must satisfy 0 < c < 1/10");
          domain_check(sgn(spec.M) > 0, "M must be positive");
          domain_check(spec.t.kind == SeqDescriptor::Kind::Geometric,
                       "lacunary t must be geometric");
          if (spec.t.kind == SeqDescriptor::Kind::Geometric)
            domain_check(Rat(spec.t.param) > 1 + Rat(1) / spec.M,
                         "sequence not lacunary for this M");
        } else if constexpr (std::is_same_v<T, Polynomial>) {
          domain_check(sgn(spec.C) > 0, "C must be positive");
          domain_check(spec.t.kind == SeqDescriptor::Kind::Power, "polynomial t must be n^g");
        } else if constexpr (std::is_same_v<T, Inhomogeneous>) {
          domain_check(sgn(spec.eps) > 0, "eps must be positive");
        }
      },
      v_);
}

long DangerSpec::start_index() const {
  return std::visit(
      [](const auto& spec) -> long {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Lacunary>) return 1;
        else if constexpr (std::is_same_v<T, Polynomial>) return std::max(spec.n0, 3L);
        else return 2;
      },
      v_);
}

Rat DangerSpec::eps() const {
  return std::visit(
      [](const auto& spec) -> Rat {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Lacunary> || std::is_same_v<T, Polynomial>)
          return Rat(0);
        else
          return spec.eps;
      },
      v_);
}

bool DangerSpec::has_alpha() const {
  return std::holds_alternative<Multiplicative>(v_) || std::holds_alternative<WeightedLog>(v_) ||
         std::holds_alternative<Inhomogeneous>(v_);
}

const cf::AlphaSpec& DangerSpec::alpha() const {
  if (const auto* m = std::get_if<Multiplicative>(&v_)) return m->alpha;
  if (const auto* w = std::get_if<WeightedLog>(&v_)) return w->alpha;
  if (const auto* i = std::get_if<Inhomogeneous>(&v_)) return i->alpha;
  throw std::logic_error("DangerSpec: variant has no alpha");
}

DangerSpec DangerSpec::parse(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("DangerSpec: missing variant prefix in '" + s + "'");
  std::string kind = s.substr(0, colon);
  auto fields = split_fields(s.substr(colon + 1));
  auto get = [&](const char* key) -> std::string {
    for (const auto& [k, v] : fields)
      if (k == key) return v;
    throw std::invalid_argument(std::string("DangerSpec: missing field '") + key + "'");
  };
  auto get_opt = [&](const char* key, const std::string& dflt) -> std::string {
    for (const auto& [k, v] : fields)
      if (k == key) return v;
    return dflt;
  };
  bool relaxed = get_opt("relaxed", "0") == "1";

  if (kind == "mult")
    return DangerSpec(Multiplicative{cf::AlphaSpec::parse(get("alpha")), parse_eps(get("eps"))},
                      relaxed);
  if (kind == "wlog")
    return DangerSpec(WeightedLog{cf::AlphaSpec::parse(get("alpha")), parse_eps(get("eps")),
                                  parse_rat(get("a"))},
                      relaxed);
  if (kind == "padic")
    return DangerSpec(Padic{Int(get("p")), parse_eps(get("eps")), parse_rat(get_opt("a", "0"))},
                      relaxed);
  if (kind == "lacunary")
    return DangerSpec(
        Lacunary{SeqDescriptor::parse(get("t")), parse_rat(get("M")), parse_rat(get("c"))},
        relaxed);
  if (kind == "poly")
    return DangerSpec(Polynomial{SeqDescriptor::parse(get("t")), parse_rat(get("C")),
                                 std::stol(get_opt("n0", "3"))},
                      relaxed);
  if (kind == "inhom")
    return DangerSpec(Inhomogeneous{cf::AlphaSpec::parse(get("alpha")),
                                    PsiSpec::parse(get("psi0")), PsiSpec::parse(get("psi1")),
                                    PsiSpec::parse(get("psi2")), parse_rat(get_opt("eta", "0")),
                                    parse_eps(get("eps"))},
                      relaxed);
  throw std::invalid_argument("DangerSpec: unknown variant '" + kind + "'");
}

std::string DangerSpec::str() const {
  std::string out = std::visit(
      [](const auto& spec) -> std::string {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Multiplicative>)
          return "mult:alpha=" + spec.alpha.str() + ";eps=" + eps_str(spec.eps);
        else if constexpr (std::is_same_v<T, WeightedLog>)
          return "wlog:alpha=" + spec.alpha.str() + ";a=" + rat_str(spec.a) +
                 ";eps=" + eps_str(spec.eps);
        else if constexpr (std::is_same_v<T, Padic>)
          return "padic:p=" + spec.p.get_str() + ";a=" + rat_str(spec.a) +
                 ";eps=" + eps_str(spec.eps);
        else if constexpr (std::is_same_v<T, Lacunary>)
          return "lacunary:t=" + spec.t.str() + ";M=" + rat_str(spec.M) +
                 ";c=" + rat_str(spec.c);
        else if constexpr (std::is_same_v<T, Polynomial>)
          return "poly:t=" + spec.t.str() + ";C=" + rat_str(spec.C) +
                 ";n0=" + std::to_string(spec.n0);
        else
          return "inhom:alpha=" + spec.alpha.str() + ";psi0=" + spec.psi0.str() +
                 ";psi1=" + spec.psi1.str() + ";psi2=" + spec.psi2.str() +
                 ";eta=" + rat_str(spec.eta) + ";eps=" + eps_str(spec.eps);
      },
      v_);
  if (relaxed_) out += ";relaxed=1";
  return out;
}

// --- radius ------------------------------------------------------------------

namespace {

RealBounds radius_at(const DangerSpec& spec, long x, long prec) {
  const long p = prec;
  return std::visit(
      [&](const auto& sp) -> RealBounds {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, Multiplicative>) {
          RealBounds d = cf::dist_nearest(sp.alpha, Int(x), p + 2 * bitlength(Int(x)) + 8);
          RealBounds L = log2_bounds(Rat(x), p);
          RealBounds W = d * RealBounds::of_rat(Rat(x) * Rat(x), 4) * (L * L);
          return rb_div(RealBounds::of_rat(sp.eps, p + 8), W, p + 2 * bitlength(Int(x)) + 16);
        } else if constexpr (std::is_same_v<T, WeightedLog>) {
          RealBounds d = cf::dist_nearest(sp.alpha, Int(x), p + 2 * bitlength(Int(x)) + 8);
          RealBounds L = log2_bounds(Rat(x), p);
          RealBounds lg = pow_bounds(L, Rat(2) - sp.a, p);
          RealBounds li = pow_bounds(ln_bounds(rb_recip(d, p + 8), p), sp.a, p);
          RealBounds W = d * RealBounds::of_rat(Rat(x) * Rat(x), 4) * lg * li;
          return rb_div(RealBounds::of_rat(sp.eps, p + 8), W, p + 2 * bitlength(Int(x)) + 16);
        } else if constexpr (std::is_same_v<T, Padic>) {
          Int xr, pv;
          unsigned long v = mpz_remove(xr.get_mpz_t(), Int(x).get_mpz_t(), sp.p.get_mpz_t());
          mpz_pow_ui(pv.get_mpz_t(), sp.p.get_mpz_t(), v);
          Rat absp(Int(1), pv);
          RealBounds L = log2_bounds(Rat(x), p);
          RealBounds lg = pow_bounds(L, Rat(2) - sp.a, p);
          RealBounds la = pow_bounds(ln_bounds(Rat(2) / absp, p), sp.a, p);
          RealBounds W = RealBounds::of_rat(absp * Rat(x) * Rat(x), p + 4) * lg * la;
          return rb_div(RealBounds::of_rat(sp.eps, p + 8), W, p + 2 * bitlength(Int(x)) + 16);
        } else if constexpr (std::is_same_v<T, Lacunary>) {
          Int tn = sp.t.value(x);
          RealBounds lnM = ln_bounds(sp.M, p);
          RealBounds W = RealBounds::of_rat(sp.M * Rat(tn) / sp.c, p + 4) * lnM;
          return rb_recip(W, p + 2 * bitlength(tn) + 16);
        } else if constexpr (std::is_same_v<T, Polynomial>) {
          Int tn = sp.t.value(x);
          RealBounds lnn = ln_bounds(Rat(x), p);
          RealBounds W = RealBounds::of_rat(Rat(x) * Rat(tn) / sp.C, p + 4) * lnn;
          return rb_recip(W, p + 2 * bitlength(tn) + 16);
        } else {  // Inhomogeneous
          RealBounds d = cf::dist_nearest(sp.alpha, Int(x), p + 2 * bitlength(Int(x)) + 8);
          RealBounds p0 = sp.psi0.eval(Rat(x), p);
          RealBounds p1 = sp.psi1.eval(d, p);
          RealBounds arg = rb_div(RealBounds::of_rat(sp.eps, p + 8), p0 * p1,
                                  p + 2 * bitlength(Int(x)) + 24);
          RealBounds inv = sp.psi2.inverse(arg, p + bitlength(Int(x)) + 16);
          return rb_div(inv, RealBounds::exactly(Dyadic(Int(x))),
                        p + 2 * bitlength(Int(x)) + 16);
        }
      },
      spec.variant());
}

// Canonical deterministic escalation: the first precision in 64, 128, ...
// at which the radius enclosure is relatively tight.
RealBounds radius_tight(const DangerSpec& spec, long x) {
  for (long p = kDefaultPrec;; p *= 2) {
    RealBounds r = radius_at(spec, x, p);
    if (r.lo.sign() > 0) {
      Dyadic w = r.width();
      if (cmp(mul_pow2(w, 40), r.lo) <= 0) return r;  // w <= r.lo * 2^-40
    }
    if (p > kMaxPrec) throw std::runtime_error("radius: relative tightening failed");
  }
}

}  // namespace

RealBounds radius(const DangerSpec& spec, long x, long prec) {
  if (x < spec.start_index())
    throw std::domain_error("radius: index below variant start (weights vanish)");
  RealBounds r = radius_tight(spec, x);
  for (long p = kDefaultPrec; cmp(r.width(), Dyadic(Int(1), prec)) > 0;) {
    p *= 2;
    if (p > kMaxPrec) throw std::runtime_error("radius: escalation failed");
    r = radius_at(spec, x, p);
  }
  return r;
}

long level(const DangerSpec& spec, long x) {
  if (x < spec.start_index())
    throw std::domain_error("level: index below variant start");
  RealBounds r = radius_tight(spec, x);
  if (cmp(r.hi, Dyadic(Int(1), 2)) >= 0) throw TooCoarseError(x);
  long flo = floor_log2(Rat(1) / (2 * r.hi.to_rat()));
  long fhi = floor_log2(Rat(1) / (2 * r.lo.to_rat()));
  if (flo == fhi) return flo;
  for (long p = 2 * kDefaultPrec; p <= kMaxPrec; p *= 2) {
    RealBounds rr = radius_at(spec, x, p);
    flo = floor_log2(Rat(1) / (2 * rr.hi.to_rat()));
    fhi = floor_log2(Rat(1) / (2 * rr.lo.to_rat()));
    if (flo == fhi) return flo;
  }
  throw std::runtime_error("level: resolution undecided at maximum precision");
}

// --- step context and kill geometry ------------------------------------------

StepContext make_step(const DangerSpec& spec, long x) {
  StepContext ctx;
  ctx.x = x;
  ctx.lx = level(spec, x);  // throws TooCoarseError when r >= 1/4
  ctx.radius = radius_tight(spec, x);

  std::visit(
      [&](const auto& sp) {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, Lacunary> || std::is_same_v<T, Polynomial>) {
          ctx.denom = sp.t.value(x);
          ctx.cden = ctx.denom;
          ctx.cnum_step = 1;
          ctx.cnum_base = 0;
        } else if constexpr (std::is_same_v<T, Inhomogeneous>) {
          ctx.denom = x;
          ctx.cden = ctx.denom * sp.eta.get_den();
          ctx.cnum_step = sp.eta.get_den();
          ctx.cnum_base = -sp.eta.get_num();
        } else {
          ctx.denom = x;
          ctx.cden = ctx.denom;
          ctx.cnum_step = 1;
          ctx.cnum_base = 0;
        }
      },
      spec.variant());

  // Canonical widened kill radius RM / 2^(lx + G).
  ctx.RM = ceil_int(mul_pow2(ctx.radius.hi, ctx.lx + kGuardBits)) + 1;

  // Center index range whose widened interval can meet [0,1].
  Int S = ctx.cnum_step << (ctx.lx + kGuardBits);
  Int baseS = ctx.cnum_base << (ctx.lx + kGuardBits);
  Int RMc = ctx.RM * ctx.cden;
  Int lo_num = -RMc - baseS;
  Int hi_num = (ctx.cden << (ctx.lx + kGuardBits)) + RMc - baseS;
  mpz_cdiv_q(ctx.y_min.get_mpz_t(), lo_num.get_mpz_t(), S.get_mpz_t());
  mpz_fdiv_q(ctx.y_max.get_mpz_t(), hi_num.get_mpz_t(), S.get_mpz_t());
  return ctx;
}

namespace {

// Unclipped open piece (b, e) at level lx covering the widened E(x,y).
std::pair<Int, Int> raw_piece(const StepContext& ctx, const Int& y) {
  Int num = ctx.cnum_base + y * ctx.cnum_step;
  Int scaled = num << (ctx.lx + kGuardBits);
  Int RMc = ctx.RM * ctx.cden;
  Int Dden = ctx.cden << kGuardBits;
  Int Nlo = scaled - RMc, Nhi = scaled + RMc;
  Int b, e, r;
  mpz_fdiv_qr(b.get_mpz_t(), r.get_mpz_t(), Nlo.get_mpz_t(), Dden.get_mpz_t());
  if (r == 0) b -= 1;  // open piece must cover the closed endpoint
  mpz_cdiv_qr(e.get_mpz_t(), r.get_mpz_t(), Nhi.get_mpz_t(), Dden.get_mpz_t());
  if (r == 0) e += 1;
  return {b, e};
}

std::vector<std::pair<Int, Int>> merge_ranges(std::vector<std::pair<Int, Int>> rs) {
  std::sort(rs.begin(), rs.end());
  std::vector<std::pair<Int, Int>> out;
  for (auto& r : rs) {
    if (r.first >= r.second) continue;
    if (!out.empty() && r.first <= out.back().second)
      out.back().second = std::max(out.back().second, r.second);
    else
      out.push_back(r);
  }
  return out;
}

}  // namespace

std::pair<Int, Int> killed_range(const StepContext& ctx, const Int& y) {
  auto [b, e] = raw_piece(ctx, y);
  Int cells = Int(1) << ctx.lx;
  if (b < 0) b = 0;
  if (e > cells) e = cells;
  if (b >= e) return {Int(0), Int(0)};
  return {b, e};
}

std::vector<std::pair<Int, Int>> covered_ranges_near(const StepContext& ctx, const Int& plo,
                                                     const Int& phi) {
  Int S = ctx.cnum_step << (ctx.lx + kGuardBits);
  Int baseS = ctx.cnum_base << (ctx.lx + kGuardBits);
  Int RMc = ctx.RM * ctx.cden;
  Int DdenG = ctx.cden << kGuardBits;
  Int lo_num = (plo - 1) * DdenG - RMc - baseS;
  Int hi_num = (phi + 1) * DdenG + RMc - baseS;
  Int ylo, yhi;
  mpz_fdiv_q(ylo.get_mpz_t(), lo_num.get_mpz_t(), S.get_mpz_t());
  mpz_cdiv_q(yhi.get_mpz_t(), hi_num.get_mpz_t(), S.get_mpz_t());
  ylo = std::max(ylo, ctx.y_min);
  yhi = std::min(yhi, ctx.y_max);
  std::vector<std::pair<Int, Int>> rs;
  for (Int y = ylo; y <= yhi; ++y) {
    auto [b, e] = killed_range(ctx, y);
    if (b < e) {
      b = std::max(b, plo);
      e = std::min(e, phi);
      if (b < e) rs.emplace_back(b, e);
    }
  }
  return merge_ranges(std::move(rs));
}

std::vector<std::pair<Int, Int>> covered_ranges(const StepContext& ctx) {
  std::vector<std::pair<Int, Int>> rs;
  for (Int y = ctx.y_min; y <= ctx.y_max; ++y) {
    auto [b, e] = killed_range(ctx, y);
    if (b < e) rs.emplace_back(b, e);
  }
  return merge_ranges(std::move(rs));
}

bool cell_killed(const StepContext& ctx, const Int& cell, long L) {
  if (L < ctx.lx) throw std::logic_error("cell_killed: cell coarser than step level");
  Int parent = cell >> (L - ctx.lx);
  auto rs = covered_ranges_near(ctx, parent, parent + 1);
  return !rs.empty();
}

// --- reporting ops -------------------------------------------------------------

std::vector<DangerInterval> intervals(const DangerSpec& spec, long x) {
  StepContext ctx = make_step(spec, x);
  std::vector<DangerInterval> out;
  Rat rhi = ctx.radius.hi.to_rat();
  for (Int y = 0; y <= ctx.denom; ++y) {
    Rat center(ctx.cnum_base + y * ctx.cnum_step, ctx.cden);
    center.canonicalize();
    if (center + rhi < 0 || center - rhi > 1) continue;  // clipped away entirely
    out.push_back(DangerInterval{center, ctx.radius, x, y});
  }
  return out;
}

DyadicCoverA dyadic_cover(const DangerSpec& spec, long x) {
  StepContext ctx = make_step(spec, x);
  DyadicCoverA cover;
  cover.level = ctx.lx;
  Int cells = Int(1) << ctx.lx;
  std::vector<std::pair<Int, Int>> pieces;
  for (Int y = ctx.y_min; y <= ctx.y_max; ++y) {
    auto [b, e] = raw_piece(ctx, y);
    if (e <= 0 || b >= cells) continue;  // kills nothing inside [0,1]
    pieces.emplace_back(b, e);
  }
  std::sort(pieces.begin(), pieces.end());
  for (auto& [b, e] : pieces) {
    if (!cover.pieces.empty()) {
      Int pb = cover.pieces.back().b;
      Int pe = pb + cover.pieces.back().z;
      if (b >= pb && e <= pe) continue;  // contained in the previous piece
    }
    cover.pieces.push_back({b, static_cast<int>(Int(e - b).get_si())});
  }
  return cover;
}

}  // namespace litsieve::danger
