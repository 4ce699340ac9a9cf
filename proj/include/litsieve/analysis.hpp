#pragma once

#include <optional>
#include <string>
#include <vector>

#include "litsieve/cf.hpp"
#include "litsieve/danger.hpp"

namespace litsieve::analysis {

inline constexpr long kDeskBudgetQ = 128;  // direct sums cap q at 128 (~2e6 terms)

struct SumReport {
  Int q_or_m;
  RealBounds value;
  Int term_count;
  RealBounds max_term;
  // fitted-constant context, when the call participated in a fit
  std::optional<Rat> fitted_constant;
  std::vector<long> fit_grid;
};

// sum_{x=q}^{q^3} 1 / (||a x|| x log2^2 x)
SumReport lemma2_sum(const cf::AlphaSpec& alpha, long q, long prec = kDefaultPrec,
                     int workers = 1);

// sum_{x=1}^{m} 1 / (||a x|| x), with ratios to (ln m)^2 and (log2 m)^2
struct KnReport {
  Int m;
  RealBounds value;
  RealBounds ratio_ln;    // value / (ln m)^2
  RealBounds ratio_log2;  // value / (log2 m)^2
};
KnReport kn_partial_sum(const cf::AlphaSpec& alpha, long m, long prec = kDefaultPrec,
                        int workers = 1);

// Empirical C1(alpha): max over the grid of kn ratio (natural-log form).
struct FittedConstant {
  Rat value;  // upper enclosure of the max ratio
  std::vector<long> grid;
};
FittedConstant fit_kn_constant(const cf::AlphaSpec& alpha, const std::vector<long>& m_grid);

// Empirical C(alpha) of the Lemma-2-style sum over a q grid.
FittedConstant fit_lemma2_constant(const cf::AlphaSpec& alpha, const std::vector<long>& q_grid,
                                   int workers = 1);

// sum_{x=q}^{q^3} 1 / (||a x|| x (ln 1/||a x||)^a (ln x)^(2-a)), 0 < a < 1
SumReport lemma3_sum(const cf::AlphaSpec& alpha, long q, const Rat& a,
                     long prec = kDefaultPrec, int workers = 1);

// sum_{x=q}^{q^3} 1 / (x |x|_p (ln(2/|x|_p))^a (ln x)^(2-a)), 0 <= a < 1.
// Also returns the grouped-by-valuation decomposition: per j = v_p(x), the
// exact rational component sum of p^j / x, which must add up to the direct
// rational component exactly.
struct Lemma4Report {
  SumReport total;
  std::vector<Rat> rational_by_valuation;  // index j
  Rat rational_direct;
};
Lemma4Report lemma4_sum(const Int& p, long q, const Rat& a, long prec = kDefaultPrec,
                        int workers = 1);

// --- dimension lower bound ------------------------------------------------------

struct DimensionSchedule {
  // explicit sequences (index k = 1..K)
  struct Explicit {
    std::vector<Int> m;        // child counts, m_k >= 2
    std::vector<Rat> eps;      // separations, strictly decreasing
  };
  // symbolic Theorem-1 schedule evaluated in exponent space:
  // L_k = 3^k log2(q0) + log2(delta); m_k = 2^(L_{k+1}-L_k-5); eps_k = 2^-L_{k+1}
  struct Symbolic {
    Rat delta;
    long q0;
  };
  std::optional<Explicit> explicit_seq;
  std::optional<Symbolic> symbolic;

  static DimensionSchedule cantor();  // m_k = 2, eps_k = 3^-k
};

struct DimRow {
  long k;
  RealBounds r;  // log(m_1...m_{k-1}) / -log(m_k eps_k)
};

struct DimReport {
  std::vector<DimRow> rows;
  RealBounds liminf_estimate;  // infimum over the tail window
  long tail_start = 0;
  // symbolic mode: first k with r_k >= threshold and non-decreasing beyond
  std::optional<long> k_star;
};

DimReport dim_lower(const DimensionSchedule& schedule, long K,
                    const Rat& kstar_threshold = Rat(99, 100), long prec = kDefaultPrec);

// --- Theorem 8 hypothesis sum ----------------------------------------------------

struct Theorem8Report {
  std::vector<std::pair<long, RealBounds>> per_X;  // grid X -> double sum
  RealBounds sup;
  long arg_sup = 0;
  bool pass = false;            // sup <= 2^-6
  bool condition_iv_ok = false; // max_x psi0(x) psi2(x^(1-A)) <= eps
  RealBounds condition_iv_max;
  std::vector<std::string> notes;
};

Theorem8Report theorem8_check(const danger::PsiSpec& psi0, const danger::PsiSpec& psi1,
                              const danger::PsiSpec& psi2, const Rat& eps, const Rat& delta,
                              const Rat& A, const std::vector<long>& X_grid,
                              long prec = kDefaultPrec);

}  // namespace litsieve::analysis
