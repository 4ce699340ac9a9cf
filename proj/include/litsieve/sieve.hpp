#pragma once

#include <functional>
#include <string>
#include <vector>

#include "litsieve/danger.hpp"
#include "litsieve/digest.hpp"

namespace litsieve::sieve {

struct StarvationError : std::runtime_error {
  long first_kill_x;
  explicit StarvationError(long x)
      : std::runtime_error("sieve starved: search space exhausted, first killing index " +
                           std::to_string(x)),
        first_kill_x(x) {}
};

struct SieveConfig {
  danger::DangerSpec spec;
  long q0 = 2;
  enum class Mode { Exhaustive, Beam };
  Mode mode = Mode::Beam;
  long width = 1024;  // beam width
  enum class Admissibility { Strict, Relaxed };
  Admissibility admissibility = Admissibility::Relaxed;
  Int cell_cap = Int(1) << 24;  // exhaustive materialization cap

  std::string str() const;  // canonical fingerprint
  static SieveConfig parse(const std::string& s);
};

// --- admissibility -----------------------------------------------------------

struct AdmissReport {
  Rat eps;
  Rat fitted_C;            // empirical max of the Lemma-2-style sum over the grid
  std::vector<long> fit_grid;
  bool eps_ok = false;     // eps < 1 / (2^10 C)
  Rat q0_conservative_bound;  // (100/eps)^3
  bool q0_conservative_ok = false;
  Rat q0_literal_bound;    // (100 eps)^3, kept behind a flag
  bool q0_literal_ok = false;
  bool literal_suspicious = false;  // literal bound vacuous (< 1)
  bool dist_ok = false;    // ||q0 alpha|| >= 1/4
  long smallest_good_q0 = 0;
  Rat delta;               // rational lower bound for q ||q alpha||
  bool relaxed = false;
  bool pass = false;
  std::vector<std::string> warnings;
};

AdmissReport check_admissible(const SieveConfig& config);

// --- exhaustive mode -----------------------------------------------------------

struct BlockState {
  long k = 0;
  long Lk = 0;
  std::vector<Int> C;  // selected survivor cells at level Lk
  std::vector<Int> D;  // selected sub-family
  Int T;               // cell count of C
  Rat measure;         // exact survivor measure of B_{q_k}
};

struct SelectionReport {
  long k = 0;
  Int target_D, actual_D;
  Int target_C_next, actual_C_next;
  Int child_target;
  bool met = false;
};

struct SelectionOutcome {
  std::vector<Int> C_next;
  std::vector<Int> D;
  SelectionReport report;
};

// Children are thinned left-to-right (a survivor is kept when it is not
// lattice-adjacent to the previously kept one), so kept cells are separated
// by at least one cell width.
SelectionOutcome select_blocks(const BlockState& state, long L_next,
                               const std::vector<Int>& next_survivors, bool strict);

struct ExhaustiveResult {
  long q0 = 0, Q = 0;
  long level = 0;             // final common level
  std::vector<Int> cells;     // sorted survivor indices at `level`
  std::vector<Rat> measures;  // survivor measure after each processed x
  Rat cover_measure;          // exact measure of the union of all covers
  std::vector<BlockState> blocks;
  std::vector<SelectionReport> selections;
};

using Observer = std::function<void(long x, long level, const Int& count, const Rat& measure)>;

// Processes x = q0..Q keeping every surviving cell (materialized; guarded by
// config.cell_cap).  blocks_K >= 0 additionally maintains the block
// bookkeeping at q_k = q0^(3^k) for k = 0..blocks_K.
ExhaustiveResult run_exhaustive(const SieveConfig& config, long Q, long blocks_K = -1,
                                const Observer& obs = nullptr);

// --- beam mode -----------------------------------------------------------------

struct Certificate {
  std::string config;  // canonical fingerprint
  long q0 = 0, Q = 0;
  Int final_a;
  long final_l = 0;
  RealBounds min_product;
  Int min_product_arg;
  long backtracks = 0;
  std::string audit_digest;
  std::vector<std::pair<long, long>> kill_log;  // bounded: (x, cells killed)
};

Certificate run_beam(const SieveConfig& config, long Q);

struct BetaExtract {
  Dyadic beta;       // midpoint at the requested precision
  Int cell_a;
  long cell_l = 0;
  bool truncated = false;  // digits exceeded the certified cell level
};

BetaExtract extract_beta(const Certificate& cert, long digits);

// L_k = floor(log2(q_k^2 log2^2 q_k / (4 eps))), the block resolution.
long block_level(const Rat& eps, const Int& qk);

}  // namespace litsieve::sieve
