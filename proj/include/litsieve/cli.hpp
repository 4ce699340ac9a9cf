#pragma once

#include <string>
#include <vector>

namespace litsieve::cli {

/// Parsed command line in canonical text form; parse(render(c)) == c.
struct RunConfig {
  std::string command;     // construct | verify | planar | sums | dimension |
                           // admissible | trace
  std::string spec;        // danger spec or planar config text
  std::string alpha;       // alpha text form (sums)
  std::string beta;        // beta text form (verify/trace)
  std::string cert_path;   // verify input
  long q0 = 0;
  long Q = 0;
  std::string eps;         // dyadic string; empty = take it from the spec
  long width = 1024;
  std::string mode = "beam";
  std::string admissibility = "relaxed";
  std::string lemma;       // sums: 2 | 3 | kn | 4 | t8
  std::string a;           // rational parameter of lemmas 3/4
  long p = 2;              // lemma 4 prime
  long m = 0;              // kn bound
  std::string schedule = "cantor";  // dimension: cantor | theorem1
  long K = 0;
  std::string delta;       // dimension/theorem8 rational
  long X = 0;              // planar bound
  std::string out;         // artifact path
  std::string trace_out;   // optional trace CSV path
  int workers = 0;         // 0 = environment default

  std::string render() const;
  static RunConfig parse_rendered(const std::string& s);
};

// Returns the process exit code: 0 pass, 1 fail, 2 usage error.
int dispatch(int argc, const char* const* argv);

}  // namespace litsieve::cli
