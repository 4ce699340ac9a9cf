#pragma once

#include <cstdint>
#include <string>

#include "litsieve/exact.hpp"

namespace litsieve {

/// FNV-1a 64 over the per-index kill/survive audit log.  The construction and
/// the independent replay both feed identical records; matching digests prove
/// the replay retraced the same steps.
class AuditDigest {
 public:
  void bytes(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  void text(const std::string& s) { bytes(s.data(), s.size()); }
  void number(uint64_t v) { bytes(&v, sizeof v); }
  void integer(const Int& v) { text(v.get_str()); }

  void header(const std::string& config, const Int& cell_a, long cell_l, long q0, long Q) {
    text(config);
    integer(cell_a);
    number(static_cast<uint64_t>(cell_l));
    number(static_cast<uint64_t>(q0));
    number(static_cast<uint64_t>(Q));
  }
  void step(long x, long lx, const Int& rm, bool survive) {
    number(static_cast<uint64_t>(x));
    number(static_cast<uint64_t>(lx));
    integer(rm);
    number(survive ? 1 : 0);
  }

  std::string hex() const {
    static const char* d = "0123456789abcdef";
    std::string out = "fnv1a64:";
    for (int i = 60; i >= 0; i -= 4) out.push_back(d[(h_ >> i) & 0xF]);
    return out;
  }

 private:
  uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace litsieve
