#pragma once

#include <string>
#include <vector>

#include "litsieve/analysis.hpp"
#include "litsieve/planar.hpp"
#include "litsieve/sieve.hpp"
#include "litsieve/verify.hpp"

namespace litsieve::io {

// Canonical JSON documents: fixed field order, versioned with a "schema"
// field, exact values as dyadic/rational strings plus deterministic decimal
// approximations.  Byte-identical across runs and worker counts.

std::string certificate_json(const sieve::Certificate& cert);
sieve::Certificate parse_certificate(const std::string& json_text);

std::string planar_certificate_json(const planar::PlanarCertificate& cert);
planar::PlanarCertificate parse_planar_certificate(const std::string& json_text);

// Peeks at the "schema" field: "certificate/1" or "planar-certificate/1".
std::string certificate_schema(const std::string& json_text);

std::string verify_report_json(const verify::VerifyReport& rep);
std::string admiss_report_json(const sieve::AdmissReport& rep);
std::string sum_report_json(const std::string& kind, const analysis::SumReport& rep);
std::string lemma4_report_json(const analysis::Lemma4Report& rep);
std::string kn_report_json(const analysis::KnReport& rep);
std::string strip_sum_json(const planar::StripSumReport& rep);
std::string theorem8_json(const analysis::Theorem8Report& rep);

// CSV: "k,r_k" rows.
std::string dimension_csv(const analysis::DimReport& rep);
// CSV with header "q,dist_alpha,dist_beta,product".
std::string trace_csv(const std::vector<verify::TraceRow>& rows);
std::vector<std::array<std::string, 4>> parse_trace_csv(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace litsieve::io
