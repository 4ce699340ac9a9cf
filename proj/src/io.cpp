#include "litsieve/io.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace litsieve::io {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json bounds_json(const RealBounds& b) {
  ordered_json j;
  j["lo"] = b.lo.str();
  j["hi"] = b.hi.str();
  j["approx"] = decimal_string(b);
  return j;
}

RealBounds bounds_from(const ordered_json& j) {
  return RealBounds(parse_dyadic_string(j.at("lo").get<std::string>()),
                    parse_dyadic_string(j.at("hi").get<std::string>()));
}

}  // namespace

std::string certificate_json(const sieve::Certificate& cert) {
  ordered_json j;
  j["schema"] = "certificate/1";
  j["config"] = cert.config;
  j["range"] = {{"q0", cert.q0}, {"Q", cert.Q}};
  j["final_cell"] = {{"a", cert.final_a.get_str()}, {"l", cert.final_l}};
  j["min_product"] = bounds_json(cert.min_product);
  j["min_product_arg"] = cert.min_product_arg.get_str();
  j["backtracks"] = cert.backtracks;
  j["audit_digest"] = cert.audit_digest;
  ordered_json kl = ordered_json::array();
  for (auto& [x, k] : cert.kill_log) kl.push_back({{"x", x}, {"killed", k}});
  j["kill_log"] = kl;
  return j.dump(2) + "\n";
}

sieve::Certificate parse_certificate(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  if (j.at("schema").get<std::string>() != "certificate/1")
    throw std::invalid_argument("certificate: unsupported schema");
  sieve::Certificate cert;
  cert.config = j.at("config").get<std::string>();
  cert.q0 = j.at("range").at("q0").get<long>();
  cert.Q = j.at("range").at("Q").get<long>();
  cert.final_a = Int(j.at("final_cell").at("a").get<std::string>());
  cert.final_l = j.at("final_cell").at("l").get<long>();
  cert.min_product = bounds_from(j.at("min_product"));
  cert.min_product_arg = Int(j.at("min_product_arg").get<std::string>());
  cert.backtracks = j.at("backtracks").get<long>();
  cert.audit_digest = j.at("audit_digest").get<std::string>();
  for (auto& e : j.at("kill_log"))
    cert.kill_log.emplace_back(e.at("x").get<long>(), e.at("killed").get<long>());
  return cert;
}

std::string planar_certificate_json(const planar::PlanarCertificate& cert) {
  ordered_json j;
  j["schema"] = "planar-certificate/1";
  j["config"] = cert.config;
  j["range"] = {{"X", cert.X}};
  j["final_square"] = {{"a", cert.final_a.get_str()},
                       {"b", cert.final_b.get_str()},
                       {"l", cert.final_l}};
  j["min_value"] = bounds_json(cert.min_value);
  j["min_value_arg"] = {{"x", cert.min_arg_x}, {"y", cert.min_arg_y}};
  j["backtracks"] = cert.backtracks;
  j["audit_digest"] = cert.audit_digest;
  return j.dump(2) + "\n";
}

planar::PlanarCertificate parse_planar_certificate(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  if (j.at("schema").get<std::string>() != "planar-certificate/1")
    throw std::invalid_argument("planar certificate: unsupported schema");
  planar::PlanarCertificate cert;
  cert.config = j.at("config").get<std::string>();
  planar::PlanarConfig cfg = planar::PlanarConfig::parse(cert.config);
  cert.eps = cfg.eps;
  cert.X = cfg.X;
  cert.width = cfg.width;
  cert.final_a = Int(j.at("final_square").at("a").get<std::string>());
  cert.final_b = Int(j.at("final_square").at("b").get<std::string>());
  cert.final_l = j.at("final_square").at("l").get<long>();
  cert.min_value = bounds_from(j.at("min_value"));
  cert.min_arg_x = j.at("min_value_arg").at("x").get<long>();
  cert.min_arg_y = j.at("min_value_arg").at("y").get<long>();
  cert.backtracks = j.at("backtracks").get<long>();
  cert.audit_digest = j.at("audit_digest").get<std::string>();
  return cert;
}

std::string certificate_schema(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  return j.at("schema").get<std::string>();
}

std::string verify_report_json(const verify::VerifyReport& rep) {
  ordered_json j;
  j["schema"] = "verify-report/1";
  j["range"] = {{"q0", rep.q0}, {"Q", rep.Q}};
  j["min_product"] = bounds_json(rep.min_product);
  j["argmin_q"] = rep.argmin_q.get_str();
  j["threshold"] = rat_str(rep.threshold);
  j["pass"] = rep.pass;
  j["undecided"] = rep.undecided;
  j["trace_ref"] = rep.trace_ref;
  return j.dump(2) + "\n";
}

std::string admiss_report_json(const sieve::AdmissReport& rep) {
  ordered_json j;
  j["schema"] = "admissibility-report/1";
  j["eps"] = rat_str(rep.eps);
  j["fitted_C"] = {{"value", rat_str(rep.fitted_C)}, {"grid", rep.fit_grid}};
  j["eps_ok"] = rep.eps_ok;
  j["q0_conservative"] = {{"bound", rat_str(rep.q0_conservative_bound)},
                          {"ok", rep.q0_conservative_ok}};
  j["q0_literal"] = {{"bound", rat_str(rep.q0_literal_bound)},
                     {"ok", rep.q0_literal_ok},
                     {"suspicious", rep.literal_suspicious}};
  j["dist_ok"] = rep.dist_ok;
  j["smallest_good_q0"] = rep.smallest_good_q0;
  j["delta"] = rat_str(rep.delta);
  j["relaxed"] = rep.relaxed;
  j["pass"] = rep.pass;
  j["warnings"] = rep.warnings;
  return j.dump(2) + "\n";
}

std::string sum_report_json(const std::string& kind, const analysis::SumReport& rep) {
  ordered_json j;
  j["schema"] = "sum-report/1";
  j["kind"] = kind;
  j["q"] = rep.q_or_m.get_str();
  j["value"] = bounds_json(rep.value);
  j["term_count"] = rep.term_count.get_str();
  j["max_term"] = bounds_json(rep.max_term);
  if (rep.fitted_constant) {
    j["fitted_constant"] = {{"value", rat_str(*rep.fitted_constant)}, {"grid", rep.fit_grid}};
  }
  return j.dump(2) + "\n";
}

std::string lemma4_report_json(const analysis::Lemma4Report& rep) {
  ordered_json j = ordered_json::parse(sum_report_json("lemma4", rep.total));
  ordered_json by_val = ordered_json::array();
  for (const Rat& r : rep.rational_by_valuation) by_val.push_back(rat_str(r));
  j["rational_by_valuation"] = by_val;
  j["rational_direct"] = rat_str(rep.rational_direct);
  return j.dump(2) + "\n";
}

std::string kn_report_json(const analysis::KnReport& rep) {
  ordered_json j;
  j["schema"] = "sum-report/1";
  j["kind"] = "kn";
  j["m"] = rep.m.get_str();
  j["value"] = bounds_json(rep.value);
  j["ratio_ln"] = bounds_json(rep.ratio_ln);
  j["ratio_log2"] = bounds_json(rep.ratio_log2);
  return j.dump(2) + "\n";
}

std::string strip_sum_json(const planar::StripSumReport& rep) {
  ordered_json j;
  j["schema"] = "sum-report/1";
  j["kind"] = "strip-sum";
  j["q"] = rep.q;
  j["value"] = bounds_json(rep.value);
  j["ratio_to_eps"] = bounds_json(rep.ratio_to_eps);
  j["pair_count"] = rep.pair_count.get_str();
  return j.dump(2) + "\n";
}

std::string theorem8_json(const analysis::Theorem8Report& rep) {
  ordered_json j;
  j["schema"] = "hypothesis-report/1";
  ordered_json per = ordered_json::array();
  for (auto& [X, v] : rep.per_X) per.push_back({{"X", X}, {"sum", bounds_json(v)}});
  j["per_X"] = per;
  j["sup"] = bounds_json(rep.sup);
  j["arg_sup"] = rep.arg_sup;
  j["pass"] = rep.pass;
  j["condition_iv"] = {{"ok", rep.condition_iv_ok}, {"max", bounds_json(rep.condition_iv_max)}};
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

std::string dimension_csv(const analysis::DimReport& rep) {
  std::ostringstream out;
  out << "k,r_k\n";
  for (const auto& row : rep.rows)
    out << row.k << ',' << decimal_string(row.r) << '\n';
  return out.str();
}

std::string trace_csv(const std::vector<verify::TraceRow>& rows) {
  std::ostringstream out;
  out << "q,dist_alpha,dist_beta,product\n";
  for (const auto& r : rows)
    out << r.q << ',' << decimal_string(r.dist_alpha) << ',' << decimal_string(r.dist_beta)
        << ',' << decimal_string(r.product) << '\n';
  return out.str();
}

std::vector<std::array<std::string, 4>> parse_trace_csv(const std::string& text) {
  std::vector<std::array<std::string, 4>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      if (line != "q,dist_alpha,dist_beta,product")
        throw std::invalid_argument("trace csv: bad header");
      header = false;
      continue;
    }
    std::array<std::string, 4> row;
    size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
      auto comma = line.find(',', pos);
      row[i] = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
      pos = comma == std::string::npos ? line.size() : comma + 1;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace litsieve::io
