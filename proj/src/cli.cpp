#include "litsieve/cli.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "litsieve/io.hpp"
#include "litsieve/parallel.hpp"

namespace litsieve::cli {

namespace {

std::string esc(const std::string& v) {
  // field values never contain '|'; keep the canonical form flat
  if (v.find('|') != std::string::npos)
    throw std::invalid_argument("RunConfig: '|' not allowed in fields");
  return v;
}

int effective_workers(const RunConfig& c) {
  return c.workers > 0 ? c.workers : default_workers();
}

Rat eps_override(const std::string& eps) { return parse_dyadic_string(eps).to_rat(); }

// --- commands -------------------------------------------------------------

int cmd_construct(const RunConfig& rc) {
  sieve::SieveConfig config{danger::DangerSpec::parse(rc.spec)};
  config.q0 = rc.q0;
  config.width = rc.width;
  config.mode = rc.mode == "exhaustive" ? sieve::SieveConfig::Mode::Exhaustive
                                        : sieve::SieveConfig::Mode::Beam;
  config.admissibility = rc.admissibility == "strict"
                             ? sieve::SieveConfig::Admissibility::Strict
                             : sieve::SieveConfig::Admissibility::Relaxed;
  if (!rc.eps.empty() && eps_override(rc.eps) != config.spec.eps())
    throw std::invalid_argument("--eps differs from the eps in --spec; set it once");

  auto adm = sieve::check_admissible(config);
  if (!adm.pass) {
    std::cerr << "admissibility failed in strict mode:\n" << io::admiss_report_json(adm);
    return 1;
  }
  for (const auto& w : adm.warnings) std::cerr << "warning: " << w << "\n";

  try {
    auto cert = sieve::run_beam(config, rc.Q);
    std::string doc = io::certificate_json(cert);
    if (!rc.out.empty()) io::write_file(rc.out, doc);
    std::cout << "certificate: cell " << cert.final_a.get_str() << "/2^" << cert.final_l
              << ", min product >= " << decimal_string(cert.min_product.lo, 8)
              << ", backtracks " << cert.backtracks << "\n";
    return 0;
  } catch (const sieve::StarvationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_verify(const RunConfig& rc) {
  int workers = effective_workers(rc);
  if (!rc.cert_path.empty()) {
    std::string text = io::read_file(rc.cert_path);
    std::string schema = io::certificate_schema(text);
    if (schema == "planar-certificate/1") {
      auto cert = io::parse_planar_certificate(text);
      auto rep = verify::replay_planar_certificate(cert, workers);
      std::cout << (rep.pass ? "replay pass" : "replay FAIL: " + rep.reason) << "\n";
      if (!rep.pass) return 1;
      // independent value check: min_value.lo must clear eps
      bool ok = cert.min_value.lo.to_rat() >= cert.eps;
      std::cout << "min value >= " << decimal_string(cert.min_value.lo, 8)
                << (ok ? " (>= eps)" : " (< eps!)") << "\n";
      return ok ? 0 : 1;
    }
    auto cert = io::parse_certificate(text);
    auto replay = verify::replay_certificate(cert, workers);
    if (!replay.pass) {
      std::cerr << "replay FAIL: " << replay.reason << "\n";
      return 1;
    }
    // independent pointwise verification of the certified cell
    auto config = sieve::SieveConfig::parse(cert.config);
    auto beta = verify::BetaPoint::cell(cert.final_a, cert.final_l);
    auto rep = verify::verify_pointwise(config.spec, beta, cert.q0, cert.Q, workers);
    if (!rc.trace_out.empty()) {
      auto rows = verify::liminf_trace(config.spec, beta, cert.Q, cert.q0);
      io::write_file(rc.trace_out, io::trace_csv(rows));
      rep.trace_ref = rc.trace_out;
    }
    std::string doc = io::verify_report_json(rep);
    if (!rc.out.empty()) io::write_file(rc.out, doc);
    std::cout << "verify: min product >= " << decimal_string(rep.min_product.lo, 8) << " at q="
              << rep.argmin_q.get_str() << (rep.pass ? " PASS" : " FAIL") << "\n";
    return rep.pass ? 0 : 1;
  }

  // standalone verification of a claimed beta
  auto spec = danger::DangerSpec::parse(rc.spec);
  auto beta = verify::BetaPoint::parse(rc.beta);
  auto rep = verify::verify_pointwise(spec, beta, rc.q0, rc.Q, workers);
  if (!rc.trace_out.empty()) {
    auto rows = verify::liminf_trace(spec, beta, rc.Q, rc.q0);
    io::write_file(rc.trace_out, io::trace_csv(rows));
    rep.trace_ref = rc.trace_out;
  }
  std::string doc = io::verify_report_json(rep);
  if (!rc.out.empty()) io::write_file(rc.out, doc);
  std::cout << "verify: min product lower bound " << decimal_string(rep.min_product.lo, 8)
            << " at q=" << rep.argmin_q.get_str() << (rep.pass ? " PASS" : " FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_planar(const RunConfig& rc) {
  planar::PlanarConfig config;
  config.eps = eps_override(rc.eps);
  config.X = rc.X;
  config.width = rc.width;
  try {
    auto cert = planar::run_planar_beam(config);
    std::string doc = io::planar_certificate_json(cert);
    if (!rc.out.empty()) io::write_file(rc.out, doc);
    std::cout << "planar certificate: square (" << cert.final_a.get_str() << ","
              << cert.final_b.get_str() << ")/2^" << cert.final_l << ", min value >= "
              << decimal_string(cert.min_value.lo, 8) << "\n";
    return 0;
  } catch (const sieve::StarvationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_sums(const RunConfig& rc) {
  int workers = effective_workers(rc);
  std::string doc;
  if (rc.lemma == "2") {
    auto alpha = cf::AlphaSpec::parse(rc.alpha);
    auto rep = analysis::lemma2_sum(alpha, rc.q0, kDefaultPrec, workers);
    doc = io::sum_report_json("lemma2", rep);
  } else if (rc.lemma == "3") {
    auto alpha = cf::AlphaSpec::parse(rc.alpha);
    auto rep = analysis::lemma3_sum(alpha, rc.q0, parse_rat(rc.a), kDefaultPrec, workers);
    doc = io::sum_report_json("lemma3", rep);
  } else if (rc.lemma == "4") {
    auto rep = analysis::lemma4_sum(Int(rc.p), rc.q0, parse_rat(rc.a), kDefaultPrec, workers);
    doc = io::lemma4_report_json(rep);
  } else if (rc.lemma == "kn") {
    auto alpha = cf::AlphaSpec::parse(rc.alpha);
    auto rep = analysis::kn_partial_sum(alpha, rc.m, kDefaultPrec, workers);
    doc = io::kn_report_json(rep);
  } else if (rc.lemma == "strip") {
    auto rep = planar::strip_sum_check(rc.q0, eps_override(rc.eps.empty() ? "1" : rc.eps),
                                       kDefaultPrec, workers);
    doc = io::strip_sum_json(rep);
  } else {
    std::cerr << "error: unknown --lemma '" << rc.lemma << "'\n";
    return 2;
  }
  if (!rc.out.empty()) io::write_file(rc.out, doc);
  std::cout << doc;
  return 0;
}

int cmd_dimension(const RunConfig& rc) {
  analysis::DimensionSchedule sched;
  if (rc.schedule == "cantor") {
    sched = analysis::DimensionSchedule::cantor();
  } else if (rc.schedule == "theorem1") {
    analysis::DimensionSchedule::Symbolic sym;
    sym.delta = parse_rat(rc.delta.empty() ? "2/5" : rc.delta);
    sym.q0 = rc.q0 > 0 ? rc.q0 : 16;
    sched.symbolic = sym;
  } else {
    std::cerr << "error: unknown --schedule '" << rc.schedule << "'\n";
    return 2;
  }
  auto rep = analysis::dim_lower(sched, rc.K > 0 ? rc.K : 32);
  std::string doc = io::dimension_csv(rep);
  if (!rc.out.empty()) io::write_file(rc.out, doc);
  std::cout << "dim rows " << rep.rows.size() << ", liminf estimate >= "
            << decimal_string(rep.liminf_estimate.lo, 8);
  if (rep.k_star) std::cout << ", k* = " << *rep.k_star;
  std::cout << "\n";
  return 0;
}

int cmd_admissible(const RunConfig& rc) {
  sieve::SieveConfig config{danger::DangerSpec::parse(rc.spec)};
  config.q0 = rc.q0;
  config.admissibility = rc.admissibility == "strict"
                             ? sieve::SieveConfig::Admissibility::Strict
                             : sieve::SieveConfig::Admissibility::Relaxed;
  auto rep = sieve::check_admissible(config);
  std::string doc = io::admiss_report_json(rep);
  if (!rc.out.empty()) io::write_file(rc.out, doc);
  std::cout << doc;
  bool strict_ok = rep.eps_ok && rep.q0_conservative_ok && rep.dist_ok;
  return strict_ok ? 0 : 1;
}

int cmd_trace(const RunConfig& rc) {
  auto spec = danger::DangerSpec::parse(rc.spec);
  auto beta = verify::BetaPoint::parse(rc.beta);
  auto rows = verify::liminf_trace(spec, beta, rc.Q, rc.q0);
  std::string doc = io::trace_csv(rows);
  if (!rc.out.empty()) io::write_file(rc.out, doc);
  std::cout << doc;
  return 0;
}

}  // namespace

std::string RunConfig::render() const {
  std::string s = "command=" + esc(command);
  auto add = [&](const char* k, const std::string& v) {
    if (!v.empty()) s += "|" + std::string(k) + "=" + v;
  };
  auto addl = [&](const char* k, long v) {
    if (v != 0) s += "|" + std::string(k) + "=" + std::to_string(v);
  };
  add("spec", spec);
  add("alpha", alpha);
  add("beta", beta);
  add("cert", cert_path);
  addl("q0", q0);
  addl("Q", Q);
  add("eps", eps);
  addl("width", width);
  add("mode", mode);
  add("admissibility", admissibility);
  add("lemma", lemma);
  add("a", a);
  addl("p", p);
  addl("m", m);
  add("schedule", schedule);
  addl("K", K);
  add("delta", delta);
  addl("X", X);
  add("out", out);
  add("trace_out", trace_out);
  addl("workers", workers);
  return s;
}

RunConfig RunConfig::parse_rendered(const std::string& s) {
  RunConfig c;
  c.width = 0;  // distinguish "absent" during parsing
  c.p = 0;
  c.mode.clear();
  c.admissibility.clear();
  c.schedule.clear();
  size_t pos = 0;
  while (pos <= s.size()) {
    auto bar = s.find('|', pos);
    std::string field = s.substr(pos, bar == std::string::npos ? bar : bar - pos);
    pos = bar == std::string::npos ? s.size() + 1 : bar + 1;
    if (field.empty()) continue;
    auto eq = field.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("RunConfig: bad field '" + field + "'");
    std::string k = field.substr(0, eq), v = field.substr(eq + 1);
    if (k == "command") c.command = v;
    else if (k == "spec") c.spec = v;
    else if (k == "alpha") c.alpha = v;
    else if (k == "beta") c.beta = v;
    else if (k == "cert") c.cert_path = v;
    else if (k == "q0") c.q0 = std::stol(v);
    else if (k == "Q") c.Q = std::stol(v);
    else if (k == "eps") c.eps = v;
    else if (k == "width") c.width = std::stol(v);
    else if (k == "mode") c.mode = v;
    else if (k == "admissibility") c.admissibility = v;
    else if (k == "lemma") c.lemma = v;
    else if (k == "a") c.a = v;
    else if (k == "p") c.p = std::stol(v);
    else if (k == "m") c.m = std::stol(v);
    else if (k == "schedule") c.schedule = v;
    else if (k == "K") c.K = std::stol(v);
    else if (k == "delta") c.delta = v;
    else if (k == "X") c.X = std::stol(v);
    else if (k == "out") c.out = v;
    else if (k == "trace_out") c.trace_out = v;
    else if (k == "workers") c.workers = static_cast<int>(std::stol(v));
    else throw std::invalid_argument("RunConfig: unknown field '" + k + "'");
  }
  return c;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"dyadic interval sieve for Littlewood-type inequalities"};
  app.require_subcommand(1);
  RunConfig rc;

  auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", rc.workers, "worker threads (default: LITSIEVE_WORKERS or 1)");
  };

  CLI::App* construct = app.add_subcommand("construct", "run the interval sieve, emit a certificate");
  construct->add_option("--spec", rc.spec, "danger spec text")->required();
  construct->add_option("--q0", rc.q0, "start index")->required();
  construct->add_option("--Q", rc.Q, "end index")->required();
  construct->add_option("--eps", rc.eps, "dyadic eps (must match the spec's)");
  construct->add_option("--width", rc.width, "beam width");
  construct->add_option("--mode", rc.mode, "beam | exhaustive");
  construct->add_option("--admissibility", rc.admissibility, "relaxed | strict");
  construct->add_option("--out", rc.out, "certificate JSON path");
  add_workers(construct);

  CLI::App* ver = app.add_subcommand("verify", "independently verify a certificate or beta");
  ver->add_option("--cert", rc.cert_path, "certificate JSON to replay and verify");
  ver->add_option("--spec", rc.spec, "danger spec text (standalone mode)");
  ver->add_option("--beta", rc.beta, "claimed beta: rational:p/q | dyadic:a/2^l | cell:a/2^l");
  ver->add_option("--q0", rc.q0, "start index (standalone mode)");
  ver->add_option("--Q", rc.Q, "end index (standalone mode)");
  ver->add_option("--out", rc.out, "verify report JSON path");
  ver->add_option("--trace", rc.trace_out, "record-low trace CSV path");
  add_workers(ver);

  CLI::App* pl = app.add_subcommand("planar", "run the planar strip sieve");
  pl->add_option("--eps", rc.eps, "dyadic eps")->required();
  pl->add_option("--X", rc.X, "coefficient bound")->required();
  pl->add_option("--width", rc.width, "beam width");
  pl->add_option("--out", rc.out, "planar certificate JSON path");
  add_workers(pl);

  CLI::App* sums = app.add_subcommand("sums", "evaluate the bounding sums");
  sums->add_option("--lemma", rc.lemma, "2 | 3 | 4 | kn | strip")->required();
  sums->add_option("--alpha", rc.alpha, "alpha text form");
  sums->add_option("--q", rc.q0, "range start q (sums run to q^3)");
  sums->add_option("--a", rc.a, "exponent parameter a");
  sums->add_option("--p", rc.p, "prime (lemma 4)");
  sums->add_option("--m", rc.m, "upper bound m (kn)");
  sums->add_option("--eps", rc.eps, "eps (strip sum)");
  sums->add_option("--out", rc.out, "report JSON path");
  add_workers(sums);

  CLI::App* dim = app.add_subcommand("dimension", "dimension lower-bound schedule ratios");
  dim->add_option("--schedule", rc.schedule, "cantor | theorem1");
  dim->add_option("--K", rc.K, "schedule depth");
  dim->add_option("--delta", rc.delta, "delta (theorem1 schedule)");
  dim->add_option("--q0", rc.q0, "q0 (theorem1 schedule)");
  dim->add_option("--out", rc.out, "CSV path");

  CLI::App* adm = app.add_subcommand("admissible", "check the admissibility conditions");
  adm->add_option("--spec", rc.spec, "danger spec text")->required();
  adm->add_option("--q0", rc.q0, "start index")->required();
  adm->add_option("--admissibility", rc.admissibility, "relaxed | strict");
  adm->add_option("--out", rc.out, "report JSON path");

  CLI::App* tr = app.add_subcommand("trace", "record-low product trace CSV");
  tr->add_option("--spec", rc.spec, "danger spec text")->required();
  tr->add_option("--beta", rc.beta, "beta text form")->required();
  tr->add_option("--q0", rc.q0, "start index");
  tr->add_option("--Q", rc.Q, "end index")->required();
  tr->add_option("--out", rc.out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (construct->parsed()) return cmd_construct(rc);
    if (ver->parsed()) return cmd_verify(rc);
    if (pl->parsed()) return cmd_planar(rc);
    if (sums->parsed()) return cmd_sums(rc);
    if (dim->parsed()) return cmd_dimension(rc);
    if (adm->parsed()) return cmd_admissible(rc);
    if (tr->parsed()) return cmd_trace(rc);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace litsieve::cli
