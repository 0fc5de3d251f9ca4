// salem_census: classify polynomials, find square-root witnesses, run
// censuses and print theory curves.
//
// Exit status: 0 success, 1 negative decision, 2 input error, 3 budget
// exceeded, 130 interrupted.

#include "salem/asymptotics.hpp"
#include "salem/census.hpp"
#include "salem/parallel.hpp"
#include "salem/salem.hpp"
#include "salem/sqrt_root.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace salem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kInputError = 2;
constexpr int kBudget = 3;
constexpr int kInterrupted = 130;

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  int precision_bits = 256;
  double budget = 1e9;
  int shards = default_workers();
  std::string format = "csv";
  std::string resume;
  bool resume_set = false;
  std::uint64_t seed = 0;
};

RunConfig make_config(const Globals& g) {
  RunConfig c;
  c.precision_bits = g.precision_bits;
  c.budget = g.budget;
  c.workers = g.shards;
  c.format = g.format == "json" ? OutputFormat::json : OutputFormat::csv;
  c.seed = g.seed;
  if (g.resume_set) c.resume_dir = g.resume.empty() ? default_work_dir() : std::filesystem::path(g.resume);
  c.cancel = &g_cancel;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return c;
}

// A record or stream line ("2.618..., 1, 1, -3, 1") or any polynomial text.
IntPoly read_poly(const std::string& text) {
  const auto comma = text.find(',');
  if (text.find('|') != std::string::npos ||
      (comma != std::string::npos && text.substr(0, comma).find('.') != std::string::npos)) {
    return parse_record_line(text);
  }
  return parse_poly(text);
}

Rational read_q(const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw InputError("bad --max value '" + text + "': " + e.what());
  }
}

Classification classify_input(const IntPoly& p, int bits) {
  try {
    return classify(p, bits);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

json coeff_json(const IntPoly& p) {
  json a = json::array();
  for (const auto& c : p.coeffs()) {
    if (c.fits_slong_p()) {
      a.push_back(c.get_si());
    } else {
      a.push_back(c.get_str());
    }
  }
  return a;
}

json number_json(const BigFloat& v) {
  const double d = v.to_double();
  if (std::isfinite(d)) return d;
  return v.to_string(17);
}

int cmd_check(const std::string& text, const Globals& g) {
  const IntPoly p = read_poly(text);
  const Classification c = classify_input(p, g.precision_bits);
  json out;
  out["polynomial"] = to_string(p);
  int code = kNegative;
  if (const auto* s = std::get_if<SalemRecord>(&c)) {
    out["class"] = "Salem";
    out["m"] = s->m;
    out["lambda"] = s->lambda.center.re.to_string(20);
    out["radius"] = s->lambda.radius.to_string(3);
    out["record"] = to_record_line(*s);
    code = kOk;
  } else if (const auto* cy = std::get_if<Cyclotomic>(&c)) {
    out["class"] = "Cyclotomic";
    out["order"] = cy->order;
  } else {
    out["class"] = "ReducibleOrOther";
    out["reason"] = std::get<ReducibleOrOther>(c).reason;
  }
  if (g.format == "json") {
    std::cout << out.dump(2) << "\n";
    return code;
  }
  std::cout << "polynomial: " << out["polynomial"].get<std::string>() << "\n";
  const std::string cls = out["class"];
  if (cls == "Salem") {
    std::cout << "class: Salem\nm: " << out["m"].get<int>() << "\nlambda: " << out["lambda"].get<std::string>()
              << " +- " << out["radius"].get<std::string>() << "\nrecord: " << out["record"].get<std::string>() << "\n";
  } else if (cls == "Cyclotomic") {
    std::cout << "class: Cyclotomic (order " << out["order"].get<int>() << ")\n";
  } else {
    std::cout << "class: ReducibleOrOther (" << out["reason"].get<std::string>() << ")\n";
  }
  return code;
}

int cmd_sqroot(const std::string& text, const Globals& g) {
  const IntPoly p = read_poly(text);
  const Classification c = classify_input(p, g.precision_bits);
  const auto* s = std::get_if<SalemRecord>(&c);
  if (s == nullptr) throw InputError("input is not a Salem polynomial: " + to_string(p));
  const auto ws = find_decompositions(*s, g.precision_bits);
  bool all_ok = true;
  json list = json::array();
  for (const auto& w : ws) {
    const auto v = verify_decomposition(w);
    all_ok = all_ok && v.ok;
    list.push_back({{"alpha", w.alpha.get_str()},
                    {"A", coeff_json(w.A)},
                    {"B", coeff_json(w.B)},
                    {"lambda_sq", phi(w, g.precision_bits).to_string(15)},
                    {"verified", v.ok},
                    {"failed_clause", v.failed_clause}});
  }
  if (g.format == "json") {
    std::cout << json{{"record", to_record_line(*s)}, {"square_rootable", !ws.empty()}, {"witnesses", list}}.dump(2)
              << "\n";
  } else {
    std::cout << "record: " << to_record_line(*s) << "\nwitnesses: " << ws.size() << "\n";
    for (const auto& w : ws) {
      const auto v = verify_decomposition(w);
      std::cout << to_witness_line(w, g.precision_bits) << "  " << (v.ok ? "verified" : "FAILED " + v.failed_clause)
                << "\n";
    }
  }
  if (!all_ok) return kNegative;
  return ws.empty() ? kNegative : kOk;
}

void write_records(const std::string& path, const std::string& body) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  out << body;
  if (!out) throw std::runtime_error("cannot write " + path);
}

int cmd_count(int m, const std::string& qtext, bool sq, const std::string& records, const Globals& g) {
  const RunConfig config = make_config(g);
  if (m < 1) throw InputError("--m must be positive");
  const Rational Q = read_q(qtext);
  CensusReport report;
  if (sq) {
    const auto run = run_sq_census(m, Q, config);
    write_records(records, sq_stream(run.census, config.precision_bits));
    report.rows.push_back(run.row);
  } else {
    const auto run = run_all_census(m, Q, config);
    write_records(records, record_stream(run.records));
    report.rows.push_back(run.row);
  }
  std::cout << (config.format == OutputFormat::json ? to_json(report) + "\n" : to_csv(report));
  return kOk;
}

int cmd_sweep(int m, const std::vector<std::string>& qs, bool sq, const Globals& g) {
  const RunConfig config = make_config(g);
  if (m < 1) throw InputError("--m must be positive");
  std::vector<Rational> Qs;
  for (const auto& q : qs) Qs.push_back(read_q(q));
  const auto res = run_sweep(sq ? CensusKind::sq : CensusKind::all, m, Qs, config);
  for (const auto& e : res.errors) std::cerr << "error at Q=" << e << "\n";
  if (config.format == OutputFormat::json) {
    json out = json::parse(to_json(res.report));
    std::cout << json{{"rows", out},
                      {"fitted_slope", std::isfinite(res.fitted_slope) ? json(res.fitted_slope) : json(nullptr)},
                      {"expected_slope", res.expected_slope},
                      {"log_removed", res.log_removed},
                      {"errors", res.errors}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << to_csv(res.report);
    char buf[160];
    std::snprintf(buf, sizeof buf, "# fitted_slope=%.12g expected_slope=%.12g deviation=%.12g log_removed=%d\n",
                  res.fitted_slope, res.expected_slope, res.fitted_slope - res.expected_slope, res.log_removed ? 1 : 0);
    std::cout << buf;
  }
  return res.errors.empty() ? kOk : kNegative;
}

int cmd_theory(int m, const std::string& qtext, int n, double L) {
  if (n > 0) {
    if (n < 4) throw InputError("--dim must be at least 4");
    if (!(L > 0)) throw InputError("--length must be positive");
    const auto r = mean_mult_bound(n, BigFloat(L, kTheoryBits));
    std::cout << json{{"n", r.n},
                      {"L", L},
                      {"gamma_h", number_json(r.gamma_h)},
                      {"distinct_lengths_bound", number_json(r.distinct_lengths_bound)},
                      {"mean_mult_lower", number_json(r.mean_mult_lower)},
                      {"c_prime", number_json(r.c_prime)},
                      {"delta57", r.delta57},
                      {"limit_constant", number_json(r.limit_constant)},
                      {"note", "main-term proxy"}}
                     .dump(2)
              << "\n";
    return kOk;
  }
  if (m < 1) throw InputError("--m must be positive");
  const Rational Q = read_q(qtext);
  if (Q <= 1) throw InputError("--max must exceed 1");
  const BigFloat q(Q, kTheoryBits);
  const auto sq = predict_sq_count(m, q);
  std::cout << json{{"m", m},
                    {"Q", Q.get_d()},
                    {"all_main", number_json(predict_all_count(m, q).value)},
                    {"sq_lower", number_json(sq.lower.value)},
                    {"sq_upper", number_json(sq.upper.value)}}
                   .dump(2)
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Salem number census"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--precision-bits", g.precision_bits, "working precision in bits (>= 64)");
  app.add_option("--budget", g.budget, "candidate budget (>= 1000)");
  app.add_option("--shards", g.shards, "worker count");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  auto* resume = app.add_option("--resume", g.resume, "checkpoint directory (default $SALEM_CENSUS_DIR)")->expected(0, 1);
  app.add_option("--seed", g.seed, "shard order seed");

  std::string poly_text;
  auto* check = app.add_subcommand("check", "classify a polynomial");
  check->add_option("poly", poly_text, "polynomial or record line")->required();
  auto* sqroot = app.add_subcommand("sqroot", "list square-root witnesses");
  sqroot->add_option("poly", poly_text, "polynomial or record line")->required();

  int m = 0;
  std::string qtext;
  bool sq = false;
  std::string records;
  auto* count = app.add_subcommand("count", "count Salem numbers of degree 2m up to Q");
  count->add_option("--m", m)->required();
  count->add_option("--max", qtext)->required();
  count->add_flag("--sq", sq, "square-rootable census");
  count->add_option("--records", records, "write the record stream here ('-' for stdout)");

  std::vector<std::string> qlist;
  auto* sweep = app.add_subcommand("sweep", "counts over several Q with a fitted log-log slope");
  sweep->add_option("--m", m)->required();
  sweep->add_option("--max", qlist)->required()->delimiter(',');
  sweep->add_flag("--sq", sq, "square-rootable census");

  int n = 0;
  double L = 0;
  auto* theory = app.add_subcommand("theory", "main-term predictions");
  auto* tm = theory->add_option("--m", m);
  auto* tq = theory->add_option("--max", qtext);
  auto* tn = theory->add_option("--dim", n);
  auto* tl = theory->add_option("--length", L);
  tm->needs(tq);
  tq->needs(tm);
  tn->needs(tl);
  tl->needs(tn);
  tm->excludes(tn);
  tn->excludes(tm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }
  g.resume_set = resume->count() > 0;

  std::signal(SIGINT, on_sigint);
  try {
    if (*check) return cmd_check(poly_text, g);
    if (*sqroot) return cmd_sqroot(poly_text, g);
    if (*count) return cmd_count(m, qtext, sq, records, g);
    if (*sweep) return cmd_sweep(m, qlist, sq, g);
    if (*theory) {
      if (tm->count() == 0 && tn->count() == 0) throw InputError("theory needs --m/--max or --dim/--length");
      return cmd_theory(m, qtext, n, L);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const BudgetExceeded& e) {
    std::cerr << e.what() << "\n";
    return kBudget;
  } catch (const Cancelled&) {
    std::cerr << "interrupted; finished shards are checkpointed when --resume is set\n";
    return kInterrupted;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return kInputError;
}
