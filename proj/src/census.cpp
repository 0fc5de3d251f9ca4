#include "salem/census.hpp"

#include "salem/asymptotics.hpp"
#include "salem/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace salem {

namespace fs = std::filesystem;

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void RunConfig::validate() const {
  if (precision_bits < 64) throw std::invalid_argument("precision_bits must be at least 64");
  if (!(budget >= 1e3)) throw std::invalid_argument("budget must be at least 1000");
  if (workers < 1) throw std::invalid_argument("shard count must be at least 1");
}

namespace {

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

void recompute_ratios(CensusRow& row) {
  row.ratio_all.reset();
  row.ratio_sq.reset();
  if (row.count_all && row.theory_all > 0) row.ratio_all = static_cast<double>(*row.count_all) / row.theory_all;
  if (row.count_sq && row.theory_sq_upper > 0) row.ratio_sq = static_cast<double>(*row.count_sq) / row.theory_sq_upper;
}

template <class T>
std::string opt_field(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_integral_v<T>) {
    return std::to_string(*v);
  } else {
    return fmt12(*v);
  }
}

std::string q_text(const Rational& Q) { return fmt12(Q.get_d()); }

std::string poly_field(const IntPoly& p) { return to_coeff_list(p); }

IntPoly poly_from_field(const std::string& s) { return parse_poly(s); }

// Checkpoint directory for one run.
class Checkpoint {
 public:
  Checkpoint(const RunConfig& config, CensusKind kind, int m, const Rational& Q, std::size_t shards) {
    if (!config.resume_dir) return;
    dir_ = *config.resume_dir / run_key(kind, m, Q);
    fs::create_directories(dir_);
    const fs::path meta = dir_ / "meta.txt";
    const std::string expect = run_key(kind, m, Q) + " shards=" + std::to_string(shards) + "\n";
    if (fs::exists(meta)) {
      std::ifstream in(meta);
      std::stringstream ss;
      ss << in.rdbuf();
      if (ss.str() != expect) throw std::runtime_error("checkpoint in " + dir_.string() + " belongs to a different run");
    } else {
      std::ofstream(meta) << expect;
    }
    std::ifstream in(dir_ / "completed.txt");
    std::string line;
    while (std::getline(in, line)) {
      const std::string t = trim(line);
      if (t.empty()) continue;
      const std::size_t i = std::stoul(t);
      if (i < shards && fs::exists(shard_path(i))) done_.insert(i);
    }
  }

  [[nodiscard]] bool enabled() const { return !dir_.empty(); }
  [[nodiscard]] bool done(std::size_t i) const { return done_.count(i) != 0; }

  [[nodiscard]] std::vector<std::string> load(std::size_t i) const {
    std::ifstream in(shard_path(i));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) lines.push_back(line);
    }
    return lines;
  }

  void save(std::size_t i, const std::vector<std::string>& lines) {
    if (!enabled()) return;
    const fs::path tmp = shard_path(i).string() + ".tmp";
    {
      std::ofstream out(tmp);
      for (const auto& l : lines) out << l << '\n';
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, shard_path(i));
    std::lock_guard lock(mu_);
    std::ofstream(dir_ / "completed.txt", std::ios::app) << i << '\n';
  }

 private:
  [[nodiscard]] fs::path shard_path(std::size_t i) const { return dir_ / ("shard-" + std::to_string(i) + ".txt"); }

  fs::path dir_;
  std::set<std::size_t> done_;
  std::mutex mu_;
};

std::vector<std::string> all_shard_lines(const std::vector<SalemRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) out.push_back(poly_field(r.min_poly.poly()));
  return out;
}

std::vector<SalemRecord> all_shard_from_lines(const std::vector<std::string>& lines, int bits) {
  std::vector<SalemRecord> out;
  for (const auto& l : lines) {
    const PalindromicPoly p(poly_from_field(l));
    out.push_back(SalemRecord{p, salem_lambda_from_trace(trace_transform(p).poly(), bits), p.half_degree()});
  }
  return out;
}

std::vector<std::string> sq_shard_lines(const SqShardResult& r) {
  std::vector<std::string> out;
  for (const auto& h : r.hits) {
    const auto& w = h.witness;
    out.push_back("H|" + w.alpha.get_str() + "|" + poly_field(w.A) + "|" + poly_field(w.B) + "|" +
                  poly_field(w.source.poly()));
  }
  for (const auto& a : r.audit) {
    std::string orders;
    for (std::size_t k = 0; k < a.orders.size(); ++k) orders += (k ? "," : "") + std::to_string(a.orders[k]);
    out.push_back("X|" + a.alpha.get_str() + "|" + poly_field(a.A) + "|" + poly_field(a.B) + "|" + poly_field(a.p) +
                  "|" + orders);
  }
  return out;
}

SqShardResult sq_shard_from_lines(const std::vector<std::string>& lines) {
  SqShardResult out;
  for (const auto& l : lines) {
    const auto f = split(l, '|');
    if (f.size() < 5) throw std::runtime_error("malformed checkpoint line: " + l);
    const Integer alpha(f[1]);
    if (f[0] == "H") {
      const PalindromicPoly p(poly_from_field(f[4]));
      out.hits.push_back(SqHit{SqrtDecomposition{alpha, poly_from_field(f[2]), poly_from_field(f[3]), p},
                               trace_transform(p).poly()});
    } else if (f[0] == "X" && f.size() == 6) {
      AuditEntry a{alpha, poly_from_field(f[2]), poly_from_field(f[3]), poly_from_field(f[4]), {}};
      for (const auto& o : split(f[5], ',')) {
        if (!o.empty()) a.orders.push_back(std::stoi(o));
      }
      out.audit.push_back(std::move(a));
    } else {
      throw std::runtime_error("malformed checkpoint line: " + l);
    }
  }
  return out;
}

// Runs every shard not yet checkpointed, in seed order.
template <class Result, class RunFn, class SaveFn, class LoadFn>
std::vector<Result> run_with_checkpoints(std::size_t shards, const RunConfig& config, Checkpoint& cp, RunFn run,
                                         SaveFn to_lines, LoadFn from_lines) {
  std::vector<Result> parts(shards);
  std::vector<std::size_t> todo;
  for (std::size_t i : shard_order(shards, config.seed)) {
    if (cp.done(i)) {
      parts[i] = from_lines(cp.load(i));
    } else {
      todo.push_back(i);
    }
  }
  run_shards(todo, config.workers,
             [&](std::size_t i) {
               parts[i] = run(i);
               cp.save(i, to_lines(parts[i]));
             },
             config.cancel);
  return parts;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

void fill_theory(CensusRow& row) {
  const BigFloat Q(row.Q, kTheoryBits);
  if (row.Q > 1) {
    row.theory_all = predict_all_count(row.m, Q).value.to_double();
    const auto sq = predict_sq_count(row.m, Q);
    row.theory_sq_lower = sq.lower.value.to_double();
    row.theory_sq_upper = sq.upper.value.to_double();
  } else {
    row.theory_all = row.theory_sq_lower = row.theory_sq_upper = 0;
  }
  recompute_ratios(row);
}

std::string csv_header() {
  return "m,Q,count_all,count_sq,theory_all,theory_sq_lower,theory_sq_upper,ratio_all,ratio_sq,wall_seconds,shard_count";
}

std::string to_csv(const CensusReport& report, bool with_timing) {
  std::string out = csv_header() + "\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.m) + "," + q_text(r.Q) + "," + opt_field(r.count_all) + "," + opt_field(r.count_sq) + "," +
           fmt12(r.theory_all) + "," + fmt12(r.theory_sq_lower) + "," + fmt12(r.theory_sq_upper) + "," +
           opt_field(r.ratio_all) + "," + opt_field(r.ratio_sq) + "," + (with_timing ? fmt12(r.wall_seconds) : "") + "," +
           std::to_string(r.shard_count) + "\n";
  }
  return out;
}

CensusReport load_csv(std::string_view text) {
  CensusReport report;
  bool header_seen = false;
  for (const auto& raw : split(text, '\n')) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != csv_header()) throw std::invalid_argument("missing or unexpected CSV header");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 11) throw std::invalid_argument("expected 11 fields in CSV row: " + line);
    CensusRow r;
    try {
      r.m = std::stoi(f[0]);
      r.Q = parse_rational(f[1]);
      if (!f[2].empty()) r.count_all = std::stoll(f[2]);
      if (!f[3].empty()) r.count_sq = std::stoll(f[3]);
      r.theory_all = std::stod(f[4]);
      r.theory_sq_lower = std::stod(f[5]);
      r.theory_sq_upper = std::stod(f[6]);
      if (!f[9].empty()) r.wall_seconds = std::stod(f[9]);
      r.shard_count = std::stoul(f[10]);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("malformed CSV row: " + line);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("out-of-range value in CSV row: " + line);
    }
    if (r.count_all && r.count_sq && *r.count_sq > *r.count_all) {
      throw std::invalid_argument("count_sq exceeds count_all in row: " + line);
    }
    recompute_ratios(r);
    report.rows.push_back(std::move(r));
  }
  if (!header_seen) throw std::invalid_argument("missing CSV header");
  return report;
}

std::string to_json(const CensusReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  for (const auto& r : report.rows) {
    rows.push_back({{"m", r.m},
                    {"Q", r.Q.get_d()},
                    {"count_all", opt(r.count_all)},
                    {"count_sq", opt(r.count_sq)},
                    {"theory_all", r.theory_all},
                    {"theory_sq_lower", r.theory_sq_lower},
                    {"theory_sq_upper", r.theory_sq_upper},
                    {"ratio_all", opt(r.ratio_all)},
                    {"ratio_sq", opt(r.ratio_sq)},
                    {"wall_seconds", r.wall_seconds},
                    {"shard_count", r.shard_count}});
  }
  return rows.dump(2);
}

std::string run_key(CensusKind kind, int m, const Rational& Q) {
  std::string q = Q.get_num().get_str();
  if (Q.get_den() != 1) q += "_" + Q.get_den().get_str();
  return std::string(kind == CensusKind::all ? "all" : "sq") + "-m" + std::to_string(m) + "-Q" + q;
}

fs::path default_work_dir() {
  if (const char* env = std::getenv("SALEM_CENSUS_DIR"); env != nullptr && *env != '\0') return env;
  return "salem_census_work";
}

std::vector<std::size_t> shard_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order = identity_order(n);
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

AllRun run_all_census(int m, const Rational& Q, const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SalemSearch search(m, Q, config.precision_bits);
  if (search.estimated_candidates() > config.budget) throw BudgetExceeded(search.estimated_candidates());
  Checkpoint cp(config, CensusKind::all, m, Q, search.shard_count());
  auto parts = run_with_checkpoints<std::vector<SalemRecord>>(
      search.shard_count(), config, cp, [&](std::size_t i) { return search.run_shard(i); }, all_shard_lines,
      [&](const std::vector<std::string>& lines) { return all_shard_from_lines(lines, config.precision_bits); });
  AllRun out;
  for (auto& p : parts) {
    for (auto& r : p) out.records.push_back(std::move(r));
  }
  sort_records(out.records);
  out.row.m = m;
  out.row.Q = Q;
  out.row.count_all = static_cast<long long>(out.records.size());
  out.row.shard_count = search.shard_count();
  fill_theory(out.row);
  out.row.wall_seconds = seconds_since(start);
  return out;
}

SqRun run_sq_census(int m, const Rational& Q, const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SqCensusSearch search(m, Q);
  if (search.estimated_candidates() > config.budget) throw BudgetExceeded(search.estimated_candidates());
  Checkpoint cp(config, CensusKind::sq, m, Q, search.shard_count());
  auto parts = run_with_checkpoints<SqShardResult>(
      search.shard_count(), config, cp, [&](std::size_t i) { return search.run_shard(i); }, sq_shard_lines,
      sq_shard_from_lines);
  SqRun out;
  out.census = merge_sq_shards(std::move(parts), config.precision_bits);
  out.row.m = m;
  out.row.Q = Q;
  out.row.count_sq = static_cast<long long>(out.census.groups.size());
  out.row.shard_count = search.shard_count();
  fill_theory(out.row);
  out.row.wall_seconds = seconds_since(start);
  return out;
}

std::string record_stream(const std::vector<SalemRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_record_line(r) + "\n";
  return out;
}

std::string sq_stream(const SqCensus& census, int precision_bits) {
  std::string out;
  for (const auto& g : census.groups) {
    const std::string rec = to_record_line(g.record);
    for (const auto& w : g.witnesses) out += rec + " | " + to_witness_line(w, precision_bits) + "\n";
  }
  return out;
}

IntPoly parse_record_line(std::string_view line) {
  const std::string head = trim(line.substr(0, line.find('|')));
  const auto f = split(head, ',');
  if (f.size() < 5) throw std::invalid_argument("record line needs lambda, m and at least three coefficients");
  int m = 0;
  try {
    m = std::stoi(f[1]);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed m in record line");
  }
  std::string coeffs;
  for (std::size_t k = 2; k < f.size(); ++k) coeffs += (k > 2 ? "," : "") + trim(f[k]);
  IntPoly p = parse_poly(coeffs);
  if (p.degree() != 2 * m) throw std::invalid_argument("record line degree does not match m");
  return p;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0) throw std::invalid_argument("slope fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) throw std::invalid_argument("slope fit needs distinct x values");
  return (n * sxy - sx * sy) / den;
}

SweepResult run_sweep(CensusKind kind, int m, std::vector<Rational> Qs, const RunConfig& config) {
  std::sort(Qs.begin(), Qs.end());
  Qs.erase(std::unique(Qs.begin(), Qs.end()), Qs.end());
  SweepResult out;
  out.log_removed = kind == CensusKind::sq && (m == 3 || m == 4);
  if (kind == CensusKind::all) {
    out.expected_slope = m;
  } else {
    out.expected_slope = m == 1 ? 1.0 : m == 2 ? 1.5 : m / 2.0;
  }
  std::vector<double> xs, ys;
  for (const auto& Q : Qs) {
    try {
      CensusRow row = kind == CensusKind::all ? run_all_census(m, Q, config).row : run_sq_census(m, Q, config).row;
      const double count = static_cast<double>(kind == CensusKind::all ? *row.count_all : *row.count_sq);
      xs.push_back(Q.get_d());
      ys.push_back(out.log_removed ? count / std::log(Q.get_d()) : count);
      out.report.rows.push_back(std::move(row));
    } catch (const Cancelled&) {
      throw;
    } catch (const std::exception& e) {
      out.errors.push_back(q_text(Q) + ": " + e.what());
    }
  }
  out.fitted_slope = xs.size() >= 2 ? fit_loglog_slope(xs, ys) : std::nan("");
  return out;
}

}  // namespace salem
