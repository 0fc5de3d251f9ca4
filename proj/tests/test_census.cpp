#include <doctest.h>

#include "salem/census.hpp"
#include "salem/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace salem;
namespace fs = std::filesystem;

namespace {

RunConfig config_with(int workers) {
  RunConfig c;
  c.workers = workers;
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("salem_census_test_" + name);
  fs::remove_all(d);
  return d;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("run configuration limits") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.precision_bits = 63;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.precision_bits = 64;
  c.budget = 999;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.budget = 1000;
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(default_workers() >= 1);
}

TEST_CASE("run keys, work directory and shard order") {
  CHECK(run_key(CensusKind::all, 2, Rational(100)) == "all-m2-Q100");
  Rational q(11, 10);
  CHECK(run_key(CensusKind::sq, 3, q) == "sq-m3-Q11_10");
  ::setenv("SALEM_CENSUS_DIR", "/tmp/somewhere", 1);
  CHECK(default_work_dir() == fs::path("/tmp/somewhere"));
  ::unsetenv("SALEM_CENSUS_DIR");
  CHECK(default_work_dir() == fs::path("salem_census_work"));
  CHECK(shard_order(5, 0) == identity_order(5));
  for (std::uint64_t seed : {1ULL, 7ULL, 12345ULL}) {
    auto o = shard_order(50, seed);
    CHECK(o == shard_order(50, seed));
    std::sort(o.begin(), o.end());
    CHECK(o == identity_order(50));
  }
  CHECK(shard_order(50, 1) != identity_order(50));
}

TEST_CASE("theory columns") {
  CensusRow r;
  r.m = 1;
  r.Q = 10;
  r.count_all = 8;
  r.count_sq = 8;
  fill_theory(r);
  CHECK(r.theory_all == doctest::Approx(10));
  CHECK(r.theory_sq_upper == doctest::Approx(10));
  CHECK(*r.ratio_all == doctest::Approx(0.8));
  r.m = 2;
  r.Q = 100;
  r.count_all.reset();
  r.count_sq = 1246;
  fill_theory(r);
  CHECK(r.theory_sq_upper == doctest::Approx(4000.0 / 3));
  CHECK_FALSE(r.ratio_all.has_value());
  CHECK(*r.ratio_sq == doctest::Approx(1246 / (4000.0 / 3)));
}

TEST_CASE("CSV round trip and stale ratios") {
  CensusReport rep;
  for (int m = 1; m <= 3; ++m) {
    CensusRow r;
    r.m = m;
    r.Q = 50;
    r.count_all = 1000 * m;
    if (m != 2) r.count_sq = 10 * m;
    r.wall_seconds = 0.25;
    r.shard_count = 7;
    fill_theory(r);
    rep.rows.push_back(r);
  }
  const std::string csv = to_csv(rep);
  CHECK(csv.rfind(csv_header() + "\n", 0) == 0);
  const auto back = load_csv(csv);
  REQUIRE(back.rows.size() == 3);
  CHECK(to_csv(load_csv(to_csv(back))) == to_csv(back));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.rows[i].count_all == rep.rows[i].count_all);
    CHECK(back.rows[i].theory_sq_upper == doctest::Approx(rep.rows[i].theory_sq_upper).epsilon(1e-11));
    CHECK(*back.rows[i].ratio_all == doctest::Approx(*rep.rows[i].ratio_all).epsilon(1e-11));
  }
  CHECK_FALSE(back.rows[1].count_sq.has_value());

  // a tampered ratio column is ignored on load
  std::string tampered = csv;
  const std::string row1 = to_csv({{rep.rows[0]}}).substr(csv_header().size() + 1);
  const auto pos = tampered.find(row1);
  REQUIRE(pos != std::string::npos);
  std::stringstream ss(row1);
  std::vector<std::string> f;
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  f[7] = "123";
  std::string bad;
  for (std::size_t i = 0; i < f.size(); ++i) bad += (i ? "," : "") + f[i];
  tampered.replace(pos, row1.size() - 1, bad);
  CHECK(*load_csv(tampered).rows[0].ratio_all == doctest::Approx(*rep.rows[0].ratio_all));

  CHECK(load_csv("# comment\n" + csv + "\n").rows.size() == 3);
  CHECK_THROWS_AS(load_csv("m,Q\n1,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(load_csv(csv_header() + "\n1,2,3\n"), std::invalid_argument);
  CHECK_THROWS_AS(load_csv(csv_header() + "\n1,10,5,6,10,10,10,,,,1\n"), std::invalid_argument);
  CHECK_THROWS_AS(load_csv(csv_header() + "\nx,10,5,4,10,10,10,,,,1\n"), std::invalid_argument);
  const std::string j = to_json(rep);
  CHECK(j.find("\"count_sq\": null") != std::string::npos);
  CHECK(j.find("\"shard_count\": 7") != std::string::npos);
}

TEST_CASE("census runs") {
  const auto a = run_all_census(1, Rational(10), config_with(1));
  CHECK(*a.row.count_all == 8);
  CHECK(a.row.theory_all == doctest::Approx(10));
  CHECK(a.row.shard_count == 8);
  const auto s = run_sq_census(1, Rational(10), config_with(1));
  CHECK(*s.row.count_sq == 8);
  RunConfig tiny = config_with(1);
  tiny.budget = 1000;
  CHECK_THROWS_AS(run_all_census(3, Rational(100), tiny), BudgetExceeded);
  CHECK_THROWS_AS(run_sq_census(4, Rational(100), tiny), BudgetExceeded);
}

TEST_CASE("output is independent of worker count and seed") {
  for (const auto& [m, Q] : std::vector<std::pair<int, long>>{{1, 20}, {2, 20}}) {
    std::set<std::string> csv_all, csv_sq, rec_all, rec_sq;
    for (int workers : {1, 2, 8}) {
      for (std::uint64_t seed : {0ULL, 99ULL}) {
        RunConfig c = config_with(workers);
        c.seed = seed;
        const auto a = run_all_census(m, Rational(Q), c);
        const auto s = run_sq_census(m, Rational(Q), c);
        csv_all.insert(to_csv({{a.row}}, false));
        csv_sq.insert(to_csv({{s.row}}, false));
        rec_all.insert(record_stream(a.records));
        rec_sq.insert(sq_stream(s.census));
      }
    }
    CHECK(csv_all.size() == 1);
    CHECK(csv_sq.size() == 1);
    CHECK(rec_all.size() == 1);
    CHECK(rec_sq.size() == 1);
  }
}

TEST_CASE("record lines round-trip through classify") {
  const auto a = run_all_census(2, Rational(15), config_with(2));
  std::istringstream in(record_stream(a.records));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto c = classify(parse_record_line(line));
    REQUIRE(std::holds_alternative<SalemRecord>(c));
    CHECK(to_record_line(std::get<SalemRecord>(c)) == line);
    ++n;
  }
  CHECK(n == *a.row.count_all);
  const auto s = run_sq_census(2, Rational(15), config_with(2));
  std::istringstream sin(sq_stream(s.census));
  while (std::getline(sin, line)) {
    const auto c = classify(parse_record_line(line));
    CHECK(std::holds_alternative<SalemRecord>(c));
  }
  CHECK_THROWS_AS(parse_record_line("2.6, 2, 1, -3, 1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_record_line("2.6, 1"), std::invalid_argument);
}

TEST_CASE("checkpoint and resume") {
  const fs::path dir = fresh_dir("resume");
  RunConfig c = config_with(2);
  c.resume_dir = dir;
  const auto reference_all = run_all_census(2, Rational(20), config_with(1));
  const auto reference_sq = run_sq_census(2, Rational(20), config_with(1));

  const auto first = run_all_census(2, Rational(20), c);
  const fs::path run_dir = dir / run_key(CensusKind::all, 2, Rational(20));
  REQUIRE(fs::exists(run_dir / "completed.txt"));
  CHECK(lines_of(run_dir / "completed.txt").size() == first.row.shard_count);
  CHECK(record_stream(first.records) == record_stream(reference_all.records));

  // drop half the shards and resume
  std::vector<std::string> kept;
  const auto done = lines_of(run_dir / "completed.txt");
  for (std::size_t i = 0; i < done.size(); ++i) {
    if (i % 2 == 0) {
      kept.push_back(done[i]);
    } else {
      fs::remove(run_dir / ("shard-" + done[i] + ".txt"));
    }
  }
  {
    std::ofstream out(run_dir / "completed.txt");
    for (const auto& k : kept) out << k << "\n";
  }
  const auto resumed = run_all_census(2, Rational(20), c);
  CHECK(record_stream(resumed.records) == record_stream(reference_all.records));
  CHECK(to_csv({{resumed.row}}, false) == to_csv({{reference_all.row}}, false));

  // square-rootable runs keep witnesses and audit entries
  const auto sq1 = run_sq_census(2, Rational(20), c);
  const auto sq2 = run_sq_census(2, Rational(20), c);
  CHECK(sq_stream(sq1.census) == sq_stream(reference_sq.census));
  CHECK(sq_stream(sq2.census) == sq_stream(reference_sq.census));
  CHECK(sq2.census.audit.size() == reference_sq.census.audit.size());

  // a cancelled run leaves a resumable directory
  const fs::path dir2 = fresh_dir("cancel");
  std::atomic<bool> stop{true};
  RunConfig cc = config_with(1);
  cc.resume_dir = dir2;
  cc.cancel = &stop;
  CHECK_THROWS_AS(run_sq_census(2, Rational(30), cc), Cancelled);
  stop = false;
  const auto after = run_sq_census(2, Rational(30), cc);
  CHECK(sq_stream(after.census) == sq_stream(run_sq_census(2, Rational(30), config_with(1)).census));

  // a directory from another run is refused
  std::ofstream(dir2 / run_key(CensusKind::sq, 2, Rational(30)) / "meta.txt") << "other\n";
  CHECK_THROWS(run_sq_census(2, Rational(30), cc));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("log-log slope fit") {
  CHECK(fit_loglog_slope({1, 10, 100}, {3, 300, 30000}) == doctest::Approx(2.0));
  CHECK(fit_loglog_slope({2, 8}, {5, 10}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(fit_loglog_slope({1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_loglog_slope({1, 1}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(fit_loglog_slope({1, 2}, {0, 2}), std::invalid_argument);
}

TEST_CASE("sweeps") {
  const RunConfig c = config_with(1);
  const auto s1 = run_sweep(CensusKind::all, 1, {Rational(1000), Rational(10), Rational(100)}, c);
  REQUIRE(s1.report.rows.size() == 3);
  CHECK(s1.report.rows[0].Q == 10);
  CHECK(s1.report.rows[2].Q == 1000);
  CHECK(std::fabs(s1.fitted_slope - 1.0) <= 0.05);
  CHECK(s1.expected_slope == 1.0);

  const auto s2 = run_sweep(CensusKind::all, 2, {Rational(10), Rational(20), Rational(30)}, c);
  CHECK(std::fabs(s2.fitted_slope - 2.0) <= 0.2);

  const auto s3 = run_sweep(CensusKind::sq, 2, {Rational(25), Rational(100), Rational(400)}, c);
  CHECK(std::fabs(s3.fitted_slope - 1.5) <= 0.1);
  CHECK(s3.expected_slope == 1.5);
  CHECK_FALSE(s3.log_removed);
  CHECK(run_sweep(CensusKind::sq, 3, {Rational(10), Rational(20)}, c).log_removed);

  // a failing point is reported and the rest still run
  RunConfig tight = c;
  tight.budget = 5000;
  const auto s4 = run_sweep(CensusKind::all, 2, {Rational(10), Rational(20), Rational(1000)}, tight);
  CHECK(s4.report.rows.size() == 2);
  REQUIRE(s4.errors.size() == 1);
  CHECK(s4.errors[0].rfind("1000: ", 0) == 0);
}
