#include <doctest.h>

#include "salem/census.hpp"
#include "salem/sqrt_root.hpp"

#include <json.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

using namespace salem;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + quote(SALEM_CENSUS_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Result r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// CSV text with the wall_seconds column blanked.
std::string without_timing(const std::string& csv) {
  return to_csv(load_csv(csv), false);
}

}  // namespace

TEST_CASE("check") {
  auto r = run("check 'x^2-3x+1'");
  CHECK(r.code == 0);
  CHECK(r.out.find("class: Salem") != std::string::npos);
  CHECK(r.out.find("lambda: 2.618") != std::string::npos);
  r = run("check 'x^2+x+1'");
  CHECK(r.code == 1);
  CHECK(r.out.find("Cyclotomic (order 3)") != std::string::npos);
  r = run("check 'x^3-2'");
  CHECK(r.code == 1);
  CHECK(r.out.find("ReducibleOrOther") != std::string::npos);
  CHECK(run("check 'x^2-3x+'").code == 2);
  CHECK(run("check '2x^2-3x+2'").code == 2);
  r = run("--format json check 'x^4-x^3-x^2-x+1'");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["class"] == "Salem");
  CHECK(j["m"] == 2);
}

TEST_CASE("sqroot") {
  auto r = run("sqroot 'x^8-56x^7-157x^6-228x^5-247x^4-228x^3-157x^2-56x+1'");
  CHECK(r.code == 0);
  CHECK(r.out.find("witnesses: 4") != std::string::npos);
  for (const char* a : {"\n2; ", "\n6; ", "\n26; ", "\n78; "}) CHECK(r.out.find(a) != std::string::npos);
  std::size_t verified = 0;
  for (std::size_t p = r.out.find("verified"); p != std::string::npos; p = r.out.find("verified", p + 1)) ++verified;
  CHECK(verified == 4);

  r = run("sqroot 'x^2-3x+1'");
  CHECK(r.code == 0);
  CHECK(r.out.find("5; 1,1; -1; 2.61803398874989") != std::string::npos);

  // a sextic Salem polynomial without witnesses
  std::string lonely;
  for (const auto& s : enumerate_salem(3, Rational(10))) {
    if (!is_square_rootable(s)) {
      lonely = to_string(s.min_poly.poly());
      break;
    }
  }
  REQUIRE(!lonely.empty());
  r = run("sqroot " + quote(lonely));
  CHECK(r.code == 1);
  CHECK(r.out.find("witnesses: 0") != std::string::npos);

  CHECK(run("sqroot 'x^2+x+1'").code == 2);
  CHECK(run("sqroot 'x^^2'").code == 2);
}

TEST_CASE("count, budget and input errors") {
  auto r = run("count --m 1 --max 10");
  CHECK(r.code == 0);
  const auto rep = load_csv(r.out);
  REQUIRE(rep.rows.size() == 1);
  CHECK(*rep.rows[0].count_all == 8);
  CHECK(rep.rows[0].theory_all == doctest::Approx(10));

  r = run("count --m 1 --max 10 --sq");
  CHECK(*load_csv(r.out).rows[0].count_sq == 8);

  r = run("count --m 2 --max 100 --sq --shards 1");
  const double c = static_cast<double>(*load_csv(r.out).rows[0].count_sq);
  CHECK(std::fabs(c - 4000.0 / 3) <= 0.15 * 4000.0 / 3);

  CHECK(run("--budget 1000 count --m 3 --max 100").code == 3);
  CHECK(run("count --m 3 --max 100 --budget 1000").code == 3);
  CHECK(run("--budget 10 count --m 1 --max 10").code == 2);
  CHECK(run("--precision-bits 32 count --m 1 --max 10").code == 2);
  CHECK(run("count --m 1 --max ten").code == 2);
  CHECK(run("count --m 0 --max 10").code == 2);
  CHECK(run("count --max 10").code == 2);
  CHECK(run("bogus").code == 2);
  CHECK(run("--format xml count --m 1 --max 10").code == 2);

  r = run("--format json count --m 1 --max 10");
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j[0]["count_all"] == 8);
}

TEST_CASE("count output is independent of --shards") {
  for (const std::string flags : {"--m 1 --max 20", "--m 2 --max 20", "--m 2 --max 20 --sq"}) {
    const fs::path dir = fs::temp_directory_path() / "salem_cli_streams";
    fs::create_directories(dir);
    std::string csv_ref, rec_ref;
    for (int shards : {1, 2, 8}) {
      const fs::path rec = dir / ("records-" + std::to_string(shards) + ".txt");
      const auto r = run("--shards " + std::to_string(shards) + " count " + flags + " --records " + quote(rec.string()));
      REQUIRE(r.code == 0);
      std::ifstream in(rec);
      std::stringstream ss;
      ss << in.rdbuf();
      if (shards == 1) {
        csv_ref = without_timing(r.out);
        rec_ref = ss.str();
        CHECK(!rec_ref.empty());
      } else {
        CHECK(without_timing(r.out) == csv_ref);
        CHECK(ss.str() == rec_ref);
      }
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("streamed records re-verify through check") {
  const auto r = run("count --m 2 --max 12 --records -");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.rfind("m,Q", 0) == 0) break;
    const auto c = run("check " + quote(line));
    CHECK(c.code == 0);
    CHECK(c.out.find("record: " + line) != std::string::npos);
    ++n;
  }
  CHECK(n > 10);
  const auto s = run("count --m 2 --max 12 --sq --records -");
  std::istringstream sin(s.out);
  std::getline(sin, line);
  CHECK(run("check " + quote(line)).code == 0);
  CHECK(run("sqroot " + quote(line)).code == 0);
}

TEST_CASE("sweep") {
  auto r = run("sweep --m 2 --max 10,20,30");
  CHECK(r.code == 0);
  const auto rep = load_csv(r.out);
  CHECK(rep.rows.size() == 3);
  const auto pos = r.out.find("# fitted_slope=");
  REQUIRE(pos != std::string::npos);
  const double slope = std::stod(r.out.substr(pos + 15));
  CHECK(std::fabs(slope - 2.0) <= 0.2);
  r = run("--format json sweep --m 1 --max 10,100,1000");
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::fabs(j["fitted_slope"].get<double>() - 1.0) <= 0.05);
  CHECK(j["rows"].size() == 3);
  // one failing point: reported, others kept, negative exit
  r = run("--budget 5000 sweep --m 2 --max 10,20,1000");
  CHECK(r.code == 1);
  CHECK(load_csv(r.out).rows.size() == 2);
}

TEST_CASE("theory") {
  auto r = run("theory --m 3 --max 100");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  const double expect = 32.0 / 9 * 6 / (M_PI * M_PI) * 1000 * std::log(100.0);
  CHECK(j["sq_upper"].get<double>() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(j["all_main"].get<double>() == doctest::Approx(32.0 / 9 * 1e6).epsilon(1e-12));
  r = run("theory --dim 5 --length 3");
  j = nlohmann::json::parse(r.out);
  CHECK(j["delta57"] == 1);
  r = run("theory --dim 4 --length 3");
  j = nlohmann::json::parse(r.out);
  CHECK(j["c_prime"].get<double>() == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(j["delta57"] == 0);
  r = run("theory --dim 8 --length 500");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["gamma_h"].is_string());
  CHECK(run("theory --dim 3 --length 3").code == 2);
  CHECK(run("theory --m 3").code == 2);
  CHECK(run("theory").code == 2);
}

TEST_CASE("resume directory and environment override") {
  const fs::path dir = fs::temp_directory_path() / "salem_cli_resume";
  fs::remove_all(dir);
  auto r = run("--resume " + quote(dir.string()) + " count --m 2 --max 15 --sq");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "sq-m2-Q15" / "completed.txt"));
  const auto again = run("--resume " + quote(dir.string()) + " count --m 2 --max 15 --sq");
  CHECK(without_timing(again.out) == without_timing(r.out));

  const fs::path envdir = fs::temp_directory_path() / "salem_cli_env";
  fs::remove_all(envdir);
  r = run("count --m 1 --max 30 --resume", "SALEM_CENSUS_DIR=" + quote(envdir.string()));
  CHECK(r.code == 0);
  CHECK(fs::exists(envdir / "all-m1-Q30" / "completed.txt"));
  fs::remove_all(dir);
  fs::remove_all(envdir);
}

TEST_CASE("SIGINT drains at a shard boundary and keeps checkpoints") {
  const fs::path dir = fs::temp_directory_path() / "salem_cli_sigint";
  fs::remove_all(dir);
  const pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    const int devnull = ::open("/dev/null", O_WRONLY);
    ::dup2(devnull, 1);
    ::dup2(devnull, 2);
    const std::string d = dir.string();
    ::execl(SALEM_CENSUS_BIN, SALEM_CENSUS_BIN, "--shards", "1", "--resume", d.c_str(), "count", "--m", "3", "--max",
            "2000", "--sq", static_cast<char*>(nullptr));
    ::_exit(127);
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(1500));
  ::kill(pid, SIGINT);
  int status = 0;
  ::waitpid(pid, &status, 0);
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 130);
  std::ifstream in(dir / "sq-m3-Q2000" / "completed.txt");
  std::string line;
  int done = 0;
  while (std::getline(in, line)) ++done;
  CHECK(done > 0);
  fs::remove_all(dir);
}
