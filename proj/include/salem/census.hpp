// Census runs, checkpointing and reports comparing exact counts with the
// theoretical main terms.
#pragma once

#include "salem/numeric.hpp"
#include "salem/salem.hpp"
#include "salem/sqrt_root.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace salem {

enum class CensusKind { all, sq };
enum class OutputFormat { csv, json };

int default_workers();

struct RunConfig {
  int precision_bits = 256;
  double budget = 1e9;
  int workers = default_workers();
  OutputFormat format = OutputFormat::csv;
  std::uint64_t seed = 0;
  // Checkpoint directory root; no checkpoints when empty.
  std::optional<std::filesystem::path> resume_dir;
  const std::atomic<bool>* cancel = nullptr;

  // Throws std::invalid_argument unless precision_bits >= 64, budget >= 1e3
  // and workers >= 1.
  void validate() const;
};

struct CensusRow {
  int m = 0;
  Rational Q;
  std::optional<long long> count_all;
  std::optional<long long> count_sq;
  double theory_all = 0;
  double theory_sq_lower = 0;
  double theory_sq_upper = 0;
  std::optional<double> ratio_all;
  std::optional<double> ratio_sq;
  double wall_seconds = 0;
  std::size_t shard_count = 0;
};

struct CensusReport {
  std::vector<CensusRow> rows;
};

// Theory columns from the asymptotic main terms, ratios from the counts.
void fill_theory(CensusRow& row);

std::string csv_header();
// Numbers with 12 significant digits; absent counts and ratios are empty
// fields. Without timing the wall_seconds field is left empty.
std::string to_csv(const CensusReport& report, bool with_timing = true);
// Ignores blank lines and lines starting with '#'. Ratios are recomputed
// from the counts and theory columns. Throws std::invalid_argument on a
// malformed line or when count_sq > count_all.
CensusReport load_csv(std::string_view text);
std::string to_json(const CensusReport& report);

// "all-m2-Q100", "sq-m3-Q11_10"
std::string run_key(CensusKind kind, int m, const Rational& Q);
// $SALEM_CENSUS_DIR, else ./salem_census_work
std::filesystem::path default_work_dir();
// A permutation of 0..n-1 determined by seed; seed 0 keeps the identity.
std::vector<std::size_t> shard_order(std::size_t n, std::uint64_t seed);

struct AllRun {
  std::vector<SalemRecord> records;
  CensusRow row;
};

struct SqRun {
  SqCensus census;
  CensusRow row;
};

// Budget is checked before any shard runs (BudgetExceeded). With a resume
// directory, each finished shard is written to DIR/<run key>/ and listed in
// completed.txt, and shards already listed are loaded instead of rerun.
// Cancellation raises Cancelled after in-flight shards are checkpointed.
AllRun run_all_census(int m, const Rational& Q, const RunConfig& config);
SqRun run_sq_census(int m, const Rational& Q, const RunConfig& config);

// One record line per Salem number.
std::string record_stream(const std::vector<SalemRecord>& records);
// "<record line> | <witness line>" per witness.
std::string sq_stream(const SqCensus& census, int precision_bits = 256);
// Polynomial from a record or stream line; checks the stated m.
IntPoly parse_record_line(std::string_view line);

// Least-squares slope of log y against log x.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepResult {
  CensusReport report;  // rows sorted by Q
  double fitted_slope = 0;
  double expected_slope = 0;
  // Square-rootable sweeps with m in {3, 4} fit count / log Q.
  bool log_removed = false;
  std::vector<std::string> errors;  // per-point failures, "Q: message"
};

// Failing points are reported in errors and skipped.
SweepResult run_sweep(CensusKind kind, int m, std::vector<Rational> Qs, const RunConfig& config);

}  // namespace salem
