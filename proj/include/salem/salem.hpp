// Salem number recognition and exhaustive enumeration by degree and height.
#pragma once

#include "salem/numeric.hpp"
#include "salem/poly.hpp"
#include "salem/roots.hpp"

#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace salem {

struct SalemRecord {
  PalindromicPoly min_poly;
  // Real enclosure of the unique root > 1.
  RootEnclosure lambda;
  int m = 0;

  [[nodiscard]] double lambda_approx() const { return lambda.center.re.to_double(); }
};

// Stream format "lambda_approx, m, c0, c1, ..., c2m".
std::string to_record_line(const SalemRecord& r);

// Orders by lambda, then by coefficient vector.
bool lambda_less(const SalemRecord& a, const SalemRecord& b);

// An irreducible cyclotomic polynomial Phi_order.
struct Cyclotomic {
  int order = 0;
};

struct ReducibleOrOther {
  std::string reason;
};

using Classification = std::variant<SalemRecord, Cyclotomic, ReducibleOrOther>;

// Throws std::invalid_argument for non-monic input or degree < 2.
Classification classify(const IntPoly& p, int precision_bits = 256);

inline constexpr int kMaxIrreducibleDegree = 24;

// Monic p of degree 1..24; throws std::invalid_argument otherwise.
bool is_irreducible(const IntPoly& p);

// Phi_d, computed once per process and cached.
IntPoly cyclotomic_poly(int d);
int euler_phi(int d);
// The smallest d <= max_order with Phi_d | p.
std::optional<std::pair<int, IntPoly>> cyclotomic_factor(const IntPoly& p, int max_order);

// Bounds |p_k| <= bound[k-1] for k = 1..m.
struct CoeffBox {
  int m = 0;
  std::vector<Integer> bound;
};

CoeffBox coeff_box(int m, const Rational& Q);

// Certified enclosure of lambda from the trace polynomial's root above 2,
// which must be unique.
RootEnclosure salem_lambda_from_trace(const IntPoly& trace, int precision_bits);

// Exact trace-side Salem test: T(2) != 0, T(-2) != 0, m-1 roots in (-2, 2),
// one root above 2, no cyclotomic factor. Does not bound lambda.
bool is_salem_trace(const IntPoly& trace);

// The root-location half of is_salem_trace: T(2) < 0, T(-2) != 0, m-1 roots
// in (-2, 2) and one above 2.
bool has_salem_trace_roots(const IntPoly& trace);
// Trace polynomials of Phi_d, d >= 3, phi(d) <= max_phi (cached).
std::vector<IntPoly> cyclotomic_traces(int max_phi);
bool has_cyclotomic_trace_factor(const IntPoly& trace, const std::vector<IntPoly>& psi);
// Orders d >= 3 with the trace of Phi_d dividing trace.
std::vector<int> cyclotomic_trace_orders(const IntPoly& trace);

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(double estimate)
      : std::runtime_error("enumeration budget exceeded: about " + std::to_string(static_cast<long double>(estimate)) +
                           " candidates"),
        estimate(estimate) {}
  double estimate;
};

struct EnumerationOptions {
  double budget = 1e9;
  int workers = 1;
  int precision_bits = 256;
  const std::atomic<bool>* cancel = nullptr;
};

// Trace-coordinate search over monic integer T of degree m with one root in
// (2, Q + 1/Q] and m-1 roots in (-2, 2). The outermost coefficient T_{m-1}
// (T_0 when m = 1) is split into shards, one value each.
class SalemSearch {
 public:
  SalemSearch(int m, Rational Q, int precision_bits = 256);

  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] const Rational& Q() const { return Q_; }
  [[nodiscard]] std::size_t shard_count() const { return outer_.size(); }
  [[nodiscard]] double estimated_candidates() const { return estimate_; }
  // Records of one shard, sorted by lambda.
  [[nodiscard]] std::vector<SalemRecord> run_shard(std::size_t index) const;

 private:
  int m_;
  Rational Q_;
  Rational trace_max_;  // Q + 1/Q
  int bits_;
  std::vector<Integer> outer_;
  double estimate_ = 0;
};

// All Salem numbers of degree 2m in (1, Q], sorted by lambda. Throws
// BudgetExceeded before doing any work when the candidate estimate exceeds
// the budget.
std::vector<SalemRecord> enumerate_salem(int m, const Rational& Q, const EnumerationOptions& opts = {});

// Merge helper: sorts by lambda_less.
void sort_records(std::vector<SalemRecord>& records);

}  // namespace salem
