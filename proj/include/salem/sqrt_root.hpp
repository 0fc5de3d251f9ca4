// Square-rootability over Q: witnesses (alpha, q), their verification, and
// the census of witness pairs by lattice enumeration.
//
// A witness for the Salem polynomial p of degree 2m is a monic palindromic
// q(x) = A(x^2) + sqrt(alpha) x B(x^2) with integer A, B and square-free
// alpha > 0 such that q(x) q(-x) = p(x^2), equivalently
// A(y)^2 - alpha y B(y)^2 = p(y), and whose root outside the unit disk is
// positive.
#pragma once

#include "salem/numeric.hpp"
#include "salem/poly.hpp"
#include "salem/salem.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace salem {

struct SqrtDecomposition {
  Integer alpha;
  IntPoly A;  // monic, degree m
  IntPoly B;  // degree <= m - 1
  PalindromicPoly source;

  // q_0 .. q_2m: even k plain integers, odd k multipliers of sqrt(alpha).
  [[nodiscard]] std::vector<Integer> mixed_coeffs() const;
  friend bool operator==(const SqrtDecomposition& a, const SqrtDecomposition& b) {
    return a.alpha == b.alpha && a.A == b.A && a.B == b.B && a.source == b.source;
  }
};

// Orders by alpha, then A, then B.
bool witness_less(const SqrtDecomposition& a, const SqrtDecomposition& b);

struct Verification {
  bool ok = false;
  std::string failed_clause;  // empty when ok
  explicit operator bool() const { return ok; }
};

// Clauses, checked in this order: "alpha-square-free", "degree",
// "odd-part-nonzero", "palindromic", "identity", "salem-source",
// "root-sign", "root-of-unity".
Verification verify_decomposition(const SqrtDecomposition& d);

// n = s k^2 with s square-free. Requires n >= 1.
std::pair<Integer, Integer> square_free_part(const Integer& n);
bool is_square_free(const Integer& n);

// Every witness for the Salem number of s, deduplicated and sorted. Searches
// 2^(m-1) sign choices for square roots of the roots of p. Throws
// RootCertificationError if rounding stays ambiguous at 8192 bits.
std::vector<SqrtDecomposition> find_decompositions(const SalemRecord& s, int precision_bits = 256);
bool is_square_rootable(const SalemRecord& s, int precision_bits = 256);

// lambda_q^2 for q's root outside the unit disk, by Newton iteration on q.
BigFloat phi(const SqrtDecomposition& d, int precision_bits = 256);

// "alpha; A coefficients; B coefficients; lambda_sq approx"
std::string to_witness_line(const SqrtDecomposition& d, int precision_bits = 256);

// A candidate that passed every test except the cyclotomic one, and whose
// roots of unity all have multiplicative order above 4m.
struct AuditEntry {
  Integer alpha;
  IntPoly A;
  IntPoly B;
  IntPoly p;
  std::vector<int> orders;
};

struct SqHit {
  SqrtDecomposition witness;
  IntPoly trace;  // trace polynomial of the source
};

struct SqShardResult {
  std::vector<SqHit> hits;
  std::vector<AuditEntry> audit;
};

// Census of witness pairs (alpha, q) with lambda_q^2 <= Q, in trace
// coordinates: q(x) = x^m T(x + 1/x) with T = E + sqrt(alpha) O. Shards are
// (alpha, O_{m-1}) pairs in increasing order. An optional alpha restricts the
// search to one lattice.
class SqCensusSearch {
 public:
  SqCensusSearch(int m, Rational Q, std::optional<Integer> only_alpha = std::nullopt);

  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] const Rational& Q() const { return Q_; }
  [[nodiscard]] std::size_t shard_count() const { return shards_.size(); }
  [[nodiscard]] double estimated_candidates() const { return estimate_; }
  [[nodiscard]] const Integer& alpha_max() const { return alpha_max_; }
  [[nodiscard]] std::pair<Integer, Integer> shard(std::size_t index) const { return shards_.at(index); }
  [[nodiscard]] SqShardResult run_shard(std::size_t index) const;

 private:
  int m_;
  Rational Q_;
  Rational trace_max_p_;  // Q + 1/Q
  Rational tau_max_;      // upper bound for the large root of T
  Integer alpha_max_;
  std::vector<std::pair<Integer, Integer>> shards_;
  std::vector<IntPoly> psi_;
  double estimate_ = 0;
};

struct SqGroup {
  SalemRecord record;
  std::vector<SqrtDecomposition> witnesses;
};

struct SqCensus {
  std::vector<SqGroup> groups;  // sorted by lambda
  std::vector<AuditEntry> audit;
};

// Groups hits by source polynomial and computes lambda once per group.
SqCensus merge_sq_shards(std::vector<SqShardResult> parts, int precision_bits = 256);

std::vector<SqrtDecomposition> enumerate_P_m_alpha(int m, const Integer& alpha, const Rational& R,
                                                   const EnumerationOptions& opts = {});
SqCensus enumerate_sq_census(int m, const Rational& Q, const EnumerationOptions& opts = {});

}  // namespace salem
