// Closed-form constants and main-term predictions for Salem number counts,
// square-free Dirichlet sums, and the mean multiplicity bound for lengths of
// closed geodesics.
#pragma once

#include "salem/numeric.hpp"

#include <string>
#include <vector>

namespace salem {

inline constexpr mpfr_prec_t kTheoryBits = 128;

// w_m = 2^{m(m+1)}/(m+1) * prod_{k<m} (k!)^2/(2k+1)!.
Rational w(int m);
// w(m) <= 4^m / sqrt((m+1)!), decided exactly.
bool w_upper_bound_check(int m);

// Q^{1/2} for m <= 2, log Q for m in {3, 4}, 1 for m >= 5.
BigFloat eta(const BigFloat& Q, int m);

// Square-free flags for 0..x, from a process-wide sieve grown on demand.
std::vector<bool> squarefree_flags(long x);

// Sum of 1/n over square-free n <= x, exact.
Rational squarefree_harmonic(long x);
// The same sum rounded to bits of precision.
BigFloat squarefree_harmonic_value(long x, mpfr_prec_t bits = kTheoryBits);

// Riemann zeta for real s > 1 by Euler-Maclaurin, absolute error below
// 1e-25 at the default precision. Throws std::domain_error for s <= 1.
BigFloat zeta(const BigFloat& s);
// zeta(s) / zeta(2s), the Dirichlet series of square-free n^{-s}.
BigFloat squarefree_zeta(const BigFloat& s);
// Sum of n^{-s} over square-free n <= x.
BigFloat partial_sum(const BigFloat& s, long x);

enum class PredictionKind { all_salem, sq_salem_lower, sq_salem_upper, sq_salem_main };
std::string to_string(PredictionKind kind);

struct TheoryPrediction {
  int m = 0;
  BigFloat Q;
  PredictionKind kind = PredictionKind::all_salem;
  BigFloat value;
};

struct SqPrediction {
  TheoryPrediction lower;
  TheoryPrediction upper;
  TheoryPrediction main;
};

// Main terms for square-rootable Salem numbers of degree 2m in (1, Q]:
//   m = 1: Q;  m = 2: (4/3) Q^{3/2};
//   m = 3, 4: w_{m-1} (6/pi^2) Q^{m/2} log Q;
//   m >= 5: w_{m-1} zeta(k/2)/zeta(k) Q^{m/2} with k = floor((m+1)/2).
// For even m >= 4 the lower term carries 2^{-2m}; main equals upper.
SqPrediction predict_sq_count(int m, const BigFloat& Q);
// w_{m-1} Q^m
TheoryPrediction predict_all_count(int m, const BigFloat& Q);

struct LatticePrediction {
  BigFloat value;        // w_{m-1} R^m / det
  BigFloat determinant;  // alpha^{k/2}, k = floor((m+1)/2)
};

// Main term for the witnesses of one square-free alpha with lambda_q <= R.
// Throws std::invalid_argument for alpha not square-free or R <= 1.
LatticePrediction predict_P_m_alpha(int m, const Integer& alpha, const BigFloat& R);

// Sum of predict_P_m_alpha over square-free alpha <= (binom(2m, m) R)^2.
// Terms up to direct_limit are summed; the rest uses the square-free
// density 6/pi^2 under an integral.
BigFloat sum_P_m_alpha(int m, const BigFloat& R, long direct_limit = 1000000);

// e^{(n-1)L} / ((n-1)L)
BigFloat margulis_curve(int n, const BigFloat& L);

// Main-term proxy for the number of distinct lengths up to L in dimension n:
// even n sums predict_all_count(m, e^L) over m <= n/2; odd n sums the upper
// square-rootable main terms at e^{2L} over m <= (n+1)/2.
BigFloat distinct_length_bound(int n, const BigFloat& L);

// 1 for n in {5, 7}, else 0.
int delta57(int n);

// 1/((n-1) w_{[(n+1)/2]-1}) times 1, pi^2/6, or zeta(k)/zeta(k/2) with
// k = [(n+3)/4], for even n, n in {5, 7}, odd n >= 9.
BigFloat c_prime(int n);

struct BoundReport {
  int n = 0;
  BigFloat L;
  BigFloat gamma_h;
  BigFloat distinct_lengths_bound;
  BigFloat mean_mult_lower;
  BigFloat c_prime;
  int delta57 = 0;
  // Limit of mean_mult_lower * L^{1+delta57} / e^{([n/2]-1)L}. Equals
  // c_prime except for n in {5, 7}, where log(e^{2L}) = 2L halves it.
  BigFloat limit_constant;
};

// Throws std::invalid_argument for n < 4 or L <= 0. margulis_scale
// multiplies the Margulis curve.
BoundReport mean_mult_bound(int n, const BigFloat& L, const BigFloat& margulis_scale = BigFloat(1.0, kTheoryBits));

}  // namespace salem
