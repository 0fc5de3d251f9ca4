#include "salem/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace salem {

namespace {

Rational rat(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

BigFloat bf(long v, mpfr_prec_t bits = kTheoryBits) { return BigFloat(v, bits); }
BigFloat bf(const Rational& v, mpfr_prec_t bits = kTheoryBits) { return BigFloat(v, bits); }

mpfr_prec_t bits_of(const BigFloat& x) { return std::max<mpfr_prec_t>(x.prec(), kTheoryBits); }

BigFloat widen(const BigFloat& x) {
  BigFloat out(bits_of(x));
  mpfr_set(out.get(), x.get(), MPFR_RNDN);
  return out;
}

BigFloat six_over_pi_sq(mpfr_prec_t bits) {
  const BigFloat p = pi(bits);
  return bf(6, bits) / (p * p);
}

// B_{2k} for k = 1..10
const Rational& bernoulli(int k) {
  static const std::vector<Rational> table = [] {
    const std::vector<std::pair<long, long>> raw = {{1, 6},     {-1, 30},     {1, 42},     {-1, 30},  {5, 66},
                                                    {-691, 2730}, {7, 6}, {-3617, 510}, {43867, 798}, {-174611, 330}};
    std::vector<Rational> out;
    for (const auto& [n, d] : raw) {
      out.push_back(rat(n, d));
    }
    return out;
  }();
  return table.at(static_cast<std::size_t>(k - 1));
}

// n^{-s}, with a root-free path for integral and half-integral s.
class NegPower {
 public:
  explicit NegPower(const BigFloat& s) : s_(widen(s)) {
    const Rational twice = (s_.to_rational() * 2);
    if (twice.get_den() == 1 && twice.get_num().fits_slong_p() && twice > 0) {
      half_steps_ = twice.get_num().get_si();
    }
  }
  BigFloat operator()(long n) const {
    const mpfr_prec_t bits = s_.prec();
    if (half_steps_ > 0) {
      BigFloat x(bits);
      mpfr_ui_pow_ui(x.get(), static_cast<unsigned long>(n), static_cast<unsigned long>(half_steps_ / 2), MPFR_RNDN);
      if (half_steps_ % 2 == 1) x *= sqrt(bf(n, bits));
      BigFloat out(bits);
      mpfr_ui_div(out.get(), 1, x.get(), MPFR_RNDN);
      return out;
    }
    return pow(bf(n, bits), -s_);
  }

 private:
  BigFloat s_;
  long half_steps_ = 0;
};

}  // namespace

Rational w(int m) {
  if (m < 0) throw std::invalid_argument("w: m must be nonnegative");
  // w_0 = 1, w_{j+1}/w_j = 2^{2(j+1)} (j+1)/(j+2) (j!)^2/(2j+1)!
  Rational out(1);
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<unsigned long>(j);
    const Integer f = factorial(ju);
    Rational step(pow_int(2, 2 * (ju + 1)) * (j + 1) * f * f, Integer(j + 2) * factorial(2 * ju + 1));
    step.canonicalize();
    out *= step;
  }
  return out;
}

bool w_upper_bound_check(int m) {
  const Rational v = w(m);
  const auto mu = static_cast<unsigned long>(m);
  // w^2 (m+1)! <= 16^m, both sides nonnegative
  return v * v * Rational(factorial(mu + 1)) <= Rational(pow_int(16, mu));
}

BigFloat eta(const BigFloat& Q, int m) {
  if (m < 1) throw std::invalid_argument("eta: m must be positive");
  if (Q <= bf(1, Q.prec())) throw std::invalid_argument("eta: Q must exceed 1");
  const BigFloat q = widen(Q);
  if (m <= 2) return sqrt(q);
  if (m <= 4) return log(q);
  return bf(1, q.prec());
}

std::vector<bool> squarefree_flags(long x) {
  if (x < 0) throw std::invalid_argument("squarefree_flags: negative bound");
  static std::mutex mu;
  static std::vector<bool> table;
  std::lock_guard lock(mu);
  const auto need = static_cast<std::size_t>(x) + 1;
  if (table.size() < need) {
    const std::size_t size = std::max(need, table.size() * 2);
    std::vector<bool> t(size, true);
    t[0] = false;
    for (std::size_t p = 2; p * p < size; ++p) {
      for (std::size_t k = p * p; k < size; k += p * p) t[k] = false;
    }
    table = std::move(t);
  }
  return {table.begin(), table.begin() + static_cast<std::ptrdiff_t>(need)};
}

Rational squarefree_harmonic(long x) {
  if (x < 1) throw std::invalid_argument("squarefree_harmonic: x must be positive");
  const auto flags = squarefree_flags(x);
  std::vector<long> ns;
  for (long n = 1; n <= x; ++n) {
    if (flags[static_cast<std::size_t>(n)]) ns.push_back(n);
  }
  // Binary splitting: sum over [lo, hi) as num/den, reduced once at the end.
  struct Frac {
    Integer num, den;
  };
  auto rec = [&](auto&& self, std::size_t lo, std::size_t hi) -> Frac {
    if (hi - lo == 1) return {1, ns[lo]};
    const std::size_t mid = lo + (hi - lo) / 2;
    const Frac a = self(self, lo, mid);
    const Frac b = self(self, mid, hi);
    return {a.num * b.den + b.num * a.den, a.den * b.den};
  };
  const Frac f = rec(rec, 0, ns.size());
  Rational out(f.num, f.den);
  out.canonicalize();
  return out;
}

BigFloat squarefree_harmonic_value(long x, mpfr_prec_t bits) {
  if (x < 1) throw std::invalid_argument("squarefree_harmonic_value: x must be positive");
  return partial_sum(BigFloat(1L, bits), x);
}

BigFloat zeta(const BigFloat& s_in) {
  const BigFloat s = widen(s_in);
  const mpfr_prec_t bits = s.prec();
  const BigFloat one = bf(1, bits);
  if (s <= one) throw std::domain_error("zeta: s must exceed 1");
  constexpr long N = 40;
  const NegPower neg(s);
  BigFloat sum(0L, bits);
  for (long n = 1; n < N; ++n) sum += neg(n);
  const BigFloat nN = bf(N, bits);
  const BigFloat tail = neg(N);  // N^{-s}
  sum += tail * nN / (s - one);
  sum += tail / bf(2, bits);
  // sum_k B_2k/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
  BigFloat rising = s;    // s(s+1)...(s+2k-2)
  BigFloat npow = tail / nN;  // N^{-s-2k+1}
  for (int k = 1; k <= 10; ++k) {
    const Rational coef = bernoulli(k) / Rational(factorial(static_cast<unsigned long>(2 * k)));
    sum += bf(coef, bits) * rising * npow;
    rising *= (s + bf(2 * k - 1, bits)) * (s + bf(2 * k, bits));
    npow /= nN * nN;
  }
  return sum;
}

BigFloat squarefree_zeta(const BigFloat& s) {
  const BigFloat s2 = widen(s) * bf(2, bits_of(s));
  return zeta(s) / zeta(s2);
}

BigFloat partial_sum(const BigFloat& s, long x) {
  const mpfr_prec_t bits = bits_of(s);
  BigFloat sum(0L, bits);
  if (x < 1) return sum;
  const auto flags = squarefree_flags(x);
  const NegPower neg(s);
  for (long n = 1; n <= x; ++n) {
    if (flags[static_cast<std::size_t>(n)]) sum += neg(n);
  }
  return sum;
}

std::string to_string(PredictionKind kind) {
  switch (kind) {
    case PredictionKind::all_salem:
      return "all_salem";
    case PredictionKind::sq_salem_lower:
      return "sq_salem_lower";
    case PredictionKind::sq_salem_upper:
      return "sq_salem_upper";
    case PredictionKind::sq_salem_main:
      return "sq_salem_main";
  }
  return "unknown";
}

SqPrediction predict_sq_count(int m, const BigFloat& Q_in) {
  if (m < 1) throw std::invalid_argument("predict_sq_count: m must be positive");
  const BigFloat Q = widen(Q_in);
  const mpfr_prec_t bits = Q.prec();
  if (Q <= bf(1, bits)) throw std::invalid_argument("predict_sq_count: Q must exceed 1");
  const BigFloat half_power = pow(Q, bf(rat(m, 2), bits));
  BigFloat main(bits);
  if (m == 1) {
    main = Q;
  } else if (m == 2) {
    main = bf(rat(4, 3), bits) * pow(Q, bf(rat(3, 2), bits));
  } else if (m <= 4) {
    main = bf(w(m - 1), bits) * six_over_pi_sq(bits) * half_power * log(Q);
  } else {
    const int k = (m + 1) / 2;
    const BigFloat ks = bf(k, bits);
    main = bf(w(m - 1), bits) * (zeta(ks / bf(2, bits)) / zeta(ks)) * half_power;
  }
  BigFloat lower = main;
  if (m % 2 == 0 && m >= 4) lower = ldexp(main, -2L * m);
  return {{m, Q, PredictionKind::sq_salem_lower, lower},
          {m, Q, PredictionKind::sq_salem_upper, main},
          {m, Q, PredictionKind::sq_salem_main, main}};
}

TheoryPrediction predict_all_count(int m, const BigFloat& Q_in) {
  if (m < 1) throw std::invalid_argument("predict_all_count: m must be positive");
  const BigFloat Q = widen(Q_in);
  return {m, Q, PredictionKind::all_salem, bf(w(m - 1), Q.prec()) * pow(Q, bf(m, Q.prec()))};
}

LatticePrediction predict_P_m_alpha(int m, const Integer& alpha, const BigFloat& R_in) {
  if (m < 1) throw std::invalid_argument("predict_P_m_alpha: m must be positive");
  if (alpha < 1) throw std::invalid_argument("predict_P_m_alpha: alpha must be positive");
  for (Integer p = 2; p * p <= alpha; ++p) {
    if (alpha % (p * p) == 0) throw std::invalid_argument("predict_P_m_alpha: alpha must be square-free");
  }
  const BigFloat R = widen(R_in);
  const mpfr_prec_t bits = R.prec();
  if (R <= bf(1, bits)) throw std::invalid_argument("predict_P_m_alpha: R must exceed 1");
  const int k = (m + 1) / 2;
  const BigFloat det = pow(BigFloat(alpha, bits), bf(rat(k, 2), bits));
  return {bf(w(m - 1), bits) * pow(R, bf(m, bits)) / det, det};
}

BigFloat sum_P_m_alpha(int m, const BigFloat& R_in, long direct_limit) {
  if (m < 1) throw std::invalid_argument("sum_P_m_alpha: m must be positive");
  const BigFloat R = widen(R_in);
  const mpfr_prec_t bits = R.prec();
  const int k = (m + 1) / 2;
  const BigFloat s = bf(rat(k, 2), bits);
  const BigFloat c0R = BigFloat(binomial(static_cast<unsigned long>(2 * m), static_cast<unsigned long>(m)), bits) * R;
  const BigFloat X = c0R * c0R;
  BigFloat sum(bits);
  if (X <= bf(direct_limit, bits)) {
    sum = partial_sum(s, mpfr_get_si(X.get(), MPFR_RNDD));
  } else {
    sum = partial_sum(s, direct_limit);
    const BigFloat D = bf(direct_limit, bits);
    const BigFloat one = bf(1, bits);
    BigFloat integral(bits);
    if (s == one) {
      integral = log(X / D);
    } else {
      integral = (pow(X, one - s) - pow(D, one - s)) / (one - s);
    }
    sum += six_over_pi_sq(bits) * integral;
  }
  return bf(w(m - 1), bits) * pow(R, bf(m, bits)) * sum;
}

BigFloat margulis_curve(int n, const BigFloat& L_in) {
  if (n < 2) throw std::invalid_argument("margulis_curve: n must be at least 2");
  const BigFloat L = widen(L_in);
  if (L.sign() <= 0) throw std::invalid_argument("margulis_curve: L must be positive");
  const BigFloat x = bf(n - 1, L.prec()) * L;
  return exp(x) / x;
}

BigFloat distinct_length_bound(int n, const BigFloat& L_in) {
  if (n < 4) throw std::invalid_argument("distinct_length_bound: n must be at least 4");
  const BigFloat L = widen(L_in);
  if (L.sign() <= 0) throw std::invalid_argument("distinct_length_bound: L must be positive");
  const mpfr_prec_t bits = L.prec();
  BigFloat total(0L, bits);
  if (n % 2 == 0) {
    const BigFloat Q = exp(L);
    for (int m = 1; m <= n / 2; ++m) total += predict_all_count(m, Q).value;
  } else {
    const BigFloat Q = exp(bf(2, bits) * L);
    for (int m = 1; m <= (n + 1) / 2; ++m) total += predict_sq_count(m, Q).upper.value;
  }
  return total;
}

int delta57(int n) { return n == 5 || n == 7 ? 1 : 0; }

BigFloat c_prime(int n) {
  if (n < 4) throw std::invalid_argument("c_prime: n must be at least 4");
  const mpfr_prec_t bits = kTheoryBits;
  const BigFloat base = bf(1, bits) / (bf(n - 1, bits) * bf(w((n + 1) / 2 - 1), bits));
  if (n % 2 == 0) return base;
  if (n == 5 || n == 7) {
    const BigFloat p = pi(bits);
    return base * p * p / bf(6, bits);
  }
  const int k = (n + 3) / 4;
  const BigFloat ks = bf(k, bits);
  return base * zeta(ks) / zeta(ks / bf(2, bits));
}

BoundReport mean_mult_bound(int n, const BigFloat& L_in, const BigFloat& margulis_scale) {
  if (n < 4) throw std::invalid_argument("mean_mult_bound: n must be at least 4");
  const BigFloat L = widen(L_in);
  BoundReport r;
  r.n = n;
  r.L = L;
  r.gamma_h = margulis_curve(n, L) * margulis_scale;
  r.distinct_lengths_bound = distinct_length_bound(n, L);
  r.mean_mult_lower = r.gamma_h / r.distinct_lengths_bound;
  r.c_prime = c_prime(n);
  r.delta57 = delta57(n);
  r.limit_constant = r.delta57 == 1 ? r.c_prime / bf(2, r.c_prime.prec()) : r.c_prime;
  return r;
}

}  // namespace salem
