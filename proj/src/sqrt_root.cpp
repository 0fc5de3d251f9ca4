#include "salem/sqrt_root.hpp"

#include "salem/parallel.hpp"
#include "salem/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <tuple>

namespace salem {

namespace {

using i128 = __int128;

Integer isqrt(const Integer& n) {
  Integer r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

Integer floor_sqrt(const Rational& u) { return isqrt(floor_of(u)); }

Integer ceil_sqrt(const Rational& u) {
  const Integer c = ceil_of(u);
  Integer s = isqrt(c);
  if (s * s < c) ++s;
  return s;
}

// floor and ceil of r + sigma * sqrt(u), u >= 0.
Integer floor_mixed(const Integer& r, int sigma, const Rational& u) {
  return sigma >= 0 ? Integer(r + floor_sqrt(u)) : Integer(r - ceil_sqrt(u));
}
Integer ceil_mixed(const Integer& r, int sigma, const Rational& u) {
  return sigma >= 0 ? Integer(r + ceil_sqrt(u)) : Integer(r - floor_sqrt(u));
}

// Sign of a + b sqrt(alpha).
int sign_mixed(const Integer& a, const Integer& b, const Integer& alpha) {
  const int sa = sgn(a);
  const int sb = sgn(b);
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  const int c = cmp(Integer(a * a), Integer(b * b * alpha));
  if (c == 0) return 0;
  return c > 0 ? sa : sb;
}

Rational to_rat(const Integer& v) { return Rational(v); }

Integer to_integer(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  Integer out(static_cast<unsigned long>(u >> 64));
  out <<= 64;
  out += Integer(static_cast<unsigned long>(u & 0xffffffffffffffffULL));
  return neg ? Integer(-out) : out;
}

// |T_j| for a monic degree-m T with m-1 roots in [-2, 2] and one root in (2, tau].
Rational trace_coeff_bound(int m, int j, const Rational& tau) {
  const auto b = [](int n, int k) -> Integer {
    if (k < 0 || k > n) return 0;
    return binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  };
  Rational out = Rational(b(m - 1, j - 1) * pow_int(2, static_cast<unsigned long>(m - j)));
  if (m - 1 - j >= 0) out += tau * Rational(b(m - 1, j) * pow_int(2, static_cast<unsigned long>(m - 1 - j)));
  return out;
}

bool odd_class(int m, int j) { return (m - j) % 2 != 0; }

constexpr long kSqrtScaleBits = 32;

// Rational bracket [lo, hi] of sqrt(alpha) with width 2^-32.
std::pair<Rational, Rational> sqrt_bracket(const Integer& alpha) {
  const Integer s = isqrt(Integer(alpha << (2 * kSqrtScaleBits)));
  Rational lo(s, Integer(1) << kSqrtScaleBits);
  Rational hi(Integer(s + 1), Integer(1) << kSqrtScaleBits);
  lo.canonicalize();
  hi.canonicalize();
  return {lo, hi};
}

struct Slice {
  Rational tau_hi;
  std::vector<Integer> bound;  // j = 0 .. m-2
};

Slice make_slice(int m, const Integer& alpha, const Integer& outer, const Rational& tau_max) {
  const auto [lo, hi] = sqrt_bracket(alpha);
  // tau < -T_{m-1} + 2(m-1) with T_{m-1} = sqrt(alpha) * outer
  const Rational up = outer < 0 ? Rational(-outer * hi) : Rational(-outer * lo);
  Slice s{std::min(tau_max, Rational(up + 2 * (m - 1))), {}};
  for (int j = 0; j <= m - 2; ++j) {
    const Rational b = trace_coeff_bound(m, j, s.tau_hi);
    s.bound.push_back(odd_class(m, j) ? floor_sqrt(Rational(b * b / to_rat(alpha))) : floor_of(b));
  }
  return s;
}

IntPoly poly_from_mixed(const std::vector<Integer>& sym, int parity, int count) {
  std::vector<Integer> c(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) c[static_cast<std::size_t>(i)] = sym[static_cast<std::size_t>(2 * i + parity)];
  return IntPoly(std::move(c));
}

// Root-of-unity orders among the roots of q = x^m T(x + 1/x), T = E + sqrt(alpha) O,
// given the orders d of the cyclotomic factors of the source.
std::vector<int> q_root_orders(const std::vector<long>& t, int m, long alpha, const std::vector<int>& source_orders) {
  const double sa = std::sqrt(static_cast<double>(alpha));
  auto eval = [&](double y) {
    double acc = 0;
    for (int j = m; j >= 0; --j) acc = acc * y + static_cast<double>(t[static_cast<std::size_t>(j)]) * (odd_class(m, j) ? sa : 1.0);
    return std::abs(acc);
  };
  std::vector<int> out;
  for (int d : source_orders) {
    if (d % 2 == 0) {
      out.push_back(2 * d);
      continue;
    }
    // Square roots of an order-d root of unity have orders d and 2d; the
    // order-d ones map to traces 2 cos(2 pi k / d).
    bool has_d = false;
    for (int k = 1; k < d; ++k) {
      if (std::gcd(k, d) != 1) continue;
      const double y = 2 * std::cos(2 * std::numbers::pi * k / d);
      if (eval(y) < eval(-y)) has_d = true;
    }
    out.push_back(has_d ? d : 2 * d);
  }
  return out;
}

}  // namespace

std::vector<Integer> SqrtDecomposition::mixed_coeffs() const {
  const int m = source.half_degree();
  std::vector<Integer> q(static_cast<std::size_t>(2 * m) + 1);
  for (int k = 0; k <= 2 * m; ++k) q[static_cast<std::size_t>(k)] = k % 2 == 0 ? A.coeff(k / 2) : B.coeff((k - 1) / 2);
  return q;
}

bool witness_less(const SqrtDecomposition& a, const SqrtDecomposition& b) {
  if (a.alpha != b.alpha) return a.alpha < b.alpha;
  if (a.A != b.A) return a.A < b.A;
  return a.B < b.B;
}

bool is_square_free(const Integer& n) {
  if (n < 1) return false;
  return square_free_part(n).second == 1;
}

std::pair<Integer, Integer> square_free_part(const Integer& n) {
  if (n < 1) throw std::invalid_argument("square_free_part needs n >= 1");
  Integer rest = n, s = 1, k = 1;
  for (Integer p = 2; p * p <= rest; ++p) {
    int e = 0;
    while (mpz_divisible_p(rest.get_mpz_t(), p.get_mpz_t()) != 0) {
      rest /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) k *= p;
    if (e % 2 == 1) s *= p;
  }
  s *= rest;
  return {s, k};
}

namespace {

Verification fail(const char* clause) { return {false, clause}; }

Verification verify_impl(const SqrtDecomposition& d, bool check_source) {
  if (d.alpha < 1 || !is_square_free(d.alpha)) return fail("alpha-square-free");
  const int m = d.source.half_degree();
  if (!d.A.is_monic() || d.A.degree() != m || d.B.degree() > m - 1) return fail("degree");
  if (d.B.is_zero()) return fail("odd-part-nonzero");
  for (int i = 0; i <= m; ++i) {
    if (d.A.coeff(i) != d.A.coeff(m - i)) return fail("palindromic");
  }
  for (int i = 0; i <= m - 1; ++i) {
    if (d.B.coeff(i) != d.B.coeff(m - 1 - i)) return fail("palindromic");
  }
  const IntPoly yb2 = multiply(IntPoly{0, 1}, multiply(d.B, d.B));
  if (multiply(d.A, d.A) - yb2 * d.alpha != d.source.poly()) return fail("identity");
  if (check_source && !std::holds_alternative<SalemRecord>(classify(d.source.poly(), 64))) return fail("salem-source");
  // q(1) < 0 iff the real root of q outside the unit disk is positive.
  if (sign_mixed(d.A.evaluate(Integer(1)), d.B.evaluate(Integer(1)), d.alpha) >= 0) return fail("root-sign");
  if (check_source && cyclotomic_factor(compose_square(d.source.poly()), 4 * m).has_value()) return fail("root-of-unity");
  return {true, ""};
}

}  // namespace

Verification verify_decomposition(const SqrtDecomposition& d) { return verify_impl(d, true); }

// Witness recovery from certified roots ---------------------------------------

namespace {

struct Branch {
  BigComplex w;  // chosen square root
  BigFloat radius;
  bool real;
};

std::vector<BigFloat> mul_linear(const std::vector<BigFloat>& f, const BigFloat& c, mpfr_prec_t prec) {
  // f * (x + c)
  std::vector<BigFloat> out(f.size() + 1, BigFloat(prec));
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] += f[i] * c;
    out[i + 1] += f[i];
  }
  return out;
}

std::vector<BigFloat> mul_quadratic(const std::vector<BigFloat>& f, const BigFloat& b, const BigFloat& c, mpfr_prec_t prec) {
  // f * (x^2 + b x + c)
  std::vector<BigFloat> out(f.size() + 2, BigFloat(prec));
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] += f[i] * c;
    out[i + 1] += f[i] * b;
    out[i + 2] += f[i];
  }
  return out;
}

enum class Outcome { Valid, Invalid, Ambiguous };

struct Candidate {
  Outcome outcome = Outcome::Invalid;
  Integer alpha;
  IntPoly A, B;
};

Candidate round_candidate(const std::vector<BigFloat>& f, const std::vector<BigFloat>& bnd, const std::vector<BigFloat>& ex,
                          int m, mpfr_prec_t prec) {
  Candidate out;
  const BigFloat slack = ldexp(BigFloat(1L, prec), -static_cast<long>(prec) + 16);
  std::vector<Integer> even(static_cast<std::size_t>(m) + 1);
  std::vector<Integer> sq(static_cast<std::size_t>(m));
  std::vector<int> sgn_odd(static_cast<std::size_t>(m));
  for (int k = 0; k <= 2 * m; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const BigFloat err = (bnd[ku] - ex[ku]) + bnd[ku] * slack;
    const Rational lo = (f[ku] - err).to_rational();
    const Rational hi = (f[ku] + err).to_rational();
    if (k % 2 == 0) {
      const Integer a = ceil_of(lo), b = floor_of(hi);
      if (a > b) return out;
      if (a != b) {
        out.outcome = Outcome::Ambiguous;
        return out;
      }
      even[ku / 2] = a;
      continue;
    }
    // c_k = sqrt(alpha) b_k, so c_k^2 is an integer.
    const Rational l2 = lo * lo, h2 = hi * hi;
    const Rational sq_lo = (lo <= 0 && hi >= 0) ? Rational(0) : std::min(l2, h2);
    const Rational sq_hi = std::max(l2, h2);
    const Integer a = ceil_of(sq_lo), b = floor_of(sq_hi);
    if (a > b) return out;
    if (a != b) {
      out.outcome = Outcome::Ambiguous;
      return out;
    }
    sq[ku / 2] = a;
    if (a != 0) {
      if (lo > 0) {
        sgn_odd[ku / 2] = 1;
      } else if (hi < 0) {
        sgn_odd[ku / 2] = -1;
      } else {
        out.outcome = Outcome::Ambiguous;
        return out;
      }
    }
  }
  Integer alpha = 0;
  std::vector<Integer> odd(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    if (sq[iu] == 0) continue;
    const auto [s, k] = square_free_part(sq[iu]);
    if (alpha == 0) alpha = s;
    if (s != alpha) return out;
    odd[iu] = sgn_odd[iu] * k;
  }
  if (alpha == 0) return out;  // no odd part
  out.outcome = Outcome::Valid;
  out.alpha = alpha;
  out.A = IntPoly(std::move(even));
  out.B = IntPoly(std::move(odd));
  return out;
}

// nullopt when some rounding was ambiguous at this precision.
std::optional<std::vector<SqrtDecomposition>> decompositions_at(const SalemRecord& s, int bits) {
  const IntPoly& p = s.min_poly.poly();
  const int m = s.m;
  const auto roots = complex_roots(p, bits);
  const mpfr_prec_t prec = bits + 32;
  const BigFloat one(1L, prec);

  std::vector<Branch> reals;
  std::vector<Branch> pairs;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const auto& r = roots[i];
    const BigFloat mag = abs(r.center);
    if (mag <= r.radius) return std::nullopt;
    const BigFloat rw = r.radius / sqrt(mag - r.radius);
    if (r.is_real()) {
      if (r.center.re.sign() <= 0) return std::nullopt;
      reals.push_back({BigComplex(sqrt(r.center.re), BigFloat(prec)), rw, true});
      continue;
    }
    bool paired = false;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (!used[j] && roots[j].contains(conj(r.center))) {
        used[j] = true;
        paired = true;
        break;
      }
    }
    if (!paired) return std::nullopt;
    pairs.push_back({sqrt(r.center), rw, false});
  }
  if (reals.size() != 2 || static_cast<int>(pairs.size()) != m - 1) return std::nullopt;

  // Positive square roots of lambda and 1/lambda.
  std::vector<BigFloat> base{one}, base_bnd{one}, base_ex{one};
  for (const auto& r : reals) {
    const BigFloat mag = abs(r.w);
    base = mul_linear(base, -r.w.re, prec);
    base_bnd = mul_linear(base_bnd, mag + r.radius, prec);
    base_ex = mul_linear(base_ex, mag, prec);
  }
  std::vector<BigFloat> pair_bnd = base_bnd, pair_ex = base_ex;
  for (const auto& pr : pairs) {
    const BigFloat mag = abs(pr.w);
    pair_bnd = mul_quadratic(pair_bnd, ldexp(mag + pr.radius, 1), (mag + pr.radius) * (mag + pr.radius), prec);
    pair_ex = mul_quadratic(pair_ex, ldexp(mag, 1), mag * mag, prec);
  }

  std::set<std::tuple<Integer, std::vector<Integer>, std::vector<Integer>>> seen;
  std::vector<SqrtDecomposition> out;
  bool ambiguous = false;
  const std::size_t patterns = std::size_t{1} << pairs.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    std::vector<BigFloat> f = base;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const BigFloat re = ((mask >> i) & 1U) != 0 ? -pairs[i].w.re : pairs[i].w.re;
      const BigFloat norm = pairs[i].w.re * pairs[i].w.re + pairs[i].w.im * pairs[i].w.im;
      f = mul_quadratic(f, -ldexp(re, 1), norm, prec);
    }
    Candidate c = round_candidate(f, pair_bnd, pair_ex, m, prec);
    if (c.outcome == Outcome::Ambiguous) {
      ambiguous = true;
      continue;
    }
    if (c.outcome == Outcome::Invalid) continue;
    SqrtDecomposition d{c.alpha, std::move(c.A), std::move(c.B), s.min_poly};
    if (!verify_impl(d, false)) continue;
    if (seen.emplace(d.alpha, d.A.coeffs(), d.B.coeffs()).second) out.push_back(std::move(d));
  }
  if (ambiguous) return std::nullopt;
  std::sort(out.begin(), out.end(), witness_less);
  return out;
}

}  // namespace

std::vector<SqrtDecomposition> find_decompositions(const SalemRecord& s, int precision_bits) {
  for (int bits = std::max(precision_bits, 128); bits <= 8192; bits *= 2) {
    try {
      if (auto r = decompositions_at(s, bits)) return *r;
    } catch (const RootCertificationError&) {
    }
  }
  throw RootCertificationError("square-root sign search stayed ambiguous up to 8192 bits");
}

bool is_square_rootable(const SalemRecord& s, int precision_bits) { return !find_decompositions(s, precision_bits).empty(); }

BigFloat phi(const SqrtDecomposition& d, int precision_bits) {
  const mpfr_prec_t prec = precision_bits + 32;
  const int m = d.source.half_degree();
  const BigFloat root_alpha = sqrt(BigFloat(d.alpha, prec));
  const auto q = d.mixed_coeffs();
  std::vector<BigFloat> c;
  for (int k = 0; k <= 2 * m; ++k) {
    BigFloat v(q[static_cast<std::size_t>(k)], prec);
    if (k % 2 == 1) v *= root_alpha;
    c.push_back(std::move(v));
  }
  // Start at the square root of a coarse lambda from the source trace.
  const IntPoly trace = trace_transform(d.source).poly();
  BigFloat x = sqrt(BigFloat(salem_lambda_from_trace(trace, 64).center.re.to_double(), prec));
  for (int iter = 0; iter < 200; ++iter) {
    BigFloat v = c.back(), dv(prec);
    for (std::size_t k = c.size() - 1; k-- > 0;) {
      dv = dv * x + v;
      v = v * x + c[k];
    }
    const BigFloat step = v / dv;
    x -= step;
    if (step.is_zero() || abs(step) < ldexp(abs(x), -static_cast<long>(prec) + 4)) break;
  }
  return x * x;
}

std::string to_witness_line(const SqrtDecomposition& d, int precision_bits) {
  return d.alpha.get_str() + "; " + to_coeff_list(d.A) + "; " + to_coeff_list(d.B) + "; " + phi(d, precision_bits).to_string(15);
}

// Census -------------------------------------------------------------------------

SqCensusSearch::SqCensusSearch(int m, Rational Q, std::optional<Integer> only_alpha) : m_(m), Q_(std::move(Q)) {
  if (m < 1) throw std::invalid_argument("census needs m >= 1");
  if (m > 8) throw std::invalid_argument("census supports m <= 8");
  Q_.canonicalize();
  if (Q_ <= 1) return;
  trace_max_p_ = Q_ + 1 / Q_;
  const Integer scale = Integer(1) << 32;
  Rational r_up(ceil_sqrt(Rational(Q_ * scale * scale)), scale);
  r_up.canonicalize();
  tau_max_ = r_up + 1 / r_up;
  psi_ = cyclotomic_traces(2 * (m - 1));

  alpha_max_ = 0;
  for (int j = 0; j <= m - 1; ++j) {
    if (!odd_class(m, j)) continue;
    const Rational b = trace_coeff_bound(m, j, tau_max_);
    alpha_max_ = std::max(alpha_max_, floor_of(Rational(b * b)));
  }
  if (alpha_max_ > (Integer(1) << 40)) throw BudgetExceeded(alpha_max_.get_d());

  std::vector<Integer> alphas;
  if (only_alpha) {
    if (!is_square_free(*only_alpha)) throw std::invalid_argument("alpha must be a positive square-free integer");
    if (*only_alpha <= alpha_max_) alphas.push_back(*only_alpha);
  } else {
    for (Integer a = 1; a <= alpha_max_; ++a) {
      if (is_square_free(a)) alphas.push_back(a);
    }
  }

  for (const Integer& alpha : alphas) {
    const Rational ra(alpha);
    if (m == 1) {
      // T = y + sqrt(alpha) o with tau = -sqrt(alpha) o in (2, tau_max].
      const Integer lo = floor_sqrt(Rational(tau_max_ * tau_max_ / ra));
      const Integer hi = floor_sqrt(Rational(4 / ra)) + 1;
      for (Integer k = hi; k <= lo; ++k) {
        shards_.emplace_back(alpha, -k);
        estimate_ += 1;
      }
      continue;
    }
    // T_{m-1} = sqrt(alpha) o lies in (-tau_max - 2(m-1), 2m - 4).
    const Rational lower = tau_max_ + 2 * (m - 1);
    const Integer o_lo = floor_mixed(0, -1, Rational(lower * lower / ra)) + 1;
    const int top = 2 * m - 4;
    const Integer o_hi = ceil_mixed(0, top > 0 ? 1 : 0, Rational(Rational(top * top) / ra)) - 1;
    for (Integer o = o_lo; o <= o_hi; ++o) {
      const Slice s = make_slice(m, alpha, o, tau_max_);
      double vol = 1;
      for (const auto& b : s.bound) vol *= 2 * b.get_d() + 1;
      estimate_ += vol;
      shards_.emplace_back(alpha, o);
    }
  }
}

SqShardResult SqCensusSearch::run_shard(std::size_t index) const {
  SqShardResult out;
  const int m = m_;
  const auto& [alpha_z, outer_z] = shards_.at(index);
  const long alpha = alpha_z.get_si();
  std::vector<long> t(static_cast<std::size_t>(m) + 1, 0);
  t[static_cast<std::size_t>(m)] = 1;
  t[static_cast<std::size_t>(m - 1)] = outer_z.get_si();

  // Quick necessary test P(N) >= 0 at an integer N >= Q + 1/Q.
  const Integer np_z = ceil_of(trace_max_p_);
  const bool quick = pow_int(np_z, static_cast<unsigned long>(m)) < (Integer(1) << 56);
  const long np = quick ? np_z.get_si() : 0;
  constexpr i128 kCoeffCap = static_cast<i128>(1) << 62;

  std::vector<i128> binom_pow((static_cast<std::size_t>(m) + 1) * (static_cast<std::size_t>(m) + 1), 0);
  for (int k = 0; k <= m; ++k) {
    for (int i = 0; i <= k; ++i) {
      binom_pow[static_cast<std::size_t>(k * (m + 1) + i)] =
          static_cast<i128>(binomial(static_cast<unsigned long>(k), static_cast<unsigned long>(i)).get_si()) << (k - i);
    }
  }

  std::vector<i128> g(static_cast<std::size_t>(2 * m) + 1);
  std::vector<i128> pc(static_cast<std::size_t>(m) + 1);

  auto candidate = [&]() {
    bool any_odd = false;
    for (int j = 0; j <= m; ++j) {
      if (odd_class(m, j) && t[static_cast<std::size_t>(j)] != 0) any_odd = true;
    }
    if (!any_odd) return;
    // G(y) = E(y)^2 - alpha O(y)^2 = P(y^2 - 2)
    std::fill(g.begin(), g.end(), 0);
    for (int i = 0; i <= m; ++i) {
      const i128 ti = t[static_cast<std::size_t>(i)];
      if (ti == 0) continue;
      const bool oi = odd_class(m, i);
      for (int j = 0; j <= m; ++j) {
        if (odd_class(m, j) != oi) continue;
        const i128 prod = ti * t[static_cast<std::size_t>(j)];
        g[static_cast<std::size_t>(i + j)] += oi ? -alpha * prod : prod;
      }
    }
    // P(u) = sum_k g_2k (u + 2)^k
    for (int i = 0; i <= m; ++i) {
      i128 acc = 0;
      for (int k = i; k <= m; ++k) acc += g[static_cast<std::size_t>(2 * k)] * binom_pow[static_cast<std::size_t>(k * (m + 1) + i)];
      pc[static_cast<std::size_t>(i)] = acc;
    }
    bool small = quick;
    for (int i = 0; i <= m && small; ++i) small = pc[static_cast<std::size_t>(i)] < kCoeffCap && pc[static_cast<std::size_t>(i)] > -kCoeffCap;
    if (small) {
      i128 v = 0;
      for (int i = m; i >= 0; --i) v = v * np + pc[static_cast<std::size_t>(i)];
      if (v < 0) return;
    }
    std::vector<Integer> pz(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) pz[static_cast<std::size_t>(i)] = to_integer(pc[static_cast<std::size_t>(i)]);
    const IntPoly P(std::move(pz));
    if (!has_salem_trace_roots(P)) return;
    if (P.sign_at(trace_max_p_) < 0) return;

    std::vector<Integer> ev(static_cast<std::size_t>(m) + 1), ov(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) (odd_class(m, j) ? ov : ev)[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(j)];
    const auto se = trace_inverse_symmetric(ev, m);
    const auto so = trace_inverse_symmetric(ov, m);
    IntPoly A = poly_from_mixed(se, 0, m + 1);
    IntPoly B = poly_from_mixed(so, 1, m);

    if (has_cyclotomic_trace_factor(P, psi_)) {
      const auto orders = q_root_orders(t, m, alpha, cyclotomic_trace_orders(P));
      if (*std::min_element(orders.begin(), orders.end()) > 4 * m) {
        out.audit.push_back({alpha_z, std::move(A), std::move(B), trace_inverse(TracePoly(P)).poly(), orders});
      }
      return;
    }
    SqrtDecomposition w{alpha_z, std::move(A), std::move(B), trace_inverse(TracePoly(P))};
    out.hits.push_back({std::move(w), P});
  };

  if (m == 1) {
    candidate();
    return out;
  }

  const Slice slice = make_slice(m, alpha_z, outer_z, tau_max_);
  const Integer n_hi = ceil_of(slice.tau_hi);
  const Rational ra(alpha_z);
  for (int j = 1; j <= m - 2; ++j) t[static_cast<std::size_t>(j)] = -slice.bound[static_cast<std::size_t>(j)].get_si();
  const bool t0_odd = odd_class(m, 0);

  // T(x) - T_0 as a + b sqrt(alpha).
  auto partial = [&](const Integer& x) {
    Integer a = 0, b = 0, xp = x;
    for (int j = 1; j <= m; ++j) {
      const long tj = t[static_cast<std::size_t>(j)];
      if (tj != 0) (odd_class(m, j) ? b : a) += xp * tj;
      xp *= x;
    }
    return std::make_pair(a, b);
  };
  // Integer c with T_0 = c (even class) or T_0 = sqrt(alpha) c (odd class):
  // floor/ceil of -S or -S / sqrt(alpha) where S = a + b sqrt(alpha).
  auto neg_floor = [&](const Integer& a, const Integer& b) {
    return t0_odd ? floor_mixed(-b, -sgn(a), Rational(Rational(a * a) / ra)) : floor_mixed(-a, -sgn(b), Rational(b * b * alpha_z));
  };
  auto neg_ceil = [&](const Integer& a, const Integer& b) {
    return t0_odd ? ceil_mixed(-b, -sgn(a), Rational(Rational(a * a) / ra)) : ceil_mixed(-a, -sgn(b), Rational(b * b * alpha_z));
  };

  while (true) {
    const auto [a2, b2] = partial(Integer(2));
    const auto [am, bm] = partial(Integer(-2));
    const auto [an, bn] = partial(n_hi);
    Integer lo = -slice.bound[0], hi = slice.bound[0];
    hi = std::min(hi, Integer(neg_ceil(a2, b2) - 1));  // T(2) < 0
    if (m % 2 == 0) {
      lo = std::max(lo, Integer(neg_floor(am, bm) + 1));  // T(-2) > 0
    } else {
      hi = std::min(hi, Integer(neg_ceil(am, bm) - 1));  // T(-2) < 0
    }
    lo = std::max(lo, neg_ceil(an, bn));  // T(n_hi) >= 0
    for (long c = lo.get_si(); c <= hi.get_si() && lo <= hi; ++c) {
      if (c == 0) continue;  // root of unity of order 4
      t[0] = c;
      candidate();
    }
    int j = 1;
    for (; j <= m - 2; ++j) {
      long& c = t[static_cast<std::size_t>(j)];
      if (c < slice.bound[static_cast<std::size_t>(j)].get_si()) {
        ++c;
        break;
      }
      c = -slice.bound[static_cast<std::size_t>(j)].get_si();
    }
    if (j > m - 2) break;
  }
  return out;
}

SqCensus merge_sq_shards(std::vector<SqShardResult> parts, int precision_bits) {
  std::vector<SqHit> hits;
  SqCensus out;
  for (auto& part : parts) {
    for (auto& h : part.hits) hits.push_back(std::move(h));
    for (auto& a : part.audit) out.audit.push_back(std::move(a));
  }
  std::sort(hits.begin(), hits.end(), [](const SqHit& a, const SqHit& b) {
    if (a.trace != b.trace) return a.trace < b.trace;
    return witness_less(a.witness, b.witness);
  });
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    SqGroup group{SalemRecord{hits[i].witness.source, salem_lambda_from_trace(hits[i].trace, precision_bits),
                              hits[i].witness.source.half_degree()},
                  {}};
    for (; j < hits.size() && hits[j].trace == hits[i].trace; ++j) group.witnesses.push_back(std::move(hits[j].witness));
    out.groups.push_back(std::move(group));
    i = j;
  }
  std::sort(out.groups.begin(), out.groups.end(), [](const SqGroup& a, const SqGroup& b) { return lambda_less(a.record, b.record); });
  std::sort(out.audit.begin(), out.audit.end(), [](const AuditEntry& a, const AuditEntry& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    if (a.A != b.A) return a.A < b.A;
    return a.B < b.B;
  });
  return out;
}

namespace {

std::vector<SqShardResult> run_search(const SqCensusSearch& search, const EnumerationOptions& opts) {
  if (search.estimated_candidates() > opts.budget) throw BudgetExceeded(search.estimated_candidates());
  std::vector<SqShardResult> parts(search.shard_count());
  run_shards(identity_order(search.shard_count()), opts.workers, [&](std::size_t i) { parts[i] = search.run_shard(i); },
             opts.cancel);
  return parts;
}

}  // namespace

std::vector<SqrtDecomposition> enumerate_P_m_alpha(int m, const Integer& alpha, const Rational& R, const EnumerationOptions& opts) {
  if (alpha < 1 || !is_square_free(alpha)) throw std::invalid_argument("alpha must be a positive square-free integer");
  if (R <= 1) return {};
  const SqCensusSearch search(m, R * R, alpha);
  std::vector<SqrtDecomposition> out;
  for (auto& part : run_search(search, opts)) {
    for (auto& h : part.hits) out.push_back(std::move(h.witness));
  }
  std::sort(out.begin(), out.end(), [](const SqrtDecomposition& a, const SqrtDecomposition& b) {
    if (a.source.poly() != b.source.poly()) return a.source.poly() < b.source.poly();
    return witness_less(a, b);
  });
  return out;
}

SqCensus enumerate_sq_census(int m, const Rational& Q, const EnumerationOptions& opts) {
  const SqCensusSearch search(m, Q);
  return merge_sq_shards(run_search(search, opts), opts.precision_bits);
}

}  // namespace salem
