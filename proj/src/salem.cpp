#include "salem/salem.hpp"

#include "salem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

namespace salem {

namespace {

std::mutex cyclo_mutex;
std::map<int, IntPoly> cyclo_cache;
std::map<int, std::vector<IntPoly>> cyclo_trace_cache;

IntPoly cyclotomic_locked(int d) {
  if (auto it = cyclo_cache.find(d); it != cyclo_cache.end()) return it->second;
  // (x^d - 1) / prod_{e | d, e < d} Phi_e
  IntPoly num = IntPoly::monomial(1, d) - IntPoly{1};
  for (int e = 1; e < d; ++e) {
    if (d % e != 0) continue;
    auto q = exact_divide(num, cyclotomic_locked(e));
    num = std::move(*q);
  }
  cyclo_cache.emplace(d, num);
  return num;
}

Integer floor_int(const Rational& q) { return floor_of(q); }

}  // namespace

// Trace polynomials of Phi_d for d >= 3 with phi(d) <= max_phi. Phi_1 and
// Phi_2 correspond to trace roots +-2, which callers exclude separately.
std::vector<IntPoly> cyclotomic_traces(int max_phi) {
  std::lock_guard lock(cyclo_mutex);
  if (auto it = cyclo_trace_cache.find(max_phi); it != cyclo_trace_cache.end()) return it->second;
  std::vector<IntPoly> out;
  // phi(d) >= sqrt(d / 2)
  const int d_max = 2 * max_phi * max_phi + 2;
  for (int d = 3; d <= d_max; ++d) {
    if (euler_phi(d) > max_phi) continue;
    out.push_back(trace_transform(PalindromicPoly(cyclotomic_locked(d))).poly());
  }
  cyclo_trace_cache.emplace(max_phi, out);
  return out;
}

bool has_cyclotomic_trace_factor(const IntPoly& trace, const std::vector<IntPoly>& psi) {
  for (const auto& f : psi) {
    if (f.degree() > trace.degree()) continue;
    if (f.degree() == 1) {
      if (trace.evaluate(Integer(-f.coeff(0))) == 0) return true;
      continue;
    }
    if (exact_divide(trace, f).has_value()) return true;
  }
  return false;
}

bool has_salem_trace_roots(const IntPoly& trace) {
  const int m = trace.degree();
  if (trace.sign_at(Rational(2)) >= 0) return false;  // also rules out a root at 2
  if (trace.sign_at(Rational(-2)) == 0) return false;
  const SturmSequence s(trace);
  const int at_minus2 = s.variations_at(Rational(-2));
  const int at_2 = s.variations_at(Rational(2));
  if (at_minus2 - at_2 != m - 1) return false;
  return at_2 - s.variations_at_infinity(+1) == 1;
}

std::vector<int> cyclotomic_trace_orders(const IntPoly& trace) {
  std::vector<int> out;
  const int max_phi = 2 * trace.degree();
  for (int d = 3; d <= 2 * max_phi * max_phi + 2; ++d) {
    if (euler_phi(d) > max_phi) continue;
    if (exact_divide(trace, trace_transform(PalindromicPoly(cyclotomic_poly(d))).poly()).has_value()) out.push_back(d);
  }
  return out;
}

int euler_phi(int d) {
  int result = d;
  int n = d;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    while (n % p == 0) n /= p;
    result -= result / p;
  }
  if (n > 1) result -= result / n;
  return result;
}

IntPoly cyclotomic_poly(int d) {
  if (d < 1) throw std::invalid_argument("cyclotomic order must be positive");
  std::lock_guard lock(cyclo_mutex);
  return cyclotomic_locked(d);
}

std::optional<std::pair<int, IntPoly>> cyclotomic_factor(const IntPoly& p, int max_order) {
  if (p.is_zero()) return std::nullopt;
  for (int d = 1; d <= max_order; ++d) {
    if (euler_phi(d) > p.degree()) continue;
    IntPoly f = cyclotomic_poly(d);
    if (exact_divide(p, f).has_value()) return std::make_pair(d, std::move(f));
  }
  return std::nullopt;
}

std::string to_record_line(const SalemRecord& r) {
  std::string out = r.lambda.center.re.to_string(15);
  out += ", " + std::to_string(r.m);
  for (const auto& c : r.min_poly.poly().coeffs()) out += ", " + c.get_str();
  return out;
}

bool lambda_less(const SalemRecord& a, const SalemRecord& b) {
  const int c = compare(a.lambda.center.re, b.lambda.center.re);
  if (c != 0) return c < 0;
  return a.min_poly.poly() < b.min_poly.poly();
}

void sort_records(std::vector<SalemRecord>& records) { std::sort(records.begin(), records.end(), lambda_less); }

RootEnclosure salem_lambda_from_trace(const IntPoly& trace, int precision_bits) {
  const mpfr_prec_t wp = precision_bits + 32;
  // Dyadic bisection on (2, B] with B a Cauchy bound, to about 50 bits.
  Integer bound = 0;
  for (const auto& c : trace.coeffs()) bound = std::max(bound, Integer(abs(c)));
  Rational lo(2), hi(Rational(bound + 1));
  if (hi <= lo) hi = 3;
  for (int i = 0; i < 400; ++i) {
    if (Rational(hi - lo) * Rational(Integer(1) << 50) < hi) break;
    Rational mid = (lo + hi) / 2;
    const int s = trace.sign_at(mid);
    if (s == 0) {
      lo = hi = mid;
      break;
    }
    (s < 0 ? lo : hi) = mid;
  }

  BigFloat tau(Rational((lo + hi) / 2), wp);
  if (lo != hi) {
    std::vector<BigFloat> a, da;
    for (const auto& c : trace.coeffs()) a.emplace_back(c, wp);
    const IntPoly deriv = trace.derivative();
    for (const auto& c : deriv.coeffs()) da.emplace_back(c, wp);
    auto eval = [](const std::vector<BigFloat>& v, const BigFloat& x) {
      BigFloat acc = v.back();
      for (std::size_t k = v.size() - 1; k-- > 0;) acc = acc * x + v[k];
      return acc;
    };
    for (int iter = 0; iter < 64; ++iter) {
      const BigFloat step = eval(a, tau) / eval(da, tau);
      tau -= step;
      if (step.is_zero() || abs(step) < ldexp(abs(tau), -static_cast<long>(wp) + 4)) break;
    }
    // Certify by exact signs at tau -+ eps; widen on failure, fall back to
    // the bisection bracket.
    BigFloat eps = ldexp(abs(tau), -precision_bits - 4);
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      const Rational l = (tau - eps).to_rational();
      const Rational h = (tau + eps).to_rational();
      if (l > lo && h < hi && trace.sign_at(l) < 0 && trace.sign_at(h) > 0) {
        lo = l;
        hi = h;
        ok = true;
      }
      eps = ldexp(eps, 4);
    }
    if (!ok) {
      while (Rational(hi - lo) * Rational(pow_int(2, static_cast<unsigned long>(precision_bits))) > hi) {
        Rational mid = (lo + hi) / 2;
        const int s = trace.sign_at(mid);
        if (s == 0) {
          lo = hi = mid;
          break;
        }
        (s < 0 ? lo : hi) = mid;
      }
    }
  }
  // lambda = (t + sqrt(t^2 - 4)) / 2 is increasing in t > 2.
  auto lam = [wp](const Rational& t) {
    const BigFloat x(t, wp);
    return ldexp(x + sqrt(x * x - BigFloat(4L, wp)), -1);
  };
  const BigFloat l_lo = lam(lo);
  const BigFloat l_hi = lam(hi);
  BigComplex center(ldexp(l_lo + l_hi, -1), BigFloat(wp));
  BigFloat radius = ldexp(l_hi - l_lo, -1) + ldexp(abs(l_hi), -static_cast<long>(wp) + 6);
  return {std::move(center), std::move(radius)};
}

bool is_salem_trace(const IntPoly& trace) {
  if (trace.degree() < 1 || !trace.is_monic()) return false;
  return has_salem_trace_roots(trace) && !has_cyclotomic_trace_factor(trace, cyclotomic_traces(2 * (trace.degree() - 1)));
}

Classification classify(const IntPoly& p, int precision_bits) {
  if (p.degree() < 2) throw std::invalid_argument("classify needs degree >= 2");
  if (!p.is_monic()) throw std::invalid_argument("classify needs a monic polynomial");
  if (!is_squarefree(p)) return ReducibleOrOther{"repeated roots"};
  if (p.degree() % 2 != 0 || !is_palindromic(p)) return ReducibleOrOther{"not palindromic of even degree"};
  const int m = p.degree() / 2;
  const IntPoly trace = trace_transform(PalindromicPoly(p)).poly();
  if (trace.sign_at(Rational(2)) == 0 || trace.sign_at(Rational(-2)) == 0) return ReducibleOrOther{"root at 1 or -1"};

  const SturmSequence s(trace);
  const int at_minus2 = s.variations_at(Rational(-2));
  const int at_2 = s.variations_at(Rational(2));
  const int inside = at_minus2 - at_2;
  if (inside == m) {
    // Every root on the unit circle: a product of cyclotomic polynomials.
    const int d_max = 2 * p.degree() * p.degree() + 2;
    for (int d = 3; d <= d_max; ++d) {
      if (euler_phi(d) == p.degree() && cyclotomic_poly(d) == p) return Cyclotomic{d};
    }
    return ReducibleOrOther{"product of cyclotomic factors"};
  }
  if (inside != m - 1 || at_2 - s.variations_at_infinity(+1) != 1) return ReducibleOrOther{"roots off the unit circle"};
  if (has_cyclotomic_trace_factor(trace, cyclotomic_traces(2 * (m - 1)))) return ReducibleOrOther{"cyclotomic factor"};
  return SalemRecord{PalindromicPoly(p), salem_lambda_from_trace(trace, precision_bits), m};
}

// Factor reconstruction -----------------------------------------------------

namespace {

// A conjugation-closed group of roots: one real root or a conjugate pair,
// as the real monic factor it contributes together with an error bound.
struct RootUnit {
  std::vector<BigFloat> factor;  // constant first, monic
  std::vector<BigFloat> bound;   // coefficients of prod (x + |z| + r)
  std::vector<BigFloat> exact;   // coefficients of prod (x + |z|)
  int degree = 0;
};

std::vector<BigFloat> poly_mul(const std::vector<BigFloat>& a, const std::vector<BigFloat>& b, mpfr_prec_t prec) {
  std::vector<BigFloat> out(a.size() + b.size() - 1, BigFloat(prec));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

enum class Verdict { Irreducible, Reducible, Ambiguous };

struct Reconstruction {
  const IntPoly& p;
  const std::vector<RootUnit>& units;
  mpfr_prec_t prec;
  int max_degree;
  bool ambiguous = false;
  bool found = false;

  void dfs(std::size_t next, const std::vector<BigFloat>& f, const std::vector<BigFloat>& bnd,
           const std::vector<BigFloat>& ex, int degree) {
    for (std::size_t u = next; u < units.size() && !found; ++u) {
      const int d = degree + units[u].degree;
      if (d > max_degree) continue;
      const auto nf = poly_mul(f, units[u].factor, prec);
      const auto nb = poly_mul(bnd, units[u].bound, prec);
      const auto ne = poly_mul(ex, units[u].exact, prec);
      test(nf, nb, ne);
      if (found) return;
      dfs(u + 1, nf, nb, ne, d);
    }
  }

  void test(const std::vector<BigFloat>& f, const std::vector<BigFloat>& bnd, const std::vector<BigFloat>& ex) {
    std::vector<Integer> coeffs(f.size());
    const BigFloat slack = ldexp(BigFloat(1L, prec), -static_cast<long>(prec) + 12);
    for (std::size_t k = 0; k < f.size(); ++k) {
      // |true - computed| <= (bound - exact) + rounding slack
      const BigFloat err = (bnd[k] - ex[k]) + bnd[k] * slack;
      const Rational lo = (f[k] - err).to_rational();
      const Rational hi = (f[k] + err).to_rational();
      const Integer first = ceil_of(lo);
      const Integer last = floor_of(hi);
      if (first > last) return;
      if (first != last) {
        ambiguous = true;
        return;
      }
      coeffs[k] = first;
    }
    const IntPoly cand(std::move(coeffs));
    if (exact_divide(p, cand).has_value()) found = true;
  }
};

Verdict reconstruct(const IntPoly& p, int bits) {
  const auto roots = complex_roots(p, bits);
  const mpfr_prec_t prec = bits + 32;
  const BigFloat one(1L, prec);
  std::vector<bool> used(roots.size(), false);
  std::vector<RootUnit> units;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const auto& r = roots[i];
    const BigFloat mag = abs(r.center);
    if (r.is_real()) {
      RootUnit u;
      u.factor = {-r.center.re, one};
      u.bound = {mag + r.radius, one};
      u.exact = {mag, one};
      u.degree = 1;
      units.push_back(std::move(u));
      continue;
    }
    // Partner: the enclosure containing the conjugate centre.
    std::size_t partner = roots.size();
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (!used[j] && roots[j].contains(conj(r.center))) {
        partner = j;
        break;
      }
    }
    if (partner == roots.size()) return Verdict::Ambiguous;
    used[partner] = true;
    const auto& s = roots[partner];
    RootUnit u;
    // (x - z)(x - conj z) with z the first centre; the partner root lies
    // within rr of conj z.
    u.factor = {r.center.re * r.center.re + r.center.im * r.center.im, -ldexp(r.center.re, 1), one};
    const BigFloat rr = s.radius + abs(s.center - conj(r.center));
    u.bound = poly_mul({mag + r.radius, one}, {mag + rr, one}, prec);
    u.exact = poly_mul({mag, one}, {mag, one}, prec);
    u.degree = 2;
    units.push_back(std::move(u));
  }
  Reconstruction rec{p, units, prec, p.degree() / 2};
  rec.dfs(0, {one}, {one}, {one}, 0);
  if (rec.found) return Verdict::Reducible;
  if (rec.ambiguous) return Verdict::Ambiguous;
  return Verdict::Irreducible;
}

}  // namespace

bool is_irreducible(const IntPoly& p) {
  if (p.degree() < 1 || !p.is_monic()) throw std::invalid_argument("is_irreducible needs a monic polynomial of degree >= 1");
  if (p.degree() > kMaxIrreducibleDegree) {
    throw std::invalid_argument("is_irreducible supports degree <= " + std::to_string(kMaxIrreducibleDegree));
  }
  if (p.degree() == 1) return true;
  if (!is_squarefree(p)) return false;
  for (int bits = 128; bits <= 8192; bits *= 2) {
    Verdict v;
    try {
      v = reconstruct(p, bits);
    } catch (const RootCertificationError&) {
      continue;
    }
    if (v != Verdict::Ambiguous) return v == Verdict::Irreducible;
  }
  throw RootCertificationError("factor reconstruction stayed ambiguous up to 8192 bits");
}

CoeffBox coeff_box(int m, const Rational& Q) {
  if (m < 1) throw std::invalid_argument("coeff_box needs m >= 1");
  CoeffBox box{m, {}};
  for (int k = 1; k <= m; ++k) {
    box.bound.push_back(ceil_of(Rational(binomial(static_cast<unsigned long>(2 * m), static_cast<unsigned long>(k))) * Q));
  }
  return box;
}

// Trace-coordinate search ----------------------------------------------------

namespace {

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

}  // namespace

SalemSearch::SalemSearch(int m, Rational Q, int precision_bits) : m_(m), Q_(std::move(Q)), bits_(precision_bits) {
  if (m < 1) throw std::invalid_argument("enumeration needs m >= 1");
  Q_.canonicalize();
  if (Q_ <= 1) return;
  trace_max_ = Q_ + 1 / Q_;
  if (m == 1) {
    // tau = -T_0 in (2, Q + 1/Q]
    for (Integer t0 = -floor_int(trace_max_); t0 <= -3; ++t0) outer_.push_back(t0);
    estimate_ = static_cast<double>(outer_.size());
    return;
  }
  // -T_{m-1} = tau + sum r_i lies in (2 - 2(m-1), tau_max + 2(m-1)).
  const Integer lo = floor_int(-trace_max_ - 2 * (m - 1)) + 1;
  const Integer hi = 2 * m - 5;
  for (Integer t = lo; t <= hi; ++t) {
    outer_.push_back(t);
    const Rational tau_hi = std::min(trace_max_, Rational(-t + 2 * (m - 1)));
    double vol = 1;
    for (int j = 0; j <= m - 2; ++j) vol *= 2 * floor_int(trace_coeff_bound(m, j, tau_hi)).get_d() + 1;
    estimate_ += vol;
  }
}

std::vector<SalemRecord> SalemSearch::run_shard(std::size_t index) const {
  std::vector<SalemRecord> out;
  const int m = m_;
  const auto psi = cyclotomic_traces(2 * (m - 1));
  std::vector<Integer> t(static_cast<std::size_t>(m) + 1);
  t[static_cast<std::size_t>(m)] = 1;
  t[static_cast<std::size_t>(m - 1)] = outer_.at(index);

  auto accept = [&](const IntPoly& T) {
    if (!has_salem_trace_roots(T) || has_cyclotomic_trace_factor(T, psi)) return;
    if (T.sign_at(trace_max_) < 0) return;  // large root beyond Q + 1/Q
    const PalindromicPoly p = trace_inverse(TracePoly(T));
    out.push_back(SalemRecord{p, salem_lambda_from_trace(T, bits_), m});
  };

  if (m == 1) {
    accept(IntPoly(t));
    sort_records(out);
    return out;
  }

  const Rational tau_hi = std::min(trace_max_, Rational(-t[static_cast<std::size_t>(m - 1)] + 2 * (m - 1)));
  const Integer n_hi = ceil_of(tau_hi);
  std::vector<Integer> bound(static_cast<std::size_t>(m));
  for (int j = 0; j <= m - 2; ++j) bound[static_cast<std::size_t>(j)] = floor_int(trace_coeff_bound(m, j, tau_hi));
  for (int j = 1; j <= m - 2; ++j) t[static_cast<std::size_t>(j)] = -bound[static_cast<std::size_t>(j)];

  while (true) {
    // Linear constraints on T_0: T(2) < 0, (-1)^m T(-2) > 0, T(n_hi) >= 0.
    Integer s2 = 0, sm2 = 0, sn = 0;
    for (int j = m; j >= 1; --j) {
      s2 = s2 * 2 + t[static_cast<std::size_t>(j)];
      sm2 = sm2 * -2 + t[static_cast<std::size_t>(j)];
      sn = sn * n_hi + t[static_cast<std::size_t>(j)];
    }
    s2 *= 2;
    sm2 *= -2;
    sn *= n_hi;
    Integer lo = -bound[0], hi = bound[0];
    hi = std::min(hi, Integer(-s2 - 1));
    if (m % 2 == 0) {
      lo = std::max(lo, Integer(-sm2 + 1));
    } else {
      hi = std::min(hi, Integer(-sm2 - 1));
    }
    lo = std::max(lo, Integer(-sn));
    for (Integer t0 = lo; t0 <= hi; ++t0) {
      if (t0 == 0) continue;  // y | T gives a root of unity of order 4
      t[0] = t0;
      accept(IntPoly(t));
    }
    // Odometer over T_1 .. T_{m-2}.
    int j = 1;
    for (; j <= m - 2; ++j) {
      auto& c = t[static_cast<std::size_t>(j)];
      if (c < bound[static_cast<std::size_t>(j)]) {
        ++c;
        break;
      }
      c = -bound[static_cast<std::size_t>(j)];
    }
    if (j > m - 2) break;
  }
  sort_records(out);
  return out;
}

std::vector<SalemRecord> enumerate_salem(int m, const Rational& Q, const EnumerationOptions& opts) {
  const SalemSearch search(m, Q, opts.precision_bits);
  if (search.estimated_candidates() > opts.budget) throw BudgetExceeded(search.estimated_candidates());
  std::vector<std::vector<SalemRecord>> parts(search.shard_count());
  run_shards(identity_order(search.shard_count()), opts.workers,
             [&](std::size_t i) { parts[i] = search.run_shard(i); }, opts.cancel);
  std::vector<SalemRecord> out;
  for (auto& part : parts) {
    for (auto& r : part) out.push_back(std::move(r));
  }
  sort_records(out);
  return out;
}

}  // namespace salem
