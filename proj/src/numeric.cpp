#include "salem/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <vector>

namespace salem {

std::string BigFloat::to_string(int digits) const {
  if (is_zero()) return "0";
  if (!is_finite()) return mpfr_nan_p(v_) ? "nan" : (sign() > 0 ? "inf" : "-inf");
  std::vector<char> buf(static_cast<std::size_t>(digits) + 64);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, v_);
  return std::string(buf.data());
}

BigFloat sqrt(const BigFloat& x) {
  BigFloat out(x.prec());
  mpfr_sqrt(out.get(), x.get(), MPFR_RNDN);
  return out;
}

BigFloat abs(const BigFloat& x) {
  BigFloat out(x.prec());
  mpfr_abs(out.get(), x.get(), MPFR_RNDN);
  return out;
}

BigFloat exp(const BigFloat& x) {
  BigFloat out(x.prec());
  mpfr_exp(out.get(), x.get(), MPFR_RNDN);
  return out;
}

BigFloat log(const BigFloat& x) {
  BigFloat out(x.prec());
  mpfr_log(out.get(), x.get(), MPFR_RNDN);
  return out;
}

BigFloat pow(const BigFloat& x, const BigFloat& y) {
  BigFloat out(std::max(x.prec(), y.prec()));
  mpfr_pow(out.get(), x.get(), y.get(), MPFR_RNDN);
  return out;
}

BigFloat pi(mpfr_prec_t prec) {
  BigFloat out(prec);
  mpfr_const_pi(out.get(), MPFR_RNDN);
  return out;
}

BigFloat ldexp(const BigFloat& x, long e) {
  BigFloat out(x.prec());
  mpfr_mul_2si(out.get(), x.get(), e, MPFR_RNDN);
  return out;
}

BigFloat abs(const BigComplex& z) {
  BigFloat out(z.prec());
  mpfr_hypot(out.get(), z.re.get(), z.im.get(), MPFR_RNDN);
  return out;
}

BigComplex conj(const BigComplex& z) { return {z.re, -z.im}; }

BigComplex sqrt(const BigComplex& z) {
  // sqrt(z) = sqrt((|z| + re)/2) + i sign(im) sqrt((|z| - re)/2)
  const BigFloat r = abs(z);
  BigFloat a = sqrt(ldexp(r + z.re, -1));
  BigFloat b = sqrt(ldexp(r - z.re, -1));
  if (z.im.sign() < 0) b = -b;
  return {std::move(a), std::move(b)};
}

Integer binomial(unsigned long n, unsigned long k) {
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

Integer factorial(unsigned long n) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

Integer pow_int(const Integer& base, unsigned long e) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
  return out;
}

Rational pow_rat(const Rational& base, unsigned long e) {
  Rational out(pow_int(base.get_num(), e), pow_int(base.get_den(), e));
  out.canonicalize();
  return out;
}

Integer floor_of(const Rational& q) {
  Integer out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

Integer ceil_of(const Rational& q) {
  Integer out;
  mpz_cdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

int sign_of(const Integer& v) { return sgn(v); }
int sign_of(const Rational& v) { return sgn(v); }

Rational parse_rational(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw std::invalid_argument("empty number");
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  Integer mantissa = 0;
  long scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa = mantissa * 10 + (c - '0');
      if (seen_point) --scale;
      any_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw std::invalid_argument("malformed number '" + s + "'");
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw std::invalid_argument("malformed number '" + s + "'");
    const std::string exp_part = s.substr(pos + 1);
    if (exp_part.empty()) throw std::invalid_argument("malformed exponent in '" + s + "'");
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(exp_part, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed exponent in '" + s + "'");
    }
    if (used != exp_part.size()) throw std::invalid_argument("malformed exponent in '" + s + "'");
    scale += e;
  }
  Rational out(mantissa);
  if (scale > 0) out *= pow_int(Integer(10), static_cast<unsigned long>(scale));
  if (scale < 0) out /= pow_int(Integer(10), static_cast<unsigned long>(-scale));
  out.canonicalize();
  return negative ? Rational(-out) : out;
}

}  // namespace salem
