// Dense univariate polynomials over the integers.
//
// Coefficients are stored constant term first; the zero polynomial has no
// coefficients and degree -1. Every operation here is exact.
#pragma once

#include "salem/numeric.hpp"

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace salem {

class IntPoly {
 public:
  IntPoly() = default;
  explicit IntPoly(std::vector<Integer> coeffs);
  IntPoly(std::initializer_list<long> coeffs);

  static IntPoly constant(const Integer& c);
  static IntPoly monomial(const Integer& c, int degree);
  static IntPoly from_longs(const std::vector<long>& coeffs);

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] bool is_monic() const { return !is_zero() && coeffs_.back() == 1; }
  [[nodiscard]] const std::vector<Integer>& coeffs() const { return coeffs_; }
  // Coefficient of x^k; zero outside the stored range.
  [[nodiscard]] Integer coeff(int k) const;
  [[nodiscard]] const Integer& leading() const;

  [[nodiscard]] Integer evaluate(const Integer& x) const;
  [[nodiscard]] Rational evaluate(const Rational& x) const;
  // Sign of p(x) computed without forming the rational value.
  [[nodiscard]] int sign_at(const Rational& x) const;

  [[nodiscard]] IntPoly derivative() const;
  // Non-negative gcd of the coefficients.
  [[nodiscard]] Integer content() const;
  [[nodiscard]] IntPoly primitive_part() const;

  IntPoly& operator+=(const IntPoly& o);
  IntPoly& operator-=(const IntPoly& o);
  IntPoly& operator*=(const Integer& s);
  friend IntPoly operator+(IntPoly a, const IntPoly& b) { return a += b; }
  friend IntPoly operator-(IntPoly a, const IntPoly& b) { return a -= b; }
  friend IntPoly operator*(IntPoly a, const Integer& s) { return a *= s; }
  friend IntPoly operator*(const IntPoly& a, const IntPoly& b);
  friend IntPoly operator-(const IntPoly& a);
  friend bool operator==(const IntPoly& a, const IntPoly& b) { return a.coeffs_ == b.coeffs_; }
  friend bool operator!=(const IntPoly& a, const IntPoly& b) { return !(a == b); }
  // Lexicographic on (degree, coefficients from the top); used for stable ordering.
  friend bool operator<(const IntPoly& a, const IntPoly& b);

 private:
  void normalize();
  std::vector<Integer> coeffs_;
};

IntPoly multiply(const IntPoly& a, const IntPoly& b);

// Returns c with a = b * c over the integers, or nullopt when no integer
// quotient exists. Throws std::domain_error when b is zero.
std::optional<IntPoly> exact_divide(const IntPoly& a, const IntPoly& b);

// p(x^2).
IntPoly compose_square(const IntPoly& p);

// Primitive gcd with positive leading coefficient; gcd(0, 0) = 0.
IntPoly gcd(const IntPoly& a, const IntPoly& b);
bool is_squarefree(const IntPoly& p);
// p(x) = x^deg p * p(1/x).
bool is_palindromic(const IntPoly& p);

// Monic palindromic polynomial of even degree 2m.
class PalindromicPoly {
 public:
  // Throws std::invalid_argument unless p is monic, palindromic, of even degree >= 2.
  explicit PalindromicPoly(IntPoly p);
  [[nodiscard]] const IntPoly& poly() const { return p_; }
  [[nodiscard]] int half_degree() const { return p_.degree() / 2; }
  friend bool operator==(const PalindromicPoly& a, const PalindromicPoly& b) { return a.p_ == b.p_; }

 private:
  IntPoly p_;
};

// Monic integer polynomial P of degree m with p(x) = x^m P(x + 1/x).
class TracePoly {
 public:
  // Throws std::invalid_argument unless P is monic of degree >= 1.
  explicit TracePoly(IntPoly p);
  [[nodiscard]] const IntPoly& poly() const { return p_; }
  [[nodiscard]] int degree() const { return p_.degree(); }
  friend bool operator==(const TracePoly& a, const TracePoly& b) { return a.p_ == b.p_; }

 private:
  IntPoly p_;
};

TracePoly trace_transform(const PalindromicPoly& p);
PalindromicPoly trace_inverse(const TracePoly& t);

// Linear versions on symmetric coefficient vectors of formal degree 2m
// (c[k] == c[2m-k], length 2m+1, leading entry may be zero). The result has
// length m+1. Both maps are unimodular and preserve the parity classes
// (index k of the symmetric vector <-> index j of the trace vector with
// k = m + j mod 2).
std::vector<Integer> trace_transform_symmetric(const std::vector<Integer>& symmetric, int m);
std::vector<Integer> trace_inverse_symmetric(const std::vector<Integer>& trace, int m);

// Sturm sequence of p over the integers (pseudo-remainders with sign
// correction and content removal).
class SturmSequence {
 public:
  explicit SturmSequence(const IntPoly& p);
  [[nodiscard]] int variations_at(const Rational& x) const;
  // direction > 0 for +infinity, < 0 for -infinity.
  [[nodiscard]] int variations_at_infinity(int direction) const;
  [[nodiscard]] const std::vector<IntPoly>& chain() const { return chain_; }

 private:
  std::vector<IntPoly> chain_;
};

// Number of distinct real roots of p in the open interval (lo, hi).
// Throws std::domain_error for the zero polynomial, std::invalid_argument
// when lo >= hi or when an endpoint is a root.
int count_real_roots_in(const IntPoly& p, const Rational& lo, const Rational& hi);
// Distinct real roots in (lo, +infinity).
int count_real_roots_above(const IntPoly& p, const Rational& lo);

struct ParseError : std::invalid_argument {
  ParseError(std::size_t position, const std::string& what)
      : std::invalid_argument(what + " at position " + std::to_string(position)), position(position) {}
  std::size_t position;
};

// Accepts "x^4 - 3x^2 + 1", "x^2-3*x+1", "y^2 + y - 1" and comma-separated
// coefficient lists constant term first ("1,-3,1").
IntPoly parse_poly(std::string_view text);
// "x^4 - 3x^2 + 1"
std::string to_string(const IntPoly& p, char var = 'x');
// "1,0,-3,0,1"
std::string to_coeff_list(const IntPoly& p, std::string_view sep = ",");

}  // namespace salem
