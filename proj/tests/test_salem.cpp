#include <doctest.h>

#include "salem/salem.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace salem;

namespace {

SalemRecord as_salem(const Classification& c) {
  REQUIRE(std::holds_alternative<SalemRecord>(c));
  return std::get<SalemRecord>(c);
}

IntPoly palindromic_from_free(const std::vector<Integer>& free_coeffs) {
  const int m = static_cast<int>(free_coeffs.size());
  std::vector<Integer> c(static_cast<std::size_t>(2 * m) + 1);
  c[0] = c[static_cast<std::size_t>(2 * m)] = 1;
  for (int k = 1; k <= m; ++k) {
    c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(2 * m - k)] = free_coeffs[static_cast<std::size_t>(k - 1)];
  }
  return IntPoly(c);
}

// Brute force over the coefficient box: classify every palindromic monic
// candidate and keep Salem numbers with lambda <= Q.
std::set<std::vector<Integer>> box_oracle(int m, long Q) {
  const CoeffBox box = coeff_box(m, Rational(Q));
  std::set<std::vector<Integer>> out;
  std::vector<Integer> free(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) free[static_cast<std::size_t>(k)] = -box.bound[static_cast<std::size_t>(k)];
  while (true) {
    const IntPoly p = palindromic_from_free(free);
    const auto c = classify(p, 128);
    if (const auto* s = std::get_if<SalemRecord>(&c)) {
      const BigFloat q(Q, 160);
      // Q is an integer and lambda is irrational, so the enclosure decides.
      REQUIRE_FALSE(s->lambda.contains(BigComplex(q, BigFloat(160))));
      if (s->lambda.center.re < q) out.insert(p.coeffs());
    }
    int k = 0;
    for (; k < m; ++k) {
      auto& v = free[static_cast<std::size_t>(k)];
      if (v < box.bound[static_cast<std::size_t>(k)]) {
        ++v;
        break;
      }
      v = -box.bound[static_cast<std::size_t>(k)];
    }
    if (k == m) break;
  }
  return out;
}

std::set<std::vector<Integer>> poly_set(const std::vector<SalemRecord>& records) {
  std::set<std::vector<Integer>> out;
  for (const auto& r : records) out.insert(r.min_poly.poly().coeffs());
  return out;
}

}  // namespace

TEST_CASE("classify examples") {
  const auto golden = as_salem(classify({1, -3, 1}));
  CHECK(golden.m == 1);
  CHECK(golden.lambda_approx() == doctest::Approx(2.6180339887).epsilon(1e-10));
  CHECK(golden.lambda.radius.to_double() < 1e-60);

  const auto cyc = classify({1, 1, 1});
  REQUIRE(std::holds_alternative<Cyclotomic>(cyc));
  CHECK(std::get<Cyclotomic>(cyc).order == 3);

  CHECK(std::holds_alternative<ReducibleOrOther>(classify({1, 0, -3, 0, 1})));
  CHECK(std::holds_alternative<ReducibleOrOther>(classify({-2, 0, 0, 1})));
  // (x^2 - 3x + 1)(x^2 + x + 1): palindromic, Salem-like roots, cyclotomic factor
  CHECK(std::holds_alternative<ReducibleOrOther>(classify(multiply({1, -3, 1}, {1, 1, 1}))));
  CHECK(std::holds_alternative<ReducibleOrOther>(classify(multiply({1, -3, 1}, {1, -3, 1}))));

  const auto lehmer = as_salem(classify({1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1}));
  CHECK(lehmer.m == 5);
  CHECK(lehmer.lambda_approx() == doctest::Approx(1.17628081826).epsilon(1e-11));

  CHECK_THROWS_AS(classify({1, -3, 2}), std::invalid_argument);
  CHECK_THROWS_AS(classify({1, 1}), std::invalid_argument);
}

TEST_CASE("classify recognises every small cyclotomic polynomial") {
  for (int d = 3; d <= 60; ++d) {
    const auto c = classify(cyclotomic_poly(d));
    REQUIRE(std::holds_alternative<Cyclotomic>(c));
    CHECK(std::get<Cyclotomic>(c).order == d);
  }
  // x^4 - 1 = Phi_1 Phi_2 Phi_4 is cyclotomic but not irreducible
  CHECK(std::holds_alternative<ReducibleOrOther>(classify({-1, 0, 0, 0, 1})));
  CHECK(std::holds_alternative<ReducibleOrOther>(classify(multiply(cyclotomic_poly(3), cyclotomic_poly(5)))));
}

TEST_CASE("cyclotomic polynomials") {
  CHECK(cyclotomic_poly(1) == IntPoly{-1, 1});
  CHECK(cyclotomic_poly(2) == IntPoly{1, 1});
  CHECK(cyclotomic_poly(12) == IntPoly{1, 0, -1, 0, 1});
  for (int n = 1; n <= 40; ++n) {
    IntPoly prod{1};
    for (int d = 1; d <= n; ++d) {
      if (n % d == 0) {
        CHECK(cyclotomic_poly(d).degree() == euler_phi(d));
        prod = multiply(prod, cyclotomic_poly(d));
      }
    }
    CHECK(prod == IntPoly::monomial(1, n) - IntPoly{1});
  }
}

TEST_CASE("cyclotomic_factor") {
  const auto a = cyclotomic_factor({1, 1, 1}, 6);
  REQUIRE(a.has_value());
  CHECK(a->first == 3);
  CHECK_FALSE(cyclotomic_factor({1, -3, 1}, 12).has_value());
  const auto b = cyclotomic_factor({-1, 0, 0, 0, 1}, 4);
  REQUIRE(b.has_value());
  CHECK(b->first == 1);
  CHECK(b->second == IntPoly{-1, 1});
  // order beyond the cap is not reported
  CHECK_FALSE(cyclotomic_factor(cyclotomic_poly(7), 6).has_value());
}

TEST_CASE("is_irreducible examples") {
  CHECK(is_irreducible({1, -3, 1}));
  CHECK_FALSE(is_irreducible({1, 0, -3, 0, 1}));
  CHECK(is_irreducible({1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1}));
  CHECK(is_irreducible({-2, 0, 0, 1}));
  CHECK(is_irreducible({1, 0, 0, 0, 1}));  // Phi_8
  CHECK_FALSE(is_irreducible({4, 0, 0, 0, 1}));  // (x^2 + 2x + 2)(x^2 - 2x + 2)
  CHECK_FALSE(is_irreducible({1, 2, 1}));
  CHECK_THROWS_AS(is_irreducible(IntPoly::monomial(1, 25) + IntPoly{1}), std::invalid_argument);
  CHECK_THROWS_AS(is_irreducible({1, 2}), std::invalid_argument);
}

TEST_CASE("is_irreducible rejects random products and agrees with classify on Salem polynomials") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<long> coef(-6, 6);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<long> a(static_cast<std::size_t>(2 + trial % 4)), b(static_cast<std::size_t>(2 + trial % 3));
    for (auto& x : a) x = coef(rng);
    for (auto& x : b) x = coef(rng);
    a.back() = 1;
    b.back() = 1;
    const IntPoly prod = multiply(IntPoly::from_longs(a), IntPoly::from_longs(b));
    CHECK_FALSE(is_irreducible(prod));
  }
  for (const auto& r : enumerate_salem(2, Rational(6))) CHECK(is_irreducible(r.min_poly.poly()));
  for (const auto& r : enumerate_salem(3, Rational(3))) CHECK(is_irreducible(r.min_poly.poly()));
}

TEST_CASE("coeff_box") {
  const auto b1 = coeff_box(1, Rational(10));
  REQUIRE(b1.bound.size() == 1);
  CHECK(b1.bound[0] == 20);
  const auto b2 = coeff_box(2, Rational(10));
  REQUIRE(b2.bound.size() == 2);
  CHECK(b2.bound[0] == 40);
  CHECK(b2.bound[1] == 60);
  const auto b3 = coeff_box(2, Rational(5, 2));
  CHECK(b3.bound[0] == 10);
  CHECK(b3.bound[1] == 15);
  // Degenerate Q = 1: still a valid box; nothing lies below it.
  const auto b4 = coeff_box(3, Rational(1));
  CHECK(b4.bound == std::vector<Integer>{6, 15, 20});
  CHECK(enumerate_salem(3, Rational(1)).empty());
}

TEST_CASE("enumerate_salem degree 2") {
  const auto r = enumerate_salem(1, Rational(10));
  REQUIRE(r.size() == 8);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const long t = 3 + static_cast<long>(i);
    CHECK(r[i].min_poly.poly() == IntPoly{1, -t, 1});
    const double expected = (t + std::sqrt(static_cast<double>(t * t - 4))) / 2;
    CHECK(r[i].lambda_approx() == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(enumerate_salem(1, Rational(2)).empty());
  for (long Q : {10L, 100L, 1000L}) {
    const auto all = enumerate_salem(1, Rational(Q));
    long direct = 0;
    for (long t = 3;; ++t) {
      if ((t + std::sqrt(static_cast<double>(t * t - 4))) / 2 > static_cast<double>(Q)) break;
      ++direct;
    }
    CHECK(static_cast<long>(all.size()) == direct);
    CHECK(std::labs(static_cast<long>(all.size()) - Q) <= 2);
  }
}

TEST_CASE("trace enumeration matches the coefficient-box oracle") {
  for (int m = 1; m <= 2; ++m) {
    for (long Q : {2L, 5L, 10L, 15L}) {
      CAPTURE(m);
      CAPTURE(Q);
      CHECK(poly_set(enumerate_salem(m, Rational(Q))) == box_oracle(m, Q));
    }
  }
}

TEST_CASE("enumerated records certify, are palindromic, sorted and monotone in Q") {
  for (int m = 1; m <= 3; ++m) {
    const auto small = enumerate_salem(m, Rational(4));
    const auto large = enumerate_salem(m, Rational(7));
    const auto s_small = poly_set(small);
    const auto s_large = poly_set(large);
    CHECK(std::includes(s_large.begin(), s_large.end(), s_small.begin(), s_small.end()));
    for (std::size_t i = 0; i < large.size(); ++i) {
      const auto& r = large[i];
      CHECK(r.m == m);
      CHECK(is_palindromic(r.min_poly.poly()));
      CHECK(r.min_poly.poly().degree() == 2 * m);
      const auto again = as_salem(classify(r.min_poly.poly()));
      CHECK(again.lambda.contains(r.lambda.center));
      CHECK(r.lambda_approx() > 1.0);
      CHECK(r.lambda_approx() <= 7.0);
      if (i > 0) CHECK(lambda_less(large[i - 1], r));
    }
  }
}

TEST_CASE("lambda enclosure agrees with the certified root finder") {
  for (const auto& r : enumerate_salem(2, Rational(4))) {
    const auto roots = complex_roots(r.min_poly.poly(), 256);
    int hits = 0;
    for (const auto& z : roots) {
      if (z.is_real() && z.center.re > BigFloat(1L, 64) && z.contains(r.lambda.center)) ++hits;
    }
    CHECK(hits == 1);
  }
}

TEST_CASE("enumeration is independent of the worker count and respects the budget") {
  EnumerationOptions one;
  EnumerationOptions four;
  four.workers = 4;
  const auto a = enumerate_salem(2, Rational(12), one);
  const auto b = enumerate_salem(2, Rational(12), four);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_record_line(a[i]) == to_record_line(b[i]));

  EnumerationOptions tiny;
  tiny.budget = 10;
  CHECK_THROWS_AS(enumerate_salem(2, Rational(12), tiny), BudgetExceeded);
  bool thrown = false;
  try {
    enumerate_salem(3, Rational(100), tiny);
  } catch (const BudgetExceeded& e) {
    thrown = true;
    CHECK(e.estimate > 10);
  }
  CHECK(thrown);
}

TEST_CASE("record line format") {
  const auto r = enumerate_salem(1, Rational(3));
  REQUIRE(r.size() == 1);
  CHECK(to_record_line(r[0]) == "2.61803398874989, 1, 1, -3, 1");
}
