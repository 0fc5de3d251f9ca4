#include "salem/poly.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <utility>

namespace salem {

IntPoly::IntPoly(std::vector<Integer> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

IntPoly::IntPoly(std::initializer_list<long> coeffs) {
  coeffs_.reserve(coeffs.size());
  for (long c : coeffs) coeffs_.emplace_back(c);
  normalize();
}

IntPoly IntPoly::constant(const Integer& c) { return IntPoly(std::vector<Integer>{c}); }

IntPoly IntPoly::monomial(const Integer& c, int degree) {
  std::vector<Integer> v(static_cast<std::size_t>(degree) + 1);
  v.back() = c;
  return IntPoly(std::move(v));
}

IntPoly IntPoly::from_longs(const std::vector<long>& coeffs) {
  std::vector<Integer> v;
  v.reserve(coeffs.size());
  for (long c : coeffs) v.emplace_back(c);
  return IntPoly(std::move(v));
}

void IntPoly::normalize() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Integer IntPoly::coeff(int k) const {
  if (k < 0 || k > degree()) return 0;
  return coeffs_[static_cast<std::size_t>(k)];
}

const Integer& IntPoly::leading() const {
  if (is_zero()) throw std::domain_error("leading coefficient of the zero polynomial");
  return coeffs_.back();
}

Integer IntPoly::evaluate(const Integer& x) const {
  Integer acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Rational IntPoly::evaluate(const Rational& x) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

int IntPoly::sign_at(const Rational& x) const {
  if (is_zero()) return 0;
  // b^d p(a/b) with b > 0 has the sign of p(a/b).
  const Integer& a = x.get_num();
  const Integer& b = x.get_den();
  Integer acc = coeffs_.back();
  Integer bp = 1;
  for (int k = degree() - 1; k >= 0; --k) {
    bp *= b;
    acc = acc * a + coeffs_[static_cast<std::size_t>(k)] * bp;
  }
  return sgn(acc);
}

IntPoly IntPoly::derivative() const {
  if (degree() <= 0) return {};
  std::vector<Integer> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<unsigned long>(k);
  return IntPoly(std::move(d));
}

Integer IntPoly::content() const {
  Integer g = 0;
  for (const auto& c : coeffs_) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

IntPoly IntPoly::primitive_part() const {
  if (is_zero()) return {};
  Integer g = content();
  if (leading() < 0) g = -g;
  std::vector<Integer> v(coeffs_.size());
  for (std::size_t k = 0; k < v.size(); ++k) mpz_divexact(v[k].get_mpz_t(), coeffs_[k].get_mpz_t(), g.get_mpz_t());
  return IntPoly(std::move(v));
}

IntPoly& IntPoly::operator+=(const IntPoly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  normalize();
  return *this;
}

IntPoly& IntPoly::operator-=(const IntPoly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  normalize();
  return *this;
}

IntPoly& IntPoly::operator*=(const Integer& s) {
  for (auto& c : coeffs_) c *= s;
  normalize();
  return *this;
}

IntPoly operator*(const IntPoly& a, const IntPoly& b) { return multiply(a, b); }

IntPoly operator-(const IntPoly& a) {
  std::vector<Integer> v = a.coeffs_;
  for (auto& c : v) c = -c;
  return IntPoly(std::move(v));
}

bool operator<(const IntPoly& a, const IntPoly& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  for (int k = a.degree(); k >= 0; --k) {
    const auto& x = a.coeffs_[static_cast<std::size_t>(k)];
    const auto& y = b.coeffs_[static_cast<std::size_t>(k)];
    if (x != y) return x < y;
  }
  return false;
}

IntPoly multiply(const IntPoly& a, const IntPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Integer> out(a.coeffs().size() + b.coeffs().size() - 1);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
    if (a.coeffs()[i] == 0) continue;
    for (std::size_t j = 0; j < b.coeffs().size(); ++j) {
      mpz_addmul(out[i + j].get_mpz_t(), a.coeffs()[i].get_mpz_t(), b.coeffs()[j].get_mpz_t());
    }
  }
  return IntPoly(std::move(out));
}

std::optional<IntPoly> exact_divide(const IntPoly& a, const IntPoly& b) {
  if (b.is_zero()) throw std::domain_error("division by the zero polynomial");
  if (a.is_zero()) return IntPoly{};
  if (a.degree() < b.degree()) return std::nullopt;
  std::vector<Integer> rem = a.coeffs();
  const int db = b.degree();
  const Integer& lc = b.leading();
  std::vector<Integer> quot(static_cast<std::size_t>(a.degree() - db) + 1);
  for (int k = a.degree(); k >= db; --k) {
    Integer& top = rem[static_cast<std::size_t>(k)];
    if (top == 0) continue;
    if (!mpz_divisible_p(top.get_mpz_t(), lc.get_mpz_t())) return std::nullopt;
    Integer q;
    mpz_divexact(q.get_mpz_t(), top.get_mpz_t(), lc.get_mpz_t());
    for (int j = 0; j <= db; ++j) {
      mpz_submul(rem[static_cast<std::size_t>(k - db + j)].get_mpz_t(), q.get_mpz_t(),
                 b.coeffs()[static_cast<std::size_t>(j)].get_mpz_t());
    }
    quot[static_cast<std::size_t>(k - db)] = std::move(q);
  }
  for (int k = 0; k < db; ++k) {
    if (rem[static_cast<std::size_t>(k)] != 0) return std::nullopt;
  }
  return IntPoly(std::move(quot));
}

IntPoly compose_square(const IntPoly& p) {
  if (p.is_zero()) return {};
  std::vector<Integer> v(2 * p.coeffs().size() - 1);
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) v[2 * k] = p.coeffs()[k];
  return IntPoly(std::move(v));
}

namespace {

// Pseudo-remainder: lc(g)^(deg f - deg g + 1) * f mod g.
IntPoly pseudo_remainder(const IntPoly& f, const IntPoly& g) {
  std::vector<Integer> r = f.coeffs();
  const int dg = g.degree();
  const Integer& c = g.leading();
  for (int k = f.degree(); k >= dg; --k) {
    const Integer top = r[static_cast<std::size_t>(k)];
    for (auto& x : r) x *= c;
    if (top != 0) {
      for (int j = 0; j <= dg; ++j) {
        mpz_submul(r[static_cast<std::size_t>(k - dg + j)].get_mpz_t(), top.get_mpz_t(),
                   g.coeffs()[static_cast<std::size_t>(j)].get_mpz_t());
      }
    }
    r[static_cast<std::size_t>(k)] = 0;
  }
  return IntPoly(std::move(r));
}

}  // namespace

IntPoly gcd(const IntPoly& a, const IntPoly& b) {
  IntPoly f = a.primitive_part();
  IntPoly g = b.primitive_part();
  if (f.degree() < g.degree()) std::swap(f, g);
  while (!g.is_zero()) {
    IntPoly r = pseudo_remainder(f, g).primitive_part();
    f = std::move(g);
    g = std::move(r);
  }
  return f;
}

bool is_squarefree(const IntPoly& p) {
  if (p.degree() <= 1) return !p.is_zero();
  return gcd(p, p.derivative()).degree() == 0;
}

bool is_palindromic(const IntPoly& p) {
  const auto& c = p.coeffs();
  return std::equal(c.begin(), c.end(), c.rbegin());
}

PalindromicPoly::PalindromicPoly(IntPoly p) : p_(std::move(p)) {
  if (!p_.is_monic()) throw std::invalid_argument("palindromic polynomial must be monic");
  if (p_.degree() < 2 || p_.degree() % 2 != 0) throw std::invalid_argument("palindromic polynomial must have even degree >= 2");
  if (!is_palindromic(p_)) throw std::invalid_argument("polynomial is not palindromic: " + to_string(p_));
}

TracePoly::TracePoly(IntPoly p) : p_(std::move(p)) {
  if (!p_.is_monic() || p_.degree() < 1) throw std::invalid_argument("trace polynomial must be monic of degree >= 1");
}

std::vector<Integer> trace_transform_symmetric(const std::vector<Integer>& symmetric, int m) {
  if (static_cast<int>(symmetric.size()) != 2 * m + 1) throw std::invalid_argument("symmetric vector must have length 2m+1");
  // centred[d + m] holds the coefficient of x^(m+d); peel off T_j (x + 1/x)^j from the top.
  std::vector<Integer> centred = symmetric;
  std::vector<Integer> trace(static_cast<std::size_t>(m) + 1);
  for (int j = m; j >= 0; --j) {
    const Integer t = centred[static_cast<std::size_t>(m + j)];
    trace[static_cast<std::size_t>(j)] = t;
    if (t == 0) continue;
    for (int i = 0; i <= j; ++i) {
      centred[static_cast<std::size_t>(m + j - 2 * i)] -= t * binomial(static_cast<unsigned long>(j), static_cast<unsigned long>(i));
    }
  }
  return trace;
}

std::vector<Integer> trace_inverse_symmetric(const std::vector<Integer>& trace, int m) {
  if (static_cast<int>(trace.size()) != m + 1) throw std::invalid_argument("trace vector must have length m+1");
  std::vector<Integer> out(static_cast<std::size_t>(2 * m) + 1);
  for (int j = 0; j <= m; ++j) {
    const Integer& t = trace[static_cast<std::size_t>(j)];
    if (t == 0) continue;
    for (int i = 0; i <= j; ++i) {
      out[static_cast<std::size_t>(m + j - 2 * i)] += t * binomial(static_cast<unsigned long>(j), static_cast<unsigned long>(i));
    }
  }
  return out;
}

TracePoly trace_transform(const PalindromicPoly& p) {
  const int m = p.half_degree();
  return TracePoly(IntPoly(trace_transform_symmetric(p.poly().coeffs(), m)));
}

PalindromicPoly trace_inverse(const TracePoly& t) {
  const int m = t.degree();
  return PalindromicPoly(IntPoly(trace_inverse_symmetric(t.poly().coeffs(), m)));
}

SturmSequence::SturmSequence(const IntPoly& p) {
  if (p.is_zero()) throw std::domain_error("Sturm sequence of the zero polynomial");
  chain_.push_back(p);
  if (p.degree() == 0) return;
  chain_.push_back(p.derivative());
  while (true) {
    const IntPoly& f = chain_[chain_.size() - 2];
    const IntPoly& g = chain_.back();
    if (g.degree() == 0) break;
    IntPoly r = pseudo_remainder(f, g);
    if (r.is_zero()) break;
    // rem = prem / lc(g)^(delta+1); the chain needs -rem up to a positive factor.
    const int delta = f.degree() - g.degree();
    const bool multiplier_negative = g.leading() < 0 && (delta + 1) % 2 == 1;
    Integer c = r.content();
    if (!multiplier_negative) c = -c;
    std::vector<Integer> v(r.coeffs().size());
    for (std::size_t k = 0; k < v.size(); ++k) mpz_divexact(v[k].get_mpz_t(), r.coeffs()[k].get_mpz_t(), c.get_mpz_t());
    chain_.emplace_back(std::move(v));
  }
}

int SturmSequence::variations_at(const Rational& x) const {
  int changes = 0;
  int last = 0;
  for (const auto& f : chain_) {
    const int s = f.sign_at(x);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

int SturmSequence::variations_at_infinity(int direction) const {
  int changes = 0;
  int last = 0;
  for (const auto& f : chain_) {
    int s = sgn(f.leading());
    if (direction < 0 && f.degree() % 2 == 1) s = -s;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

int count_real_roots_in(const IntPoly& p, const Rational& lo, const Rational& hi) {
  if (p.is_zero()) throw std::domain_error("root count of the zero polynomial");
  if (!(lo < hi)) throw std::invalid_argument("count_real_roots_in requires lo < hi");
  if (p.sign_at(lo) == 0 || p.sign_at(hi) == 0) throw std::invalid_argument("interval endpoint is a root");
  const SturmSequence s(p);
  return s.variations_at(lo) - s.variations_at(hi);
}

int count_real_roots_above(const IntPoly& p, const Rational& lo) {
  if (p.is_zero()) throw std::domain_error("root count of the zero polynomial");
  if (p.sign_at(lo) == 0) throw std::invalid_argument("interval endpoint is a root");
  const SturmSequence s(p);
  return s.variations_at(lo) - s.variations_at_infinity(+1);
}

namespace {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  IntPoly parse() {
    std::vector<Integer> coeffs;
    skip_space();
    if (pos_ == text_.size()) throw ParseError(pos_, "empty polynomial");
    bool first = true;
    while (true) {
      skip_space();
      if (pos_ == text_.size()) break;
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = get() == '-' ? -1 : 1;
        skip_space();
      } else if (!first) {
        throw ParseError(pos_, "expected '+' or '-'");
      }
      first = false;
      auto [c, e] = term();
      c *= sign;
      if (coeffs.size() <= static_cast<std::size_t>(e)) coeffs.resize(static_cast<std::size_t>(e) + 1);
      coeffs[static_cast<std::size_t>(e)] += c;
    }
    return IntPoly(std::move(coeffs));
  }

 private:
  std::pair<Integer, int> term() {
    const std::size_t start = pos_;
    Integer c = 1;
    bool have_number = false;
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
      c = number();
      have_number = true;
      skip_space();
      if (pos_ < text_.size() && peek() == '*' && !(pos_ + 1 < text_.size() && text_[pos_ + 1] == '*')) {
        ++pos_;
        skip_space();
        if (pos_ == text_.size() || !std::isalpha(static_cast<unsigned char>(peek()))) throw ParseError(pos_, "expected variable after '*'");
      }
    }
    int e = 0;
    if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(peek()))) {
      const char v = get();
      if (var_ == 0) var_ = v;
      if (v != var_) throw ParseError(pos_ - 1, std::string("mixed variables '") + var_ + "' and '" + v + "'");
      e = 1;
      skip_space();
      if (pos_ < text_.size() && (peek() == '^' || (peek() == '*' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*'))) {
        pos_ += peek() == '^' ? 1 : 2;
        skip_space();
        if (pos_ == text_.size() || !std::isdigit(static_cast<unsigned char>(peek()))) throw ParseError(pos_, "expected exponent");
        const Integer big = number();
        if (big > 4096) throw ParseError(pos_, "exponent too large");
        e = static_cast<int>(big.get_si());
      }
    } else if (!have_number) {
      throw ParseError(start, "expected term");
    }
    return {c, e};
  }

  Integer number() {
    std::string digits;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(get());
    return Integer(digits);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() const { return text_[pos_]; }
  char get() { return text_[pos_++]; }

  std::string_view text_;
  std::size_t pos_ = 0;
  char var_ = 0;
};

IntPoly parse_coeff_list(std::string_view text) {
  std::vector<Integer> coeffs;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view field = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    std::size_t i = 0;
    while (i < field.size() && std::isspace(static_cast<unsigned char>(field[i]))) ++i;
    std::size_t j = field.size();
    while (j > i && std::isspace(static_cast<unsigned char>(field[j - 1]))) --j;
    const std::string_view token = field.substr(i, j - i);
    std::size_t k = 0;
    if (k < token.size() && (token[k] == '+' || token[k] == '-')) ++k;
    if (k == token.size()) throw ParseError(pos + i, "expected integer coefficient");
    for (; k < token.size(); ++k) {
      if (!std::isdigit(static_cast<unsigned char>(token[k]))) throw ParseError(pos + i + k, "expected integer coefficient");
    }
    coeffs.emplace_back(std::string(token[0] == '+' ? token.substr(1) : token));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return IntPoly(std::move(coeffs));
}

}  // namespace

IntPoly parse_poly(std::string_view text) {
  if (text.find(',') != std::string_view::npos) return parse_coeff_list(text);
  return ExpressionParser(text).parse();
}

std::string to_string(const IntPoly& p, char var) {
  if (p.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (int k = p.degree(); k >= 0; --k) {
    const Integer& c = p.coeffs()[static_cast<std::size_t>(k)];
    if (c == 0) continue;
    const Integer mag = abs(c);
    if (first) {
      if (c < 0) out << '-';
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (k == 0 || mag != 1) out << mag.get_str();
    if (k >= 1) out << var;
    if (k >= 2) out << '^' << k;
  }
  return out.str();
}

std::string to_coeff_list(const IntPoly& p, std::string_view sep) {
  if (p.is_zero()) return "0";
  std::string out;
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
    if (k) out += sep;
    out += p.coeffs()[k].get_str();
  }
  return out;
}

}  // namespace salem
