#include "salem/roots.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace salem {

bool RootEnclosure::contains(const BigComplex& z) const { return abs(z - center) <= radius; }

namespace {

using cd = std::complex<double>;

// Aberth-Ehrlich in double precision; returns false when the coefficients do
// not fit in a double or the iteration fails to settle.
bool aberth_double(const std::vector<double>& a, std::vector<cd>& z) {
  const int n = static_cast<int>(a.size()) - 1;
  for (double c : a) {
    if (!std::isfinite(c)) return false;
  }
  const double r0 = std::pow(std::abs(a[0] / a[static_cast<std::size_t>(n)]), 1.0 / n);
  const double radius = (std::isfinite(r0) && r0 > 0) ? r0 : 1.0;
  z.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) z[static_cast<std::size_t>(k)] = std::polar(radius, 2 * std::numbers::pi * k / n + 0.4);
  for (int iter = 0; iter < 2000; ++iter) {
    double worst = 0;
    for (int i = 0; i < n; ++i) {
      cd& zi = z[static_cast<std::size_t>(i)];
      cd p = a[static_cast<std::size_t>(n)];
      cd dp = 0;
      for (int k = n - 1; k >= 0; --k) {
        dp = dp * zi + p;
        p = p * zi + a[static_cast<std::size_t>(k)];
      }
      if (p == cd(0)) continue;
      const cd ratio = p / dp;
      cd s = 0;
      for (int j = 0; j < n; ++j) {
        if (j != i) s += 1.0 / (zi - z[static_cast<std::size_t>(j)]);
      }
      const cd w = ratio / (1.0 - ratio * s);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return false;
      zi -= w;
      worst = std::max(worst, std::abs(w) / std::max(1.0, std::abs(zi)));
    }
    if (worst < 1e-14) return true;
  }
  return true;  // stalled near the double-precision floor; multiprecision refines
}

struct HornerResult {
  BigComplex value;
  BigComplex derivative;
};

HornerResult horner_with_derivative(const std::vector<BigFloat>& a, const BigComplex& z) {
  const int n = static_cast<int>(a.size()) - 1;
  const mpfr_prec_t prec = z.prec();
  BigComplex p(a[static_cast<std::size_t>(n)], BigFloat(prec));
  BigComplex dp(prec);
  for (int k = n - 1; k >= 0; --k) {
    dp = dp * z + p;
    p = p * z;
    p.re += a[static_cast<std::size_t>(k)];
  }
  return {std::move(p), std::move(dp)};
}

BigComplex horner(const std::vector<BigFloat>& a, const BigComplex& z) {
  const int n = static_cast<int>(a.size()) - 1;
  BigComplex p(a[static_cast<std::size_t>(n)], BigFloat(z.prec()));
  for (int k = n - 1; k >= 0; --k) {
    p = p * z;
    p.re += a[static_cast<std::size_t>(k)];
  }
  return p;
}

// Smith radius n |W_i| padded for the rounding error of evaluating p and the
// product of differences at precision `prec`.
BigFloat inclusion_radius(const std::vector<BigFloat>& a, const std::vector<BigComplex>& z, std::size_t i, mpfr_prec_t prec) {
  const int n = static_cast<int>(a.size()) - 1;
  const BigComplex value = horner(a, z[i]);
  const BigFloat mod = abs(z[i]);
  BigFloat bound = abs(a[static_cast<std::size_t>(n)]);
  for (int k = n - 1; k >= 0; --k) bound = bound * mod + abs(a[static_cast<std::size_t>(k)]);
  const BigFloat unit = ldexp(BigFloat(1L, prec), -static_cast<long>(prec));
  const BigFloat eval_error = bound * BigFloat(8L * n + 8, prec) * unit;
  BigComplex denom(a[static_cast<std::size_t>(n)], BigFloat(prec));
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j != i) denom = denom * (z[i] - z[j]);
  }
  const BigFloat denom_mod = abs(denom) * (BigFloat(1L, prec) - BigFloat(8L * n + 8, prec) * unit);
  if (denom_mod.sign() <= 0) throw RootCertificationError("coincident root approximations");
  BigFloat r = BigFloat(static_cast<long>(n), prec) * (abs(value) + eval_error) / denom_mod;
  return r * (BigFloat(1L, prec) + ldexp(BigFloat(1L, prec), -20));
}

}  // namespace

std::vector<RootEnclosure> complex_roots(const IntPoly& p, int precision_bits) {
  if (p.is_zero()) throw std::domain_error("roots of the zero polynomial");
  if (precision_bits < 53) precision_bits = 53;
  const int n = p.degree();
  if (n == 0) return {};
  const mpfr_prec_t wp = precision_bits + 32;

  std::vector<double> ad(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) ad[static_cast<std::size_t>(k)] = p.coeffs()[static_cast<std::size_t>(k)].get_d();
  std::vector<cd> zd;
  const bool have_double = aberth_double(ad, zd);

  std::vector<BigFloat> a;
  a.reserve(static_cast<std::size_t>(n) + 1);
  for (const auto& c : p.coeffs()) a.emplace_back(c, wp);

  std::vector<BigComplex> z;
  z.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const cd start = have_double ? zd[static_cast<std::size_t>(k)] : std::polar(1.0, 2 * std::numbers::pi * k / n + 0.4);
    z.emplace_back(BigFloat(start.real(), wp), BigFloat(start.imag(), wp));
  }

  const BigFloat one(1L, wp);
  const BigFloat target = ldexp(one, -static_cast<long>(precision_bits) - 8);
  bool converged = false;
  for (int iter = 0; iter < 400 && !converged; ++iter) {
    BigFloat worst(wp);
    for (int i = 0; i < n; ++i) {
      auto& zi = z[static_cast<std::size_t>(i)];
      auto [value, deriv] = horner_with_derivative(a, zi);
      if (value.re.is_zero() && value.im.is_zero()) continue;
      const BigComplex ratio = value / deriv;
      BigComplex s(wp);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const BigComplex diff = zi - z[static_cast<std::size_t>(j)];
        s += BigComplex(one, BigFloat(wp)) / diff;
      }
      BigComplex corr_den = BigComplex(one, BigFloat(wp)) - ratio * s;
      const BigComplex w = ratio / corr_den;
      if (!w.re.is_finite() || !w.im.is_finite()) throw RootCertificationError("Aberth iteration diverged");
      zi -= w;
      BigFloat scale = abs(zi);
      if (scale < one) scale = one;
      const BigFloat rel = abs(w) / scale;
      if (rel > worst) worst = rel;
    }
    converged = worst < target;
  }
  if (!converged) throw RootCertificationError("Aberth iteration did not converge at " + std::to_string(precision_bits) + " bits");

  std::vector<BigFloat> radii;
  radii.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < z.size(); ++i) radii.push_back(inclusion_radius(a, z, i, wp));
  // Snap near-real centres onto the axis.
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!z[i].im.is_zero() && abs(z[i].im) < radii[i]) {
      z[i].im = BigFloat(wp);
      radii[i] = inclusion_radius(a, z, i, wp);
    }
  }
  const BigFloat shrink = one - ldexp(one, -static_cast<long>(wp) + 8);
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      if (!(abs(z[i] - z[j]) * shrink > radii[i] + radii[j])) {
        throw RootCertificationError("root enclosures overlap at " + std::to_string(precision_bits) + " bits");
      }
    }
  }
  std::vector<RootEnclosure> out;
  out.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out.push_back({std::move(z[i]), std::move(radii[i])});
  return out;
}

std::vector<RootEnclosure> complex_roots_adaptive(const IntPoly& p, int start_bits, int max_bits) {
  int bits = std::max(start_bits, 53);
  while (true) {
    try {
      return complex_roots(p, bits);
    } catch (const RootCertificationError&) {
      if (bits >= max_bits) throw;
      bits *= 2;
    }
  }
}

}  // namespace salem
