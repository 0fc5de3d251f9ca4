// Certified complex root enclosures for integer polynomials.
#pragma once

#include "salem/numeric.hpp"
#include "salem/poly.hpp"

#include <stdexcept>
#include <vector>

namespace salem {

// A disk that provably contains exactly one root of its source polynomial.
// A center with an exactly zero imaginary part marks a certified real root:
// the disk is symmetric about the real axis and holds a single root, so that
// root equals its own conjugate.
struct RootEnclosure {
  BigComplex center;
  BigFloat radius;

  [[nodiscard]] bool is_real() const { return center.im.is_zero(); }
  [[nodiscard]] bool contains(const BigComplex& z) const;
};

struct RootCertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All deg p roots of a squarefree integer polynomial, found by Aberth-Ehrlich
// iteration and certified with Smith's inclusion disks D(z_i, n |W_i|), W_i
// the Weierstrass correction, padded for floating-point evaluation error.
// Throws RootCertificationError when the disks cannot be separated at the
// requested precision; callers retry with more bits.
std::vector<RootEnclosure> complex_roots(const IntPoly& p, int precision_bits);

// complex_roots with precision doubling from start_bits up to max_bits.
std::vector<RootEnclosure> complex_roots_adaptive(const IntPoly& p, int start_bits, int max_bits = 8192);

}  // namespace salem
