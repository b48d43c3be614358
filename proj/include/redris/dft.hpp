#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "redris/types.hpp"

namespace redris {

/**
 * @brief Beam-domain transform of a square planar lens with K = side^2 ports.
 *
 * matrix is the Kronecker square U1 (x) U1 of the side-point unitary DFT, so
 * it is unitary and symmetric. Ports are indexed row-major over the aperture.
 */
struct DftOperator {
  int size = 0;  // K
  int side = 0;  // sqrt(K)
  CMatrix matrix;
};

/**
 * @brief Builds the 2-D DFT operator for a lens with K ports.
 *
 * K must be an even perfect square (the port-pairing constraint needs an even
 * count, the planar transform needs a square one).
 */
inline DftOperator make_dft_operator(int k) {
  if (k < 4) throw std::invalid_argument("make_dft_operator: K must be at least 4, got " + std::to_string(k));
  if (k % 2 != 0) throw std::invalid_argument("make_dft_operator: K must be even, got " + std::to_string(k));
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(k))));
  if (side * side != k)
    throw std::invalid_argument("make_dft_operator: K must be a perfect square, got " + std::to_string(k));

  CMatrix u1(side, side);
  const double scale = 1.0 / std::sqrt(static_cast<double>(side));
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(a) * static_cast<double>(b) / side;
      u1(a, b) = scale * Complex(std::cos(angle), std::sin(angle));
    }
  }

  DftOperator op;
  op.size = k;
  op.side = side;
  op.matrix = CMatrix(k, k);
  // Kronecker square; port (p, q) maps to row-major index p * side + q.
  for (int p = 0; p < side; ++p)
    for (int q = 0; q < side; ++q)
      op.matrix.block(p * side, q * side, side, side) = u1(p, q) * u1;
  return op;
}

}  // namespace redris
