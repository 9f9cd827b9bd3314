#pragma once

#include <numbers>

#include "seqmeas/faddeeva.hpp"

namespace seqmeas::detail {

// exp(-2 i pi^2 t k^2) erfi((1 + i)(2 pi k t - d) / (2 sqrt t)) as
// i * sign * exp(-2 i pi^2 t k^2) + rem; sign = 0 when evaluated directly.
struct ErfiPiece {
  int sign = 0;
  cplx rem;
};

ErfiPiece erfi_piece(int k, int d, double t);

// Y_k(delta) from the pieces at d = delta, delta - 1, delta + 1.
cplx combine_y(int k, double t, const ErfiPiece& at, const ErfiPiece& below,
               const ErfiPiece& above);

// Diagonal (m = n) amplitude at delta.
cplx combine_z(int n, int delta, double t, const ErfiPiece& at, const ErfiPiece& below,
               const ErfiPiece& above);

inline double offdiagonal_weight(int diff) {
  const double d = diff;
  return 1.0 / (16.0 * std::numbers::pi * std::numbers::pi * d * d);
}

}  // namespace seqmeas::detail
