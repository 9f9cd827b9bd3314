#pragma once

// Fermionic Fock space over M modes with Jordan-Wigner ordering. Basis state
// k has mode a occupied iff bit a of k is set; dimension 2^M.

#include "seqmeas/linalg.hpp"

namespace seqmeas {

inline constexpr int kMaxModes = 12;

Eigen::Index fock_dim(int modes);

// c_a, with the sign (-1)^{number of occupied modes b < a}.
CMatrix annihilation(int modes, int a);

// sum_a c_a^dagger c_a.
CMatrix number_operator(int modes);

// sum_{a,b} h(a,b) c_a^dagger c_b for a Hermitian M x M one-particle matrix.
CMatrix second_quantize(const CMatrix& h);

}  // namespace seqmeas
