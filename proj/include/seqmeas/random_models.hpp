#pragma once

// Seeded random operators, unitaries, stochastic matrices and ensemble
// configurations for the verification corpus.

#include <cstdint>
#include <random>
#include <vector>

#include "seqmeas/ensembles.hpp"
#include "seqmeas/linalg.hpp"

namespace seqmeas {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent generator for (seed, stream): both are mixed through
// SplitMix64 before seeding, so neighbouring streams are decorrelated.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

CMatrix random_hermitian(Rng& rng, Eigen::Index n, double scale = 1.0);
CMatrix random_real_symmetric(Rng& rng, Eigen::Index n, double scale = 1.0);
// Spectrum drawn with repeated levels (some multiplicity > 1 when n > 1).
CMatrix random_degenerate_hermitian(Rng& rng, Eigen::Index n, double scale = 1.0);
// Haar-distributed, from the QR decomposition of a complex Ginibre matrix.
CMatrix random_unitary(Rng& rng, Eigen::Index n);
// Real orthogonal (symmetric spectrum not required).
CMatrix random_orthogonal(Rng& rng, Eigen::Index n);
// exp(-i K) for a random second-quantized one-particle K; commutes with N.
CMatrix random_number_conserving_unitary(Rng& rng, int modes);

// Strictly positive doubly stochastic matrix by Sinkhorn balancing.
RMatrix random_doubly_stochastic(Rng& rng, Eigen::Index n);
// Symmetric strictly positive doubly stochastic matrix.
RMatrix random_symmetric_doubly_stochastic(Rng& rng, Eigen::Index n);
RMatrix random_permutation(Rng& rng, Eigen::Index n);
// Probability vector with entries bounded away from zero.
std::vector<double> random_probability(Rng& rng, std::size_t n);

LocalCanonicalConfig random_local_canonical(Rng& rng, const std::vector<int>& dims);
MicrocanonicalConfig random_microcanonical(Rng& rng, int dim);
GrandCanonicalConfig random_grand_canonical(Rng& rng, int modes);
PeriodicThermoConfig random_periodic_thermo(Rng& rng, int system_dim, int bath_dim);

}  // namespace seqmeas
