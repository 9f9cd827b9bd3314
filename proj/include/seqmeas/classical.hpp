#pragma once

// Classical phase-space version of the J-equation: for densities p, q and a
// volume-preserving map U, E_p[q(U(x)) / p(x)] = 1.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqmeas/random_models.hpp"

namespace seqmeas {

using PhaseFunction = std::function<double(std::span<const double>)>;
using PhaseSampler = std::function<void(Rng&, std::span<double>)>;

// Points are (q_1..q_N, p_1..p_N).
struct PhaseSpaceDensity {
  int dim = 0;
  PhaseFunction log_density;
  PhaseSampler sampler;
  double log_normalization = 0.0;  // ln Z for canonical densities
  std::string name;
};

// exp(-beta (H - F)) with a caller-supplied exact sampler and ln Z.
PhaseSpaceDensity canonical_density(const PhaseFunction& h, double beta, int dim,
                                    PhaseSampler sampler, double log_z);

// H = p^2/2 + omega^2 q^2/2, exact Gaussian sampler, Z = 2 pi / (beta omega).
PhaseFunction harmonic_hamiltonian(double omega);
PhaseSpaceDensity harmonic_canonical(double omega, double beta);

struct VolumePreservingMap {
  int dim = 0;
  std::function<void(std::span<double>)> forward;  // in place
  std::string certificate;  // "identity", "exact rotation", "leapfrog composition"
};

VolumePreservingMap identity_map(int dim);
// Exact flow of the static oscillator over `duration`.
VolumePreservingMap harmonic_rotation(double omega, double duration);

// H(q, p, t) = |p|^2/2 + V(q, t).
struct SeparableProtocol {
  int dofs = 1;
  std::function<void(std::span<const double> q, double t, std::span<double> grad)> grad_v;
  std::function<double(std::span<const double> q, double t)> potential;
};

// Kick-drift-kick over [0, dt * steps].
VolumePreservingMap leapfrog_map(const SeparableProtocol& h, double dt, int steps);

// omega(t)^2 linear from omega0^2 to omega1^2 over `duration`.
SeparableProtocol harmonic_ramp(double omega0, double omega1, double duration);
SeparableProtocol static_harmonic(double omega);

// max |det DU - 1| over `points` sampled points, by central differences.
double jacobian_defect(const VolumePreservingMap& u, Rng& rng, int points, double scale = 1.0,
                       double step = 1e-5);

struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  double effective_sample_size = 0.0;  // (sum r)^2 / sum r^2
  std::uint64_t n_nonfinite = 0;       // dropped samples
};

struct EstimatorOptions {
  int chains = 8;
  // Abort when more than this fraction of ratios is non-finite.
  double max_nonfinite_fraction = 0.0;
};

// Monte Carlo estimate of E_p[q(U(x)) / p(x)]. Chains use independent
// streams of `seed` and are merged in chain order.
EstimatorResult classical_j_expectation(const PhaseSpaceDensity& p, const PhaseSpaceDensity& q,
                                        const VolumePreservingMap& u, std::uint64_t n,
                                        std::uint64_t seed, const EstimatorOptions& opts = {});

// Samples of w = H1(U(x)) - H0(x), x ~ p.
std::vector<double> work_samples(const PhaseSpaceDensity& p, const PhaseFunction& h0,
                                 const PhaseFunction& h1, const VolumePreservingMap& u,
                                 std::uint64_t n, std::uint64_t seed, int chains = 8);

// Gauss-Hermite nodes and weights for weight exp(-x^2) (Golub-Welsch).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_hermite(int n);

// E[f(x)] for x ~ N(0, diag(stddev^2)) by a tensor Gauss-Hermite rule.
double gaussian_expectation(const PhaseFunction& f, const std::vector<double>& stddev, int n);

// Quadrature value of E_p[exp(-beta w)] for the sudden quench omega0 -> omega1
// from the canonical state at omega0.
double harmonic_quench_quadrature(double beta, double omega0, double omega1, int nodes = 64);

// P(W <= w) for the sudden quench work W = (omega1^2 - omega0^2) q^2 / 2.
double harmonic_quench_work_cdf(double w, double beta, double omega0, double omega1);

struct CrooksBin {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t count_forward = 0;
  std::uint64_t count_reverse = 0;  // counts of -w_R in [lo, hi)
  double log_ratio = 0.0;           // ln(rho_F / rho_R(-w))
  double expected = 0.0;            // beta (center - delta_f)
  double tolerance = 0.0;
  bool used = false;
  bool ok = true;
};

struct ClassicalCrooksReport {
  std::vector<CrooksBin> bins;
  double beta = 0.0;
  double delta_f = 0.0;
  double max_excess = 0.0;  // max(|log_ratio - expected| - tolerance), used bins
  int used_bins = 0;
  bool ok = false;
};

struct ClassicalCrooksSetup {
  PhaseSpaceDensity forward_initial;  // p
  PhaseSpaceDensity reverse_initial;  // q
  PhaseFunction h_initial;
  PhaseFunction h_final;
  VolumePreservingMap forward;
  VolumePreservingMap reverse;
  double beta = 1.0;
  double delta_f = 0.0;
};

// Forward work under p and U, reverse work under q and U_reverse, binned on
// a shared grid. Bins with fewer than `min_count` samples on either side are
// reported but not tested. Not a construction taken from the literature:
// composed from the J-equation and the per-level Crooks relation.
ClassicalCrooksReport classical_crooks(const ClassicalCrooksSetup& setup, std::uint64_t n,
                                       std::uint64_t seed, int bins = 40,
                                       std::uint64_t min_count = 50);

// Harmonic sudden quench setup (both maps identity).
ClassicalCrooksSetup harmonic_quench_setup(double beta, double omega0, double omega1);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

// Pearson test of forward quench work samples against the closed form,
// equal-probability bins.
ChiSquareResult harmonic_quench_chi_square(const std::vector<double>& work, double beta,
                                           double omega0, double omega1, int bins = 40);

}  // namespace seqmeas
