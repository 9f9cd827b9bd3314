#pragma once

// Finite-dimensional quantum realization of two sequential Lüders
// measurements separated by a unitary evolution.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seqmeas/linalg.hpp"
#include "seqmeas/prob_model.hpp"

namespace seqmeas {

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kProjectionTolerance = 1e-11;
inline constexpr double kUnitaryTolerance = 1e-11;
inline constexpr double kCommutatorTolerance = 1e-10;

class HermitianOperator {
 public:
  // Stores (A + A^dagger)/2 after checking the defect against `tol`.
  explicit HermitianOperator(const CMatrix& a, double tol = kHermitianTolerance);

  const CMatrix& matrix() const { return a_; }
  Eigen::Index dim() const { return a_.rows(); }

 private:
  CMatrix a_;
};

// Joint eigenprojections P_i = V_i V_i^dagger of commuting observables.
class SpectralFamily {
 public:
  // `bases[i]` is a dim x d(i) isometry; `tuples[i]` holds one eigenvalue per
  // operator. Validates completeness, orthogonality and maximality.
  SpectralFamily(std::vector<HermitianOperator> operators, std::vector<CMatrix> bases,
                 std::vector<std::vector<double>> tuples, std::vector<double> group_tolerances,
                 std::vector<double> cluster_spreads = {}, bool refined = false);

  std::size_t size() const { return bases_.size(); }
  Eigen::Index dim() const { return dim_; }
  const std::vector<HermitianOperator>& operators() const { return operators_; }
  const CMatrix& basis(std::size_t i) const { return bases_[i]; }
  CMatrix projection(std::size_t i) const { return bases_[i] * bases_[i].adjoint(); }
  const std::vector<double>& tuple(std::size_t i) const { return tuples_[i]; }
  const std::vector<std::vector<double>>& tuples() const { return tuples_; }
  const std::vector<int>& degeneracies() const { return degeneracies_; }
  // Per-operator absolute tolerance used to decide degeneracies.
  const std::vector<double>& group_tolerances() const { return group_tolerances_; }
  // Largest eigenvalue spread found inside a merged group, per operator.
  const std::vector<double>& cluster_spreads() const { return cluster_spreads_; }
  // True when some group had to be split by per-operator refinement.
  bool refined() const { return refined_; }

 private:
  std::vector<HermitianOperator> operators_;
  std::vector<CMatrix> bases_;
  std::vector<std::vector<double>> tuples_;
  std::vector<int> degeneracies_;
  std::vector<double> group_tolerances_;
  std::vector<double> cluster_spreads_;
  Eigen::Index dim_ = 0;
  bool refined_ = false;
};

class DensityOperator {
 public:
  explicit DensityOperator(const CMatrix& rho, double tol = 1e-12);

  const CMatrix& matrix() const { return rho_; }
  Eigen::Index dim() const { return rho_.rows(); }

 private:
  CMatrix rho_;
};

class UnitaryEvolution {
 public:
  explicit UnitaryEvolution(CMatrix u, double tol = kUnitaryTolerance);
  static UnitaryEvolution identity(Eigen::Index dim);

  const CMatrix& matrix() const { return u_; }
  Eigen::Index dim() const { return u_.rows(); }

 private:
  CMatrix u_;
};

// Group tolerance <= 0 selects the default 1e-9 * ||A|| per operator.
SpectralFamily joint_diagonalize(const std::vector<HermitianOperator>& ops,
                                 double group_tol = -1.0, std::uint64_t seed = 0x5eed5eedULL);

using EnsembleWeight = std::function<double(std::span<const double>)>;

struct EnsembleState {
  DensityOperator rho;
  std::vector<double> weights;     // normalized G(E_i), so p(i) = weights[i] d(i)
  double log_normalization = 0.0;  // ln sum_i G(E_i) d(i) before normalization
};

// rho = sum_i G(E_i) P_i / sum_k G(E_k) d(k).
EnsembleState ensemble_state(const SpectralFamily& fam, const EnsembleWeight& g);
// Same with G given through ln G; avoids underflow of strongly peaked weights.
EnsembleState ensemble_state_log(const SpectralFamily& fam, const EnsembleWeight& log_g);

struct LudersProbabilities {
  std::vector<double> p;
  std::vector<std::size_t> negligible;  // outcomes with p(i) < kPruneThreshold
};

LudersProbabilities luders_probabilities(const DensityOperator& rho, const SpectralFamily& fam);
DensityOperator luders_post_state(const DensityOperator& rho, const SpectralFamily& fam);

struct UniformBlockCheck {
  bool ok = false;
  double worst_deviation = 0.0;
  std::size_t worst_outcome = 0;
};

// max_i || P_i rho P_i - (p(i)/d(i)) P_i ||_max <= tol.
UniformBlockCheck check_uniform_blocks(const DensityOperator& rho, const SpectralFamily& fam,
                                       double tol = 1e-11);

struct Segment {
  HermitianOperator h;
  double duration;
};
using Protocol = std::vector<Segment>;

// U = exp(-i H_K t_K) ... exp(-i H_1 t_1); an empty protocol needs `dim`.
UnitaryEvolution evolve(const Protocol& protocol, Eigen::Index dim = -1);

// Segments in reverse order, each conjugated by Theta (entrywise complex
// conjugation). Then conj(evolve(reversed)) = evolve(original)^dagger.
Protocol reversed_protocol(const Protocol& protocol);

// pi(j|i) = Tr(Q_j U P_i U^dagger) / d(i).
ConditionalMatrix physical_conditional(const UnitaryEvolution& u, const SpectralFamily& first,
                                       const SpectralFamily& second);

// Conditional of the time-reversed experiment, rows indexed by j:
// pi_rev(i|j) = Tr(Theta P_i Theta U_rev Theta Q_j Theta U_rev^dagger) / D(j).
ConditionalMatrix reversed_conditional(const UnitaryEvolution& u_reversed,
                                       const SpectralFamily& first, const SpectralFamily& second);

// F[i][j] = P_i U^dagger Q_j U P_i.
std::vector<std::vector<CMatrix>> povm_elements(const UnitaryEvolution& u,
                                                const SpectralFamily& first,
                                                const SpectralFamily& second);

double povm_completeness_defect(const std::vector<std::vector<CMatrix>>& f);

struct HypotheticalWeights {
  HypotheticalDistribution q;
  double log_normalization = 0.0;  // ln sum_j D(j) G(F_j)
};

// Ensemble-derived q(j) = D(j) G(F_j) / sum_k D(k) G(F_k).
HypotheticalWeights ensemble_hypothetical(const SpectralFamily& second, const EnsembleWeight& g);
HypotheticalWeights ensemble_hypothetical_log(const SpectralFamily& second,
                                              const EnsembleWeight& log_g);

struct QuantumModel {
  JointModel model;
  ConditionalMatrix pi;
  std::vector<double> p;
};

// P(i, j) = pi(j|i) p(i) with d, D from the families. Refuses states that
// are not uniform on the first-family eigenspaces.
QuantumModel build_joint_model(const DensityOperator& rho, const UnitaryEvolution& u,
                               const SpectralFamily& first, const SpectralFamily& second,
                               double uniform_block_tol = 1e-11);

struct QuantumModelS {
  QuantumModel qm;
  HypotheticalWeights hyp;
};

QuantumModelS build_joint_model(const DensityOperator& rho, const UnitaryEvolution& u,
                                const SpectralFamily& first, const SpectralFamily& second,
                                const EnsembleWeight& g, double uniform_block_tol = 1e-11);

struct TimeReversalReport {
  bool applicable = false;          // projections real and U = U^T
  double projection_imaginary = 0.0;
  double unitary_asymmetry = 0.0;   // ||U - U^T||_max
  double pauli_defect = 0.0;        // max |pi(j|i) d(i) - pi'(i|j) D(j)|
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
};

// pi' is the conditional with the roles of the two families exchanged (Q_j
// measured first); for identical families this is the Pauli symmetry
// pi(j|i) d(i) = pi(i|j) d(j). When `conj_basis_check` is false the
// applicability fields are left unset.
TimeReversalReport time_reversal_symmetry_check(const UnitaryEvolution& u,
                                                const SpectralFamily& first,
                                                const SpectralFamily& second,
                                                bool conj_basis_check = true);

}  // namespace seqmeas
