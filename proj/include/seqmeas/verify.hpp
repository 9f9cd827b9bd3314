#pragma once

// Seeded verification corpus: random ensemble models of every family and the
// probabilistic property checks, with a report of measured deviations.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqmeas/ensembles.hpp"
#include "seqmeas/random_models.hpp"

namespace seqmeas {

enum class CorpusFamily {
  canonical_1,
  canonical_2,
  microcanonical,
  grand_canonical_1,
  grand_canonical_2,
  grand_canonical_3,
  periodic_thermo,
};

std::vector<CorpusFamily> all_corpus_families();
std::string family_name(CorpusFamily f);

// Model `index` of family `f`; depends only on (seed, f, index).
EnsembleModel corpus_model(CorpusFamily f, std::uint64_t seed, std::uint64_t index);

struct ModelMetrics {
  double jarzynski_deviation = 0.0;   // |jarzynski_lhs - 1|
  double j_equation_deviation = 0.0;  // |j_equation_lhs - 1|
  double ds_deviation = 0.0;          // modified doubly stochastic defect
  double jensen = 0.0;
  double entropy_gap = 0.0;
  double povm_defect = 0.0;
  double route_discrepancy = 0.0;
  double crooks_error = 0.0;
};

ModelMetrics model_metrics(const EnsembleModel& m);

struct FamilyStats {
  CorpusFamily family{};
  int models = 0;
  ModelMetrics worst;  // max of deviations, min of jensen and entropy_gap
  double seconds = 0.0;
};

FamilyStats sweep_family(CorpusFamily f, std::uint64_t seed, int count);

// Adds `size` to pi(col|row), renormalizes the row and returns
// max_j |lhs - 1| of the J-equation with q the indicator of outcome j.
double indicator_detection(const JointModel& m, std::size_t row, std::size_t col, double size);

// indicator_detection at the entry maximizing d(i) (1 - pi(j|i)) / D(j).
double best_indicator_detection(const JointModel& m, double size);

// Expected change of the ensemble-derived J-equation when pi(col|row) is perturbed by
// `size` and the row renormalized.
double perturbation_sensitivity(const EnsembleModel& m, std::size_t row, std::size_t col,
                                double size);

// Entropy-gap probes on simple square models of size n.
double permutation_entropy_gap(Rng& rng, int n);
double positive_ds_entropy_gap(Rng& rng, int n);

// Random modified doubly stochastic model with |I| = ni, |J| = nj (cells of
// one fine doubly stochastic matrix, sparse in about half of the draws) and
// its max per-level Crooks error.
double enumerated_crooks_error(Rng& rng, int ni, int nj);

// Canonical specialization: per-level |P(W = w) exp(-beta (w - dF)) -
// P~(W~ = -w)| from a direct grouping on w, and the largest mismatch with
// the Y-grouped Crooks report converted to work levels.
struct CanonicalWorkCheck {
  double ratio_error = 0.0;
  double level_mismatch = 0.0;
  std::size_t levels = 0;
};
CanonicalWorkCheck canonical_work_check(const EnsembleModel& m);

// Real symmetric Hamiltonians and observables; returns the report with
// both families built from real operators.
TimeReversalReport real_model_pauli(Rng& rng, int dim);

struct BlochGridCheck {
  double max_derivative_rel_error = 0.0;
  double max_distance_error = 0.0;
};
BlochGridCheck bloch_grid_check(int n = 20);

struct CheckResult {
  std::string name;
  std::string relation;  // "<=" or ">="
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  int models_per_family = 200;
  std::optional<double> tolerance;  // replaces every floating-point tolerance
  bool inject_fault = false;
  double fault_size = 1e-3;
  bool include_wavepacket = true;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::vector<FamilyStats> families;
  bool all_passed() const;
};

VerifyReport run_verification(const VerifyOptions& opts);

}  // namespace seqmeas
