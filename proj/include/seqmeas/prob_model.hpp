#pragma once

// Statistical model of two sequential measurements: a joint outcome table
// P(i, j) with first/second cell sizes d(i), D(j), its marginals and
// conditionals, the J-equation, modified Shannon entropies and the
// reciprocal (backward) model.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "seqmeas/linalg.hpp"

namespace seqmeas {

// Default tolerances shared by the probabilistic checks.
inline constexpr double kSumTolerance = 1e-12;
inline constexpr double kDoublyStochasticTolerance = 1e-10;
inline constexpr double kPruneThreshold = 1e-14;

// `truncated` tables come from finite windows of countably infinite outcome
// sets: they may carry less than unit mass, and the missing mass is recorded.
enum class Normalization { exact, truncated };

class JointModel {
 public:
  JointModel(RMatrix table, std::vector<int> d, std::vector<int> D,
             std::vector<std::string> labels_i = {}, std::vector<std::string> labels_j = {},
             Normalization mode = Normalization::exact, double sum_tolerance = kSumTolerance);

  // d = D = 1 everywhere.
  static JointModel simple(RMatrix table, Normalization mode = Normalization::exact);

  const RMatrix& table() const { return table_; }
  double operator()(std::size_t i, std::size_t j) const {
    return table_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  std::size_t n_first() const { return static_cast<std::size_t>(table_.rows()); }
  std::size_t n_second() const { return static_cast<std::size_t>(table_.cols()); }
  const std::vector<int>& d() const { return d_; }
  const std::vector<int>& D() const { return D_; }
  const std::vector<std::string>& labels_i() const { return labels_i_; }
  const std::vector<std::string>& labels_j() const { return labels_j_; }
  Normalization mode() const { return mode_; }
  // 1 - total mass; zero (up to rounding) for exact tables.
  double mass_deficit() const { return mass_deficit_; }

 private:
  RMatrix table_;
  std::vector<int> d_;
  std::vector<int> D_;
  std::vector<std::string> labels_i_;
  std::vector<std::string> labels_j_;
  Normalization mode_;
  double mass_deficit_ = 0.0;
};

// pi(j|i), rows indexed by the first outcome.
class ConditionalMatrix {
 public:
  explicit ConditionalMatrix(RMatrix pi, double row_tolerance = kSumTolerance);

  const RMatrix& matrix() const { return pi_; }
  double operator()(std::size_t j, std::size_t i) const {
    return pi_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  std::size_t n_first() const { return static_cast<std::size_t>(pi_.rows()); }
  std::size_t n_second() const { return static_cast<std::size_t>(pi_.cols()); }

 private:
  RMatrix pi_;
};

class HypotheticalDistribution {
 public:
  explicit HypotheticalDistribution(std::vector<double> q, double sum_tolerance = kSumTolerance);

  const std::vector<double>& values() const { return q_; }
  double operator[](std::size_t j) const { return q_[j]; }
  std::size_t size() const { return q_.size(); }

 private:
  std::vector<double> q_;
};

struct Marginals {
  std::vector<double> p;
  std::vector<double> p_hat;
};

Marginals marginals(const JointModel& m);

struct PruneResult {
  JointModel model;
  std::vector<std::string> pruned_labels;
};

// Drops first outcomes whose marginal is below `threshold`. The caller is
// expected to report `pruned_labels`. Rows with tiny but representable p(i)
// still carry O(1) weight in the J-equation through pi(j|i) d(i), so models
// built from exact conditionals are not pruned automatically.
PruneResult prune_zero_marginals(const JointModel& m, double threshold = kPruneThreshold);

// Throws PreconditionError naming the first outcome whose p(i) is zero or
// subnormal.
ConditionalMatrix conditional(const JointModel& m);

// P(i, j) = pi(j|i) p(i).
JointModel joint_from_conditional(const ConditionalMatrix& pi, std::span<const double> p,
                                  std::vector<int> d, std::vector<int> D,
                                  double sum_tolerance = kSumTolerance);

struct DoublyStochasticCheck {
  bool ok = false;
  double max_deviation = 0.0;
  std::size_t worst_column = 0;
};

// max_j |sum_i pi(j|i) d(i) - D(j)| <= tol.
DoublyStochasticCheck is_modified_doubly_stochastic(const ConditionalMatrix& pi,
                                                    std::span<const int> d,
                                                    std::span<const int> D,
                                                    double tol = kDoublyStochasticTolerance);

// < d(i) q(j) / (D(j) p(i)) > under P.
double j_equation_lhs(const JointModel& m, const HypotheticalDistribution& q);

// -sum p ln(p/d), 0 ln 0 = 0. Empty `d` means d = 1.
double shannon_entropy(std::span<const double> p, std::span<const int> d = {},
                       Normalization mode = Normalization::exact);

inline double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

// S'(p_hat) - S'(p); refuses models whose conditional is not modified doubly
// stochastic within `ds_tol`.
double entropy_gap(const JointModel& m, double ds_tol = kDoublyStochasticTolerance);

// Square matrices only: every entry within tol of 0 or 1, one 1 per row and column.
bool is_permutation_type(const ConditionalMatrix& pi, double tol = 1e-9);

// P~(j, i) = pi(j|i) d(i) q(j) / D(j), with the roles of d and D exchanged.
JointModel reciprocal_model(const JointModel& m, const HypotheticalDistribution& q,
                            double ds_tol = kDoublyStochasticTolerance);

struct UniformityReport {
  bool forward_doubly_stochastic = false;
  bool backward_doubly_stochastic = false;
  bool uniform = false;
  double forward_deviation = 0.0;
  double backward_deviation = 0.0;
  double marginal_deviation = 0.0;  // max |p - 1/n|, |p_hat - 1/n|
  std::string failed_hypothesis;    // empty when both hypotheses hold
  bool holds() const { return failed_hypothesis.empty() && uniform; }
};

// Symmetric situation: square, strictly positive, d = D = 1; when both
// conditionals are doubly stochastic the marginals must be uniform.
UniformityReport uniformity_check(const JointModel& m, double tol = kDoublyStochasticTolerance);

// Collapses a fine simple model whose probability is constant on cells into
// the modified model P'(i', j') = d(i') D(j') P(i, j).
JointModel collapse_cells(const JointModel& fine, std::span<const int> cell_of_i,
                          std::span<const int> cell_of_j, double tol = 1e-12);

}  // namespace seqmeas
