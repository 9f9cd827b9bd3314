#pragma once

// Crooks-type reciprocity between a model and its reciprocal model, level by
// level in the random variable Y(i, j) = d(i) q(j) / (D(j) p(i)).

#include <string>
#include <vector>

#include "seqmeas/prob_model.hpp"

namespace seqmeas {

inline constexpr double kGroupingTolerance = 1e-9;

struct CrooksLevel {
  double y = 0.0;                // P-weighted mean of Y over the level set
  double prob = 0.0;             // P(Y = y)
  double reciprocal_prob = 0.0;  // P~(Y~ = 1/y)
  double ratio_error = 0.0;      // |P(Y = y) y - P~(Y~ = 1/y)|
  std::size_t n_pairs = 0;
};

struct CrooksReport {
  std::vector<CrooksLevel> levels;  // ascending in y
  double j_sum = 0.0;               // sum_y P(Y = y) y
  double max_ratio_error = 0.0;
  double grouping_tolerance = kGroupingTolerance;
};

// Levels are formed on ln Y: sorted values are merged while they stay within
// `grouping_tol` of the first value of the current level. Pairs with
// P(i, j) = 0 carry no mass in either model and are skipped.
CrooksReport crooks_check(const JointModel& m, const HypotheticalDistribution& q,
                          double grouping_tol = kGroupingTolerance,
                          double ds_tol = kDoublyStochasticTolerance);

struct WorkLevel {
  double w = 0.0;
  double prob = 0.0;             // P(W = w)
  double reciprocal_prob = 0.0;  // P~(W~ = -w)
  double ratio_error = 0.0;      // |P(W = w) exp(-beta (w - dF)) - P~(W~ = -w)|
};

class WorkDistribution {
 public:
  WorkDistribution(std::vector<WorkLevel> levels, double grouping_tolerance,
                   double sum_tolerance = 1e-12);

  // Work form of a Crooks report with Y = exp(-beta (w - delta_f)).
  static WorkDistribution from_crooks(const CrooksReport& report, double beta, double delta_f);

  const std::vector<WorkLevel>& levels() const { return levels_; }
  double grouping_tolerance() const { return grouping_tolerance_; }
  double max_ratio_error() const;
  double mean() const;

 private:
  std::vector<WorkLevel> levels_;
  double grouping_tolerance_;
};

}  // namespace seqmeas
