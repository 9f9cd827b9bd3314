#include "seqmeas/crooks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {
namespace {

struct PairTerm {
  double log_y;
  double forward;   // P(i, j)
  double backward;  // P~(j, i)
};

}  // namespace

CrooksReport crooks_check(const JointModel& m, const HypotheticalDistribution& q,
                          double grouping_tol, double ds_tol) {
  if (!(grouping_tol >= 0.0)) throw ValidationError("grouping tolerance must be non-negative");
  const JointModel rec = reciprocal_model(m, q, ds_tol);
  const auto p = marginals(m).p;

  std::vector<PairTerm> terms;
  for (std::size_t i = 0; i < m.n_first(); ++i) {
    for (std::size_t j = 0; j < m.n_second(); ++j) {
      if (m(i, j) <= 0.0) continue;
      const double y = m.d()[i] * q[j] / (m.D()[j] * p[i]);
      terms.push_back({std::log(y), m(i, j), rec(j, i)});
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](const PairTerm& a, const PairTerm& b) { return a.log_y < b.log_y; });

  CrooksReport out;
  out.grouping_tolerance = grouping_tol;
  std::size_t k = 0;
  while (k < terms.size()) {
    const double anchor = terms[k].log_y;
    CrooksLevel level;
    double fy = 0.0;
    for (; k < terms.size() && terms[k].log_y - anchor <= grouping_tol; ++k) {
      const double y = std::exp(terms[k].log_y);
      level.prob += terms[k].forward;
      level.reciprocal_prob += terms[k].backward;
      fy += terms[k].forward * y;
      ++level.n_pairs;
    }
    level.y = fy / level.prob;
    level.ratio_error = std::abs(fy - level.reciprocal_prob);
    out.j_sum += fy;
    out.max_ratio_error = std::max(out.max_ratio_error, level.ratio_error);
    out.levels.push_back(level);
  }
  return out;
}

WorkDistribution::WorkDistribution(std::vector<WorkLevel> levels, double grouping_tolerance,
                                   double sum_tolerance)
    : levels_(std::move(levels)), grouping_tolerance_(grouping_tolerance) {
  std::sort(levels_.begin(), levels_.end(),
            [](const WorkLevel& a, const WorkLevel& b) { return a.w < b.w; });
  double total = 0.0;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    if (!(levels_[k].prob >= 0.0)) {
      std::ostringstream msg;
      msg << "work level " << k << " has probability " << levels_[k].prob;
      throw ValidationError(msg.str());
    }
    total += levels_[k].prob;
    if (k > 0 && levels_[k].w - levels_[k - 1].w <= grouping_tolerance_) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "work levels " << levels_[k - 1].w << " and " << levels_[k].w
          << " are not separated by the grouping tolerance";
      throw ValidationError(msg.str());
    }
  }
  if (std::abs(total - 1.0) > sum_tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "work distribution sums to " << total;
    throw ValidationError(msg.str());
  }
}

WorkDistribution WorkDistribution::from_crooks(const CrooksReport& report, double beta,
                                               double delta_f) {
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  std::vector<WorkLevel> levels;
  levels.reserve(report.levels.size());
  for (const auto& lv : report.levels) {
    WorkLevel w;
    w.w = delta_f - std::log(lv.y) / beta;
    w.prob = lv.prob;
    w.reciprocal_prob = lv.reciprocal_prob;
    w.ratio_error = std::abs(lv.prob * std::exp(-beta * (w.w - delta_f)) - lv.reciprocal_prob);
    levels.push_back(w);
  }
  // Level separation in w is the ln y separation scaled by 1/beta.
  return WorkDistribution(std::move(levels), report.grouping_tolerance / beta, 1e-10);
}

double WorkDistribution::max_ratio_error() const {
  double e = 0.0;
  for (const auto& lv : levels_) e = std::max(e, lv.ratio_error);
  return e;
}

double WorkDistribution::mean() const {
  double s = 0.0;
  for (const auto& lv : levels_) s += lv.prob * lv.w;
  return s;
}

}  // namespace seqmeas
