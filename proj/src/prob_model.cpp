#include "seqmeas/prob_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {
namespace {

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(std::to_string(k));
  return out;
}

void check_cell_sizes(const std::vector<int>& cells, std::size_t n, const char* name) {
  if (cells.size() != n) {
    std::ostringstream msg;
    msg << "cell sizes " << name << " have length " << cells.size() << ", expected " << n;
    throw ShapeError(msg.str());
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (cells[k] < 1) {
      std::ostringstream msg;
      msg << "cell size " << name << "(" << k << ") = " << cells[k] << " must be >= 1";
      throw ValidationError(msg.str());
    }
  }
}

std::vector<double> row_sums(const RMatrix& t) {
  std::vector<double> out(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index i = 0; i < t.rows(); ++i) out[static_cast<std::size_t>(i)] = t.row(i).sum();
  return out;
}

void require_positive_first_marginal(const JointModel& m, const std::vector<double>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= std::numeric_limits<double>::min())) {
      std::ostringstream msg;
      msg << "first marginal p(" << m.labels_i()[i] << ") = " << p[i]
          << " is zero; prune zero-marginal outcomes first";
      throw PreconditionError(msg.str());
    }
  }
}

}  // namespace

JointModel::JointModel(RMatrix table, std::vector<int> d, std::vector<int> D,
                       std::vector<std::string> labels_i, std::vector<std::string> labels_j,
                       Normalization mode, double sum_tolerance)
    : table_(std::move(table)),
      d_(std::move(d)),
      D_(std::move(D)),
      labels_i_(std::move(labels_i)),
      labels_j_(std::move(labels_j)),
      mode_(mode) {
  const auto ni = static_cast<std::size_t>(table_.rows());
  const auto nj = static_cast<std::size_t>(table_.cols());
  if (ni == 0 || nj == 0) throw ShapeError("joint table must be non-empty");
  check_cell_sizes(d_, ni, "d");
  check_cell_sizes(D_, nj, "D");
  if (labels_i_.empty()) labels_i_ = default_labels(ni);
  if (labels_j_.empty()) labels_j_ = default_labels(nj);
  if (labels_i_.size() != ni || labels_j_.size() != nj) {
    throw ShapeError("label count does not match table shape");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < table_.rows(); ++i) {
    for (Eigen::Index j = 0; j < table_.cols(); ++j) {
      const double v = table_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "p_table(" << i << "," << j << ") = " << v << " is not a non-negative number";
        throw ValidationError(msg.str());
      }
      total += v;
    }
  }
  mass_deficit_ = 1.0 - total;
  if (mode_ == Normalization::exact) {
    if (std::abs(mass_deficit_) > sum_tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "p_table sums to " << total << ", expected 1 within " << sum_tolerance;
      throw ValidationError(msg.str());
    }
  } else if (mass_deficit_ < -sum_tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "truncated p_table sums to " << total << " > 1";
    throw ValidationError(msg.str());
  }
}

JointModel JointModel::simple(RMatrix table, Normalization mode) {
  std::vector<int> d(static_cast<std::size_t>(table.rows()), 1);
  std::vector<int> D(static_cast<std::size_t>(table.cols()), 1);
  return JointModel(std::move(table), std::move(d), std::move(D), {}, {}, mode);
}

ConditionalMatrix::ConditionalMatrix(RMatrix pi, double row_tolerance) : pi_(std::move(pi)) {
  for (Eigen::Index i = 0; i < pi_.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < pi_.cols(); ++j) {
      const double v = pi_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "pi(" << j << "|" << i << ") = " << v << " is not a non-negative number";
        throw ValidationError(msg.str());
      }
      s += v;
    }
    if (std::abs(s - 1.0) > row_tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " of the conditional sums to " << s;
      throw ValidationError(msg.str());
    }
  }
}

HypotheticalDistribution::HypotheticalDistribution(std::vector<double> q, double sum_tolerance)
    : q_(std::move(q)) {
  double s = 0.0;
  for (std::size_t j = 0; j < q_.size(); ++j) {
    if (!std::isfinite(q_[j]) || q_[j] < 0.0) {
      std::ostringstream msg;
      msg << "q(" << j << ") = " << q_[j] << " is not a non-negative number";
      throw ValidationError(msg.str());
    }
    s += q_[j];
  }
  if (std::abs(s - 1.0) > sum_tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "hypothetical distribution sums to " << s;
    throw ValidationError(msg.str());
  }
}

Marginals marginals(const JointModel& m) {
  Marginals out;
  out.p = row_sums(m.table());
  out.p_hat.assign(m.n_second(), 0.0);
  for (Eigen::Index j = 0; j < m.table().cols(); ++j) {
    out.p_hat[static_cast<std::size_t>(j)] = m.table().col(j).sum();
  }
  return out;
}

PruneResult prune_zero_marginals(const JointModel& m, double threshold) {
  const auto p = row_sums(m.table());
  std::vector<Eigen::Index> keep;
  std::vector<std::string> pruned;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < threshold) {
      pruned.push_back(m.labels_i()[i]);
    } else {
      keep.push_back(static_cast<Eigen::Index>(i));
    }
  }
  if (keep.empty()) throw PreconditionError("every first outcome has zero probability");
  RMatrix t(static_cast<Eigen::Index>(keep.size()), m.table().cols());
  std::vector<int> d;
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    t.row(static_cast<Eigen::Index>(r)) = m.table().row(keep[r]);
    d.push_back(m.d()[static_cast<std::size_t>(keep[r])]);
    labels.push_back(m.labels_i()[static_cast<std::size_t>(keep[r])]);
  }
  // Removed rows carry at most threshold mass each.
  const double tol = kSumTolerance + threshold * static_cast<double>(pruned.size());
  return {JointModel(std::move(t), std::move(d), m.D(), std::move(labels), m.labels_j(), m.mode(),
                     tol),
          std::move(pruned)};
}

ConditionalMatrix conditional(const JointModel& m) {
  const auto p = row_sums(m.table());
  require_positive_first_marginal(m, p);
  RMatrix pi = m.table();
  for (Eigen::Index i = 0; i < pi.rows(); ++i) pi.row(i) /= p[static_cast<std::size_t>(i)];
  return ConditionalMatrix(std::move(pi));
}

JointModel joint_from_conditional(const ConditionalMatrix& pi, std::span<const double> p,
                                  std::vector<int> d, std::vector<int> D, double sum_tolerance) {
  if (p.size() != pi.n_first()) throw ShapeError("joint_from_conditional: p length mismatch");
  RMatrix t = pi.matrix();
  for (Eigen::Index i = 0; i < t.rows(); ++i) t.row(i) *= p[static_cast<std::size_t>(i)];
  return JointModel(std::move(t), std::move(d), std::move(D), {}, {}, Normalization::exact,
                    sum_tolerance);
}

DoublyStochasticCheck is_modified_doubly_stochastic(const ConditionalMatrix& pi,
                                                    std::span<const int> d,
                                                    std::span<const int> D, double tol) {
  if (d.size() != pi.n_first() || D.size() != pi.n_second()) {
    throw ShapeError("is_modified_doubly_stochastic: cell sizes do not match the conditional");
  }
  DoublyStochasticCheck out;
  const RMatrix& m = pi.matrix();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) s += m(i, j) * d[static_cast<std::size_t>(i)];
    const double dev = std::abs(s - D[static_cast<std::size_t>(j)]);
    if (dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_column = static_cast<std::size_t>(j);
    }
  }
  out.ok = out.max_deviation <= tol;
  return out;
}

double j_equation_lhs(const JointModel& m, const HypotheticalDistribution& q) {
  if (q.size() != m.n_second()) throw ShapeError("j_equation_lhs: q length mismatch");
  const auto p = row_sums(m.table());
  require_positive_first_marginal(m, p);
  double s = 0.0;
  for (std::size_t i = 0; i < m.n_first(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.n_second(); ++j) row += m(i, j) * q[j] / m.D()[j];
    s += row * m.d()[i] / p[i];
  }
  return s;
}

double shannon_entropy(std::span<const double> p, std::span<const int> d, Normalization mode) {
  if (!d.empty() && d.size() != p.size()) throw ShapeError("shannon_entropy: d length mismatch");
  double total = 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double v = p[k];
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream msg;
      msg << "probability " << k << " = " << v << " is negative";
      throw ValidationError(msg.str());
    }
    total += v;
    if (v > 0.0) {
      const double cell = d.empty() ? 1.0 : static_cast<double>(d[k]);
      s -= v * std::log(v / cell);
    }
  }
  const bool bad = mode == Normalization::exact ? std::abs(total - 1.0) > kSumTolerance
                                                : total > 1.0 + kSumTolerance;
  if (bad) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total;
    throw ValidationError(msg.str());
  }
  return s;
}

double entropy_gap(const JointModel& m, double ds_tol) {
  const auto pi = conditional(m);
  const auto check = is_modified_doubly_stochastic(pi, m.d(), m.D(), ds_tol);
  if (!check.ok) {
    std::ostringstream msg;
    msg << "conditional is not modified doubly stochastic (deviation " << check.max_deviation
        << " in column " << check.worst_column << "); the entropy inequality does not apply";
    throw PreconditionError(msg.str());
  }
  const auto mg = marginals(m);
  return shannon_entropy(mg.p_hat, m.D(), m.mode()) - shannon_entropy(mg.p, m.d(), m.mode());
}

bool is_permutation_type(const ConditionalMatrix& pi, double tol) {
  if (pi.n_first() != pi.n_second()) {
    throw ShapeError("is_permutation_type: only defined for square conditionals");
  }
  const RMatrix& m = pi.matrix();
  std::vector<int> col_ones(pi.n_second(), 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    int row_ones = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (std::abs(v - 1.0) <= tol) {
        ++row_ones;
        ++col_ones[static_cast<std::size_t>(j)];
      } else if (std::abs(v) > tol) {
        return false;
      }
    }
    if (row_ones != 1) return false;
  }
  for (int c : col_ones) {
    if (c != 1) return false;
  }
  return true;
}

JointModel reciprocal_model(const JointModel& m, const HypotheticalDistribution& q,
                            double ds_tol) {
  if (q.size() != m.n_second()) throw ShapeError("reciprocal_model: q length mismatch");
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (!(q[j] > 0.0)) {
      std::ostringstream msg;
      msg << "reciprocal model needs q(" << m.labels_j()[j] << ") > 0";
      throw PreconditionError(msg.str());
    }
  }
  const auto pi = conditional(m);
  const auto check = is_modified_doubly_stochastic(pi, m.d(), m.D(), ds_tol);
  if (!check.ok) {
    std::ostringstream msg;
    msg << "reciprocal model needs a modified doubly stochastic conditional (deviation "
        << check.max_deviation << ")";
    throw PreconditionError(msg.str());
  }
  RMatrix t(static_cast<Eigen::Index>(m.n_second()), static_cast<Eigen::Index>(m.n_first()));
  for (std::size_t j = 0; j < m.n_second(); ++j) {
    for (std::size_t i = 0; i < m.n_first(); ++i) {
      t(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          pi(j, i) * m.d()[i] * q[j] / m.D()[j];
    }
  }
  // Total mass is sum_j q(j) (1 + O(ds_tol / D(j))).
  return JointModel(std::move(t), m.D(), m.d(), m.labels_j(), m.labels_i(), Normalization::exact,
                    kSumTolerance + ds_tol);
}

UniformityReport uniformity_check(const JointModel& m, double tol) {
  if (m.n_first() != m.n_second()) {
    throw PreconditionError("uniformity_check: outcome sets must have equal size");
  }
  for (std::size_t k = 0; k < m.n_first(); ++k) {
    if (m.d()[k] != 1 || m.D()[k] != 1) {
      throw PreconditionError("uniformity_check: requires d = D = 1");
    }
  }
  for (std::size_t i = 0; i < m.n_first(); ++i) {
    for (std::size_t j = 0; j < m.n_second(); ++j) {
      if (!(m(i, j) > 0.0)) {
        std::ostringstream msg;
        msg << "uniformity_check: P(" << i << "," << j << ") = 0; all entries must be positive";
        throw PreconditionError(msg.str());
      }
    }
  }
  const std::size_t n = m.n_first();
  const auto mg = marginals(m);
  UniformityReport out;
  // Forward pi(j|i) = P/p: column sums. Backward pi_hat(i|j) = P/p_hat: sums over j.
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += m(i, j) / mg.p[i];
    out.forward_deviation = std::max(out.forward_deviation, std::abs(s - 1.0));
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m(i, j) / mg.p_hat[j];
    out.backward_deviation = std::max(out.backward_deviation, std::abs(s - 1.0));
  }
  out.forward_doubly_stochastic = out.forward_deviation <= tol;
  out.backward_doubly_stochastic = out.backward_deviation <= tol;
  const double u = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.marginal_deviation = std::max(
        {out.marginal_deviation, std::abs(mg.p[k] - u), std::abs(mg.p_hat[k] - u)});
  }
  out.uniform = out.marginal_deviation <= tol;
  if (!out.forward_doubly_stochastic && !out.backward_doubly_stochastic) {
    out.failed_hypothesis = "neither pi nor pi_hat is doubly stochastic";
  } else if (!out.forward_doubly_stochastic) {
    out.failed_hypothesis = "pi is not doubly stochastic";
  } else if (!out.backward_doubly_stochastic) {
    out.failed_hypothesis = "pi_hat is not doubly stochastic";
  }
  return out;
}

JointModel collapse_cells(const JointModel& fine, std::span<const int> cell_of_i,
                          std::span<const int> cell_of_j, double tol) {
  if (cell_of_i.size() != fine.n_first() || cell_of_j.size() != fine.n_second()) {
    throw ShapeError("collapse_cells: cell maps do not match the table");
  }
  for (std::size_t k = 0; k < fine.n_first(); ++k) {
    if (fine.d()[k] != 1) throw PreconditionError("collapse_cells: fine model must be simple");
  }
  for (std::size_t k = 0; k < fine.n_second(); ++k) {
    if (fine.D()[k] != 1) throw PreconditionError("collapse_cells: fine model must be simple");
  }
  auto count_cells = [](std::span<const int> cells) {
    int n = 0;
    for (int c : cells) {
      if (c < 0) throw ValidationError("collapse_cells: negative cell index");
      n = std::max(n, c + 1);
    }
    std::vector<int> sizes(static_cast<std::size_t>(n), 0);
    for (int c : cells) ++sizes[static_cast<std::size_t>(c)];
    for (int s : sizes) {
      if (s == 0) throw ValidationError("collapse_cells: empty cell");
    }
    return sizes;
  };
  const auto d = count_cells(cell_of_i);
  const auto D = count_cells(cell_of_j);
  RMatrix coarse = RMatrix::Constant(static_cast<Eigen::Index>(d.size()),
                                     static_cast<Eigen::Index>(D.size()), -1.0);
  for (std::size_t i = 0; i < fine.n_first(); ++i) {
    for (std::size_t j = 0; j < fine.n_second(); ++j) {
      const auto ci = static_cast<Eigen::Index>(cell_of_i[i]);
      const auto cj = static_cast<Eigen::Index>(cell_of_j[j]);
      const double v = fine(i, j);
      if (coarse(ci, cj) < 0.0) {
        coarse(ci, cj) = v;
      } else if (std::abs(coarse(ci, cj) - v) > tol) {
        std::ostringstream msg;
        msg << "collapse_cells: probability is not constant on cell (" << ci << "," << cj << ")";
        throw PreconditionError(msg.str());
      }
    }
  }
  for (Eigen::Index a = 0; a < coarse.rows(); ++a) {
    for (Eigen::Index b = 0; b < coarse.cols(); ++b) {
      coarse(a, b) *= d[static_cast<std::size_t>(a)] * D[static_cast<std::size_t>(b)];
    }
  }
  return JointModel(std::move(coarse), d, D, {}, {}, fine.mode(), kSumTolerance);
}

}  // namespace seqmeas
