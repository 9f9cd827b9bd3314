#include "seqmeas/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {
namespace {

void require_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension " << a << " does not match " << b;
    throw ShapeError(msg.str());
  }
}

// Sorted-value clustering: a new cluster starts wherever the gap between
// consecutive values exceeds tol.
std::vector<std::vector<Eigen::Index>> cluster_sorted(const RVector& values, double tol) {
  std::vector<std::vector<Eigen::Index>> out;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (k == 0 || values(k) - values(k - 1) > tol) out.emplace_back();
    out.back().push_back(k);
  }
  return out;
}

struct Block {
  CMatrix basis;
  std::vector<double> tuple;
};

CMatrix columns(const CMatrix& v, const std::vector<Eigen::Index>& idx) {
  CMatrix out(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = v.col(idx[c]);
  return out;
}

CMatrix hstack(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

EnsembleState make_ensemble(const SpectralFamily& fam, std::vector<double> w, double log_shift) {
  double total = 0.0;
  for (std::size_t i = 0; i < fam.size(); ++i) total += w[i] * fam.degeneracies()[i];
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ValidationError("ensemble weights have no positive finite total");
  }
  CMatrix rho = CMatrix::Zero(fam.dim(), fam.dim());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    w[i] /= total;
    rho += w[i] * fam.projection(i);
  }
  return {DensityOperator(rho), std::move(w), log_shift + std::log(total)};
}

void check_weight(double g, std::size_t i) {
  if (!(g >= 0.0) || !std::isfinite(g)) {
    std::ostringstream msg;
    msg << "ensemble weight G at outcome " << i << " is " << g << "; weights must be >= 0";
    throw ValidationError(msg.str());
  }
}

HypotheticalWeights make_hypothetical(const SpectralFamily& second, std::vector<double> w,
                                      double log_shift) {
  double total = 0.0;
  for (std::size_t j = 0; j < second.size(); ++j) {
    w[j] *= second.degeneracies()[j];
    total += w[j];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ValidationError("hypothetical weights have no positive finite total");
  }
  for (double& x : w) x /= total;
  return {HypotheticalDistribution(std::move(w), 1e-11), log_shift + std::log(total)};
}

}  // namespace

HermitianOperator::HermitianOperator(const CMatrix& a, double tol) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ShapeError("Hermitian operator must be a non-empty square matrix");
  }
  const double defect = hermiticity_defect(a);
  if (!(defect <= tol)) {
    std::ostringstream msg;
    msg << "operator is not Hermitian: ||A - A^dagger||_max = " << defect;
    throw ValidationError(msg.str());
  }
  a_ = 0.5 * (a + a.adjoint());
}

SpectralFamily::SpectralFamily(std::vector<HermitianOperator> operators, std::vector<CMatrix> bases,
                               std::vector<std::vector<double>> tuples,
                               std::vector<double> group_tolerances,
                               std::vector<double> cluster_spreads, bool refined)
    : operators_(std::move(operators)),
      bases_(std::move(bases)),
      tuples_(std::move(tuples)),
      group_tolerances_(std::move(group_tolerances)),
      cluster_spreads_(std::move(cluster_spreads)),
      refined_(refined) {
  if (bases_.empty()) throw ShapeError("spectral family needs at least one projection");
  if (tuples_.size() != bases_.size()) throw ShapeError("one eigenvalue tuple per projection");
  dim_ = bases_.front().rows();
  const std::size_t L = group_tolerances_.size();
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < bases_.size(); ++i) {
    require_dim(bases_[i].rows(), dim_, "spectral family basis");
    if (bases_[i].cols() < 1) throw ShapeError("empty eigenspace");
    if (tuples_[i].size() != L) throw ShapeError("eigenvalue tuple length mismatch");
    degeneracies_.push_back(static_cast<int>(bases_[i].cols()));
    total += bases_[i].cols();
  }
  if (cluster_spreads_.empty()) cluster_spreads_.assign(L, 0.0);
  for (const auto& op : operators_) require_dim(op.dim(), dim_, "spectral family operator");
  require_dim(total, dim_, "sum of degeneracies");

  CMatrix w(dim_, dim_);
  Eigen::Index c = 0;
  for (const auto& b : bases_) {
    w.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  const double ortho = unitarity_defect(w);
  if (ortho > kProjectionTolerance) {
    std::ostringstream msg;
    msg << "projections are not orthogonal and complete (defect " << ortho << ")";
    throw ValidationError(msg.str());
  }
  for (std::size_t i = 0; i < tuples_.size(); ++i) {
    for (std::size_t k = i + 1; k < tuples_.size(); ++k) {
      bool distinct = L == 0;
      for (std::size_t l = 0; l < L; ++l) {
        if (std::abs(tuples_[i][l] - tuples_[k][l]) > group_tolerances_[l]) distinct = true;
      }
      if (!distinct) {
        std::ostringstream msg;
        msg << "projections " << i << " and " << k << " share an eigenvalue tuple; not maximal";
        throw ValidationError(msg.str());
      }
    }
  }
}

DensityOperator::DensityOperator(const CMatrix& rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw ShapeError("density operator must be a non-empty square matrix");
  }
  const double herm = hermiticity_defect(rho);
  if (!(herm <= tol)) {
    std::ostringstream msg;
    msg << "density operator is not Hermitian (defect " << herm << ")";
    throw ValidationError(msg.str());
  }
  rho_ = 0.5 * (rho + rho.adjoint());
  const double tr = rho_.trace().real();
  if (!(std::abs(tr - 1.0) <= tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "density operator has trace " << tr;
    throw ValidationError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -tol) {
    std::ostringstream msg;
    msg << "density operator has negative eigenvalue " << lo;
    throw ValidationError(msg.str());
  }
}

UnitaryEvolution::UnitaryEvolution(CMatrix u, double tol) : u_(std::move(u)) {
  if (u_.rows() != u_.cols() || u_.rows() == 0) {
    throw ShapeError("unitary must be a non-empty square matrix");
  }
  const double defect = unitarity_defect(u_);
  if (!(defect <= tol)) {
    std::ostringstream msg;
    msg << "matrix is not unitary: ||U^dagger U - 1||_max = " << defect;
    throw ValidationError(msg.str());
  }
}

UnitaryEvolution UnitaryEvolution::identity(Eigen::Index dim) {
  return UnitaryEvolution(CMatrix::Identity(dim, dim));
}

SpectralFamily joint_diagonalize(const std::vector<HermitianOperator>& ops, double group_tol,
                                 std::uint64_t seed) {
  if (ops.empty()) throw ShapeError("joint_diagonalize: no operators");
  const Eigen::Index n = ops.front().dim();
  const std::size_t L = ops.size();
  for (const auto& op : ops) require_dim(op.dim(), n, "joint_diagonalize");

  double worst = 0.0;
  std::size_t wa = 0, wb = 0;
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = a + 1; b < L; ++b) {
      const double c = max_abs(commutator(ops[a].matrix(), ops[b].matrix()));
      if (c > worst) {
        worst = c;
        wa = a;
        wb = b;
      }
    }
  }
  if (worst > kCommutatorTolerance) {
    std::ostringstream msg;
    msg << "operators " << wa << " and " << wb << " do not commute: ||[A,B]||_max = " << worst;
    throw PreconditionError(msg.str());
  }

  std::vector<double> tol(L);
  std::vector<double> scale(L);
  for (std::size_t l = 0; l < L; ++l) {
    const double norm = hermitian_norm(ops[l].matrix());
    scale[l] = norm > 0.0 ? norm : 1.0;
    tol[l] = group_tol > 0.0 ? group_tol : 1e-9 * scale[l];
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(1.0, 2.0);
  CMatrix c = CMatrix::Zero(n, n);
  for (std::size_t l = 0; l < L; ++l) c += (coeff(rng) / scale[l]) * ops[l].matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
  const double c_norm = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);

  std::vector<CMatrix> work;
  for (const auto& idx : cluster_sorted(es.eigenvalues(), 1e-9 * c_norm)) {
    work.push_back(columns(es.eigenvectors(), idx));
  }

  // Each block is checked operator by operator and split whenever a
  // restricted operator is not scalar on it.
  std::vector<Block> blocks;
  std::vector<double> spreads(L, 0.0);
  bool refined = false;
  while (!work.empty()) {
    CMatrix v = std::move(work.back());
    work.pop_back();
    Block blk{v, std::vector<double>(L)};
    bool split = false;
    for (std::size_t l = 0; l < L && !split; ++l) {
      const CMatrix r = v.adjoint() * ops[l].matrix() * v;
      Eigen::SelfAdjointEigenSolver<CMatrix> rs(r);
      const auto groups = cluster_sorted(rs.eigenvalues(), tol[l]);
      if (groups.size() > 1) {
        for (const auto& g : groups) work.push_back(v * columns(rs.eigenvectors(), g));
        split = true;
        refined = true;
      } else {
        const auto& ev = rs.eigenvalues();
        blk.tuple[l] = ev.mean();
        spreads[l] = std::max(spreads[l], ev.maxCoeff() - ev.minCoeff());
      }
    }
    if (!split) blocks.push_back(std::move(blk));
  }

  std::sort(blocks.begin(), blocks.end(),
            [](const Block& a, const Block& b) { return a.tuple < b.tuple; });

  // Two C-clusters with equal tuples belong to one joint eigenspace.
  std::vector<Block> merged;
  for (auto& b : blocks) {
    bool joined = false;
    for (auto& m : merged) {
      bool same = true;
      for (std::size_t l = 0; l < L; ++l) {
        if (std::abs(m.tuple[l] - b.tuple[l]) > tol[l]) same = false;
      }
      if (same) {
        const double wm = static_cast<double>(m.basis.cols());
        const double wb2 = static_cast<double>(b.basis.cols());
        for (std::size_t l = 0; l < L; ++l) {
          spreads[l] = std::max(spreads[l], std::abs(m.tuple[l] - b.tuple[l]));
          m.tuple[l] = (wm * m.tuple[l] + wb2 * b.tuple[l]) / (wm + wb2);
        }
        m.basis = hstack(m.basis, b.basis);
        joined = true;
        break;
      }
    }
    if (!joined) merged.push_back(std::move(b));
  }

  std::vector<CMatrix> bases;
  std::vector<std::vector<double>> tuples;
  for (auto& m : merged) {
    bases.push_back(std::move(m.basis));
    tuples.push_back(std::move(m.tuple));
  }
  return SpectralFamily(ops, std::move(bases), std::move(tuples), std::move(tol),
                        std::move(spreads), refined);
}

EnsembleState ensemble_state(const SpectralFamily& fam, const EnsembleWeight& g) {
  std::vector<double> w(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    w[i] = g(fam.tuple(i));
    check_weight(w[i], i);
  }
  return make_ensemble(fam, std::move(w), 0.0);
}

EnsembleState ensemble_state_log(const SpectralFamily& fam, const EnsembleWeight& log_g) {
  std::vector<double> lg(fam.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fam.size(); ++i) {
    lg[i] = log_g(fam.tuple(i));
    if (std::isnan(lg[i]) || lg[i] == std::numeric_limits<double>::infinity()) {
      std::ostringstream msg;
      msg << "log ensemble weight at outcome " << i << " is " << lg[i];
      throw ValidationError(msg.str());
    }
    top = std::max(top, lg[i]);
  }
  if (!std::isfinite(top)) throw ValidationError("all ensemble weights are zero");
  std::vector<double> w(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) w[i] = std::exp(lg[i] - top);
  return make_ensemble(fam, std::move(w), top);
}

LudersProbabilities luders_probabilities(const DensityOperator& rho, const SpectralFamily& fam) {
  require_dim(rho.dim(), fam.dim(), "luders_probabilities");
  LudersProbabilities out;
  double total = 0.0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const CMatrix& v = fam.basis(i);
    const double pi = (v.adjoint() * rho.matrix() * v).trace().real();
    out.p.push_back(pi);
    total += pi;
    if (pi < kPruneThreshold) out.negligible.push_back(i);
  }
  if (std::abs(total - 1.0) > 1e-11) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Lüders probabilities sum to " << total;
    throw ValidationError(msg.str());
  }
  return out;
}

DensityOperator luders_post_state(const DensityOperator& rho, const SpectralFamily& fam) {
  require_dim(rho.dim(), fam.dim(), "luders_post_state");
  CMatrix out = CMatrix::Zero(rho.dim(), rho.dim());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const CMatrix p = fam.projection(i);
    out += p * rho.matrix() * p;
  }
  return DensityOperator(out, 1e-11);
}

UniformBlockCheck check_uniform_blocks(const DensityOperator& rho, const SpectralFamily& fam,
                                       double tol) {
  require_dim(rho.dim(), fam.dim(), "check_uniform_blocks");
  UniformBlockCheck out;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const CMatrix& v = fam.basis(i);
    CMatrix block = v.adjoint() * rho.matrix() * v;
    const double c = block.trace().real() / static_cast<double>(v.cols());
    block -= c * CMatrix::Identity(v.cols(), v.cols());
    const double dev = max_abs(CMatrix(v * block * v.adjoint()));
    if (dev > out.worst_deviation) {
      out.worst_deviation = dev;
      out.worst_outcome = i;
    }
  }
  out.ok = out.worst_deviation <= tol;
  return out;
}

UnitaryEvolution evolve(const Protocol& protocol, Eigen::Index dim) {
  if (protocol.empty()) {
    if (dim < 1) throw ShapeError("evolve: empty protocol needs an explicit dimension");
    return UnitaryEvolution::identity(dim);
  }
  const Eigen::Index n = protocol.front().h.dim();
  if (dim >= 1) require_dim(n, dim, "evolve");
  CMatrix u = CMatrix::Identity(n, n);
  for (std::size_t k = 0; k < protocol.size(); ++k) {
    const auto& seg = protocol[k];
    require_dim(seg.h.dim(), n, "evolve");
    if (!(seg.duration >= 0.0) || !std::isfinite(seg.duration)) {
      std::ostringstream msg;
      msg << "segment " << k << " has invalid duration " << seg.duration;
      throw ValidationError(msg.str());
    }
    u = unitary_exp(seg.h.matrix(), seg.duration) * u;
  }
  return UnitaryEvolution(std::move(u));
}

Protocol reversed_protocol(const Protocol& protocol) {
  if (protocol.empty()) throw ValidationError("reversed_protocol: protocol is empty");
  Protocol out;
  out.reserve(protocol.size());
  for (auto it = protocol.rbegin(); it != protocol.rend(); ++it) {
    out.push_back({HermitianOperator(it->h.matrix().conjugate()), it->duration});
  }
  return out;
}

ConditionalMatrix physical_conditional(const UnitaryEvolution& u, const SpectralFamily& first,
                                       const SpectralFamily& second) {
  require_dim(u.dim(), first.dim(), "physical_conditional");
  require_dim(u.dim(), second.dim(), "physical_conditional");
  RMatrix pi(static_cast<Eigen::Index>(first.size()), static_cast<Eigen::Index>(second.size()));
  for (std::size_t i = 0; i < first.size(); ++i) {
    const CMatrix uv = u.matrix() * first.basis(i);
    const double d = static_cast<double>(first.degeneracies()[i]);
    for (std::size_t j = 0; j < second.size(); ++j) {
      pi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (second.basis(j).adjoint() * uv).squaredNorm() / d;
    }
  }
  return ConditionalMatrix(std::move(pi), 1e-11);
}

ConditionalMatrix reversed_conditional(const UnitaryEvolution& u_reversed,
                                       const SpectralFamily& first, const SpectralFamily& second) {
  require_dim(u_reversed.dim(), first.dim(), "reversed_conditional");
  require_dim(u_reversed.dim(), second.dim(), "reversed_conditional");
  RMatrix pi(static_cast<Eigen::Index>(second.size()), static_cast<Eigen::Index>(first.size()));
  for (std::size_t j = 0; j < second.size(); ++j) {
    const CMatrix uw = u_reversed.matrix() * second.basis(j).conjugate();
    const double dd = static_cast<double>(second.degeneracies()[j]);
    for (std::size_t i = 0; i < first.size(); ++i) {
      pi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          (first.basis(i).conjugate().adjoint() * uw).squaredNorm() / dd;
    }
  }
  return ConditionalMatrix(std::move(pi), 1e-11);
}

std::vector<std::vector<CMatrix>> povm_elements(const UnitaryEvolution& u,
                                                const SpectralFamily& first,
                                                const SpectralFamily& second) {
  require_dim(u.dim(), first.dim(), "povm_elements");
  require_dim(u.dim(), second.dim(), "povm_elements");
  std::vector<std::vector<CMatrix>> f(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    const CMatrix& v = first.basis(i);
    const CMatrix uv = u.matrix() * v;
    for (std::size_t j = 0; j < second.size(); ++j) {
      const CMatrix a = second.basis(j).adjoint() * uv;
      f[i].push_back(v * (a.adjoint() * a) * v.adjoint());
    }
  }
  return f;
}

double povm_completeness_defect(const std::vector<std::vector<CMatrix>>& f) {
  if (f.empty() || f.front().empty()) throw ShapeError("povm_completeness_defect: empty POVM");
  const Eigen::Index n = f.front().front().rows();
  CMatrix s = CMatrix::Zero(n, n);
  for (const auto& row : f) {
    for (const auto& e : row) s += e;
  }
  return max_abs(CMatrix(s - CMatrix::Identity(n, n)));
}

HypotheticalWeights ensemble_hypothetical(const SpectralFamily& second, const EnsembleWeight& g) {
  std::vector<double> w(second.size());
  for (std::size_t j = 0; j < second.size(); ++j) {
    w[j] = g(second.tuple(j));
    check_weight(w[j], j);
  }
  return make_hypothetical(second, std::move(w), 0.0);
}

HypotheticalWeights ensemble_hypothetical_log(const SpectralFamily& second,
                                              const EnsembleWeight& log_g) {
  std::vector<double> lg(second.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < second.size(); ++j) {
    lg[j] = log_g(second.tuple(j));
    if (std::isnan(lg[j])) throw ValidationError("log hypothetical weight is NaN");
    top = std::max(top, lg[j]);
  }
  if (!std::isfinite(top)) throw ValidationError("all hypothetical weights are zero");
  std::vector<double> w(second.size());
  for (std::size_t j = 0; j < second.size(); ++j) w[j] = std::exp(lg[j] - top);
  return make_hypothetical(second, std::move(w), top);
}

QuantumModel build_joint_model(const DensityOperator& rho, const UnitaryEvolution& u,
                               const SpectralFamily& first, const SpectralFamily& second,
                               double uniform_block_tol) {
  const auto uniform = check_uniform_blocks(rho, first, uniform_block_tol);
  if (!uniform.ok) {
    std::ostringstream msg;
    msg << "state is not uniform on the first-family eigenspaces at outcome "
        << uniform.worst_outcome << " (deviation " << uniform.worst_deviation << ")";
    throw PreconditionError(msg.str());
  }
  auto lp = luders_probabilities(rho, first);
  ConditionalMatrix pi = physical_conditional(u, first, second);
  RMatrix table = pi.matrix();
  for (Eigen::Index i = 0; i < table.rows(); ++i) table.row(i) *= lp.p[static_cast<std::size_t>(i)];
  JointModel model(std::move(table), first.degeneracies(), second.degeneracies(), {}, {},
                   Normalization::exact, 1e-11);
  return {std::move(model), std::move(pi), std::move(lp.p)};
}

QuantumModelS build_joint_model(const DensityOperator& rho, const UnitaryEvolution& u,
                                const SpectralFamily& first, const SpectralFamily& second,
                                const EnsembleWeight& g, double uniform_block_tol) {
  auto qm = build_joint_model(rho, u, first, second, uniform_block_tol);
  return {std::move(qm), ensemble_hypothetical(second, g)};
}

TimeReversalReport time_reversal_symmetry_check(const UnitaryEvolution& u,
                                                const SpectralFamily& first,
                                                const SpectralFamily& second,
                                                bool conj_basis_check) {
  require_dim(u.dim(), first.dim(), "time_reversal_symmetry_check");
  require_dim(u.dim(), second.dim(), "time_reversal_symmetry_check");
  TimeReversalReport out;
  if (conj_basis_check) {
    for (const auto* fam : {&first, &second}) {
      for (std::size_t i = 0; i < fam->size(); ++i) {
        out.projection_imaginary =
            std::max(out.projection_imaginary, fam->projection(i).imag().cwiseAbs().maxCoeff());
      }
    }
    out.unitary_asymmetry = max_abs(CMatrix(u.matrix() - u.matrix().transpose()));
    out.applicable = out.projection_imaginary <= kProjectionTolerance &&
                     out.unitary_asymmetry <= kUnitaryTolerance;
  }
  for (std::size_t i = 0; i < first.size(); ++i) {
    const CMatrix uv = u.matrix() * first.basis(i);
    for (std::size_t j = 0; j < second.size(); ++j) {
      const double forward = (second.basis(j).adjoint() * uv).squaredNorm();
      const double swapped = (first.basis(i).adjoint() * u.matrix() * second.basis(j)).squaredNorm();
      const double dev = std::abs(forward - swapped);
      if (dev > out.pauli_defect) {
        out.pauli_defect = dev;
        out.worst_i = i;
        out.worst_j = j;
      }
    }
  }
  return out;
}

}  // namespace seqmeas
