#include "seqmeas/linalg.hpp"

#include <cmath>

#include "seqmeas/errors.hpp"

namespace seqmeas {

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double max_abs(const RMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermiticity_defect(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("hermiticity_defect: matrix is not square");
  return max_abs(CMatrix(a - a.adjoint()));
}

double unitarity_defect(const CMatrix& u) {
  if (u.rows() != u.cols()) throw ShapeError("unitarity_defect: matrix is not square");
  return max_abs(CMatrix(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())));
}

double hermitian_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix lift_to_slot(const CMatrix& op, const std::vector<int>& dims, std::size_t slot) {
  if (slot >= dims.size()) throw ShapeError("lift_to_slot: slot out of range");
  if (op.rows() != dims[slot] || op.cols() != dims[slot]) {
    throw ShapeError("lift_to_slot: operator dimension does not match its slot");
  }
  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    out = kron(out, k == slot ? op : CMatrix::Identity(dims[k], dims[k]));
  }
  return out;
}

CMatrix unitary_exp(const CMatrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CMatrix& v = es.eigenvectors();
  CVector phases(v.cols());
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    phases(k) = std::polar(1.0, -es.eigenvalues()(k) * tau);
  }
  return v * phases.asDiagonal() * v.adjoint();
}

double von_neumann_entropy(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lam = es.eigenvalues()(k);
    if (lam > 0.0) s -= lam * std::log(lam);
  }
  return s;
}

}  // namespace seqmeas
