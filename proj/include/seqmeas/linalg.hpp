#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace seqmeas {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Entrywise max-norm.
double max_abs(const CMatrix& a);
double max_abs(const RMatrix& a);

double hermiticity_defect(const CMatrix& a);
double unitarity_defect(const CMatrix& u);

// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
double hermitian_norm(const CMatrix& a);

CMatrix commutator(const CMatrix& a, const CMatrix& b);

// Kronecker product a (x) b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Lifts a subsystem operator into the tensor product of `dims` at `slot`.
CMatrix lift_to_slot(const CMatrix& op, const std::vector<int>& dims, std::size_t slot);

// exp(-i * h * tau) for Hermitian h, via eigendecomposition.
CMatrix unitary_exp(const CMatrix& h, double tau);

// -Tr(rho log rho) from the eigenvalues of a Hermitian rho, with 0 log 0 = 0.
double von_neumann_entropy(const CMatrix& rho);

}  // namespace seqmeas
