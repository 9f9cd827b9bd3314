#include "seqmeas/fock.hpp"

#include <bit>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {

Eigen::Index fock_dim(int modes) {
  if (modes < 1 || modes > kMaxModes) {
    std::ostringstream msg;
    msg << "number of modes " << modes << " outside [1, " << kMaxModes << "]";
    throw ValidationError(msg.str());
  }
  return Eigen::Index{1} << modes;
}

CMatrix annihilation(int modes, int a) {
  const Eigen::Index n = fock_dim(modes);
  if (a < 0 || a >= modes) throw ValidationError("annihilation: mode index out of range");
  const unsigned bit = 1u << a;
  const unsigned below = bit - 1u;
  CMatrix c = CMatrix::Zero(n, n);
  for (unsigned k = 0; k < static_cast<unsigned>(n); ++k) {
    if (k & bit) {
      const double sign = (std::popcount(k & below) % 2) ? -1.0 : 1.0;
      c(static_cast<Eigen::Index>(k & ~bit), static_cast<Eigen::Index>(k)) = sign;
    }
  }
  return c;
}

CMatrix number_operator(int modes) {
  const Eigen::Index n = fock_dim(modes);
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out(k, k) = static_cast<double>(std::popcount(static_cast<unsigned>(k)));
  }
  return out;
}

CMatrix second_quantize(const CMatrix& h) {
  if (h.rows() != h.cols()) throw ShapeError("second_quantize: one-particle matrix not square");
  const int modes = static_cast<int>(h.rows());
  const Eigen::Index n = fock_dim(modes);
  std::vector<CMatrix> c;
  for (int a = 0; a < modes; ++a) c.push_back(annihilation(modes, a));
  CMatrix out = CMatrix::Zero(n, n);
  for (int a = 0; a < modes; ++a) {
    for (int b = 0; b < modes; ++b) {
      if (h(a, b) != cplx(0.0)) out += h(a, b) * (c[a].adjoint() * c[b]);
    }
  }
  return out;
}

}  // namespace seqmeas
