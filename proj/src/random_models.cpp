#include "seqmeas/random_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqmeas/errors.hpp"
#include "seqmeas/fock.hpp"

namespace seqmeas {
namespace {

CMatrix ginibre(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = g(rng);
      const double im = g(rng);
      a(i, j) = cplx(re, im);
    }
  }
  return a;
}

RMatrix sinkhorn(RMatrix a) {
  for (int it = 0; it < 10000; ++it) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) /= a.row(i).sum();
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) /= a.col(j).sum();
    double dev = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) dev = std::max(dev, std::abs(a.row(i).sum() - 1.0));
    if (dev < 1e-15) break;
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) /= a.row(i).sum();
  return a;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

CMatrix random_hermitian(Rng& rng, Eigen::Index n, double scale) {
  const CMatrix a = ginibre(rng, n);
  return (0.5 * scale / std::sqrt(static_cast<double>(n))) * (a + a.adjoint());
}

CMatrix random_real_symmetric(Rng& rng, Eigen::Index n, double scale) {
  const CMatrix a = ginibre(rng, n).real().cast<cplx>();
  return (0.5 * scale / std::sqrt(static_cast<double>(n))) * (a + a.transpose());
}

CMatrix random_degenerate_hermitian(Rng& rng, Eigen::Index n, double scale) {
  std::uniform_real_distribution<double> level(-scale, scale);
  const Eigen::Index distinct = std::max<Eigen::Index>(1, (n + 1) / 2);
  std::vector<double> levels;
  for (Eigen::Index k = 0; k < distinct; ++k) levels.push_back(level(rng));
  RVector diag(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    diag(k) = levels[static_cast<std::size_t>(k % distinct)];
  }
  const CMatrix v = random_unitary(rng, n);
  return v * diag.cast<cplx>().asDiagonal() * v.adjoint();
}

CMatrix random_unitary(Rng& rng, Eigen::Index n) {
  const CMatrix a = ginibre(rng, n);
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

CMatrix random_orthogonal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  RMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  Eigen::HouseholderQR<RMatrix> qr(a);
  RMatrix q = qr.householderQ() * RMatrix::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (qr.matrixQR()(k, k) < 0.0) q.col(k) *= -1.0;
  }
  return q.cast<cplx>();
}

CMatrix random_number_conserving_unitary(Rng& rng, int modes) {
  const CMatrix k = random_hermitian(rng, modes, 2.0);
  return unitary_exp(second_quantize(k), 1.0);
}

RMatrix random_doubly_stochastic(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  RMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = u(rng);
  }
  return sinkhorn(std::move(a));
}

RMatrix random_symmetric_doubly_stochastic(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  RMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
  }
  a = sinkhorn(std::move(a));
  return 0.5 * (a + a.transpose());
}

RMatrix random_permutation(Rng& rng, Eigen::Index n) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  RMatrix p = RMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0;
  return p;
}

std::vector<double> random_probability(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (double& x : p) s += (x = u(rng));
  for (double& x : p) x /= s;
  return p;
}

LocalCanonicalConfig random_local_canonical(Rng& rng, const std::vector<int>& dims) {
  std::uniform_real_distribution<double> beta(0.2, 3.0);
  std::bernoulli_distribution degenerate(0.3);
  LocalCanonicalConfig cfg;
  for (int d : dims) {
    auto draw = [&] {
      return degenerate(rng) ? random_degenerate_hermitian(rng, d, 2.0)
                             : random_hermitian(rng, d, 2.0);
    };
    cfg.h_t0.emplace_back(draw());
    cfg.h_t1.emplace_back(draw());
    cfg.betas.push_back(beta(rng));
  }
  return cfg;
}

MicrocanonicalConfig random_microcanonical(Rng& rng, int dim) {
  const HermitianOperator h0(random_hermitian(rng, dim, 2.0));
  const HermitianOperator h1(random_hermitian(rng, dim, 2.0));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h0.matrix(), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const double range = std::max(hi - lo, 1e-3);
  return {h0, h1, lo + frac(rng) * range, range * (0.3 + frac(rng))};
}

GrandCanonicalConfig random_grand_canonical(Rng& rng, int modes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrandCanonicalConfig cfg;
  cfg.h_t0 = random_hermitian(rng, modes, 2.0);
  cfg.h_t1 = random_hermitian(rng, modes, 2.0);
  cfg.beta = 0.2 + 2.8 * u(rng);
  cfg.mu = -1.0 + 2.0 * u(rng);
  return cfg;
}

PeriodicThermoConfig random_periodic_thermo(Rng& rng, int system_dim, int bath_dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> eps;
  for (int k = 0; k < system_dim; ++k) eps.push_back(-1.0 + 2.0 * u(rng));
  std::sort(eps.begin(), eps.end());
  for (std::size_t k = 1; k < eps.size(); ++k) eps[k] = std::max(eps[k], eps[k - 1] + 0.05);
  const CMatrix basis = random_unitary(rng, system_dim);
  const HermitianOperator bath(random_degenerate_hermitian(rng, bath_dim, 2.0));
  return {eps, basis, bath, -2.0 + 4.0 * u(rng), 0.2 + 2.8 * u(rng)};
}

}  // namespace seqmeas
