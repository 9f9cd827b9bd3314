#include <algorithm>
#include <vector>

#include "seqmeas/errors.hpp"
#include "seqmeas/wavepacket.hpp"
#include "wavepacket_detail.hpp"

namespace seqmeas {
namespace {

void check_shapes(const RMatrix& p, const ConditionalTables& tables, int n_x, int mu_max) {
  if (p.rows() != 2 * n_x + 1 || p.cols() != 2 * tables.n_p() + 1) {
    throw ShapeError("first distribution does not match the window");
  }
  if (tables.delta_min() > -mu_max - n_x || tables.delta_max() < mu_max + n_x) {
    throw ShapeError("conditional tables do not cover the delta range");
  }
}

}  // namespace

RMatrix second_marginal_reference(const RMatrix& p, const ConditionalTables& tables, int n_x,
                                  int mu_max) {
  check_shapes(p, tables, n_x, mu_max);
  const int n_p = tables.n_p();
  RMatrix out = RMatrix::Zero(2 * n_p + 1, 2 * mu_max + 1);
  for (int mu = -mu_max; mu <= mu_max; ++mu) {
    for (int m = -n_p; m <= n_p; ++m) {
      double acc = 0.0;
      for (int nu = -n_x; nu <= n_x; ++nu) {
        for (int n = -n_p; n <= n_p; ++n) {
          acc += tables.probability(m, n, mu - nu) * p(nu + n_x, n + n_p);
        }
      }
      out(m + n_p, mu + mu_max) = acc;
    }
  }
  return out;
}

RMatrix second_marginal_blocked(const RMatrix& p, const ConditionalTables& tables, int n_x,
                                int mu_max, int chunk) {
  check_shapes(p, tables, n_x, mu_max);
  if (chunk < 1) throw ValidationError("chunk must be >= 1");
  const int n_p = tables.n_p();
  const int nk = 2 * n_p + 1;
  const int n_mu = 2 * mu_max + 1;
  const RMatrix pt = p.transpose();
  RMatrix out = RMatrix::Zero(nk, n_mu);

  // weight[m - n + nk - 1]
  std::vector<double> weight(static_cast<std::size_t>(2 * nk - 1), 0.0);
  for (int d = -(nk - 1); d <= nk - 1; ++d) {
    if (d != 0) weight[static_cast<std::size_t>(d + nk - 1)] = detail::offdiagonal_weight(d);
  }
  const int n_chunks = (n_mu + chunk - 1) / chunk;

#pragma omp parallel
  {
    RMatrix tmat(nk, nk);
    std::vector<double> yr(static_cast<std::size_t>(nk));
    std::vector<double> yi(static_cast<std::size_t>(nk));
#pragma omp for schedule(dynamic, 1)
    for (int c = 0; c < n_chunks; ++c) {
      const int a = -mu_max + c * chunk;
      const int b = std::min(mu_max, a + chunk - 1);
      for (int delta = a - n_x; delta <= b + n_x; ++delta) {
        const int nu0 = std::max(-n_x, a - delta);
        const int nu1 = std::min(n_x, b - delta);
        if (nu0 > nu1) continue;
        const int di = delta - tables.delta_min();
        for (int k = 0; k < nk; ++k) {
          const cplx v = tables.y_table()(k, di);
          yr[static_cast<std::size_t>(k)] = v.real();
          yi[static_cast<std::size_t>(k)] = v.imag();
        }
        for (int n = 0; n < nk; ++n) {
          const double rn = yr[static_cast<std::size_t>(n)];
          const double in = yi[static_cast<std::size_t>(n)];
          const double* w = weight.data() + (nk - 1 - n);
          double* col = tmat.col(n).data();
          for (int m = 0; m < nk; ++m) {
            const double dr = yr[static_cast<std::size_t>(m)] - rn;
            const double dim = yi[static_cast<std::size_t>(m)] - in;
            col[m] = (dr * dr + dim * dim) * w[m];
          }
          col[n] = tables.z_table()(n, di);
        }
        const int width = nu1 - nu0 + 1;
        out.middleCols(nu0 + delta + mu_max, width).noalias() +=
            tmat * pt.middleCols(nu0 + n_x, width);
      }
    }
  }
  return out;
}

}  // namespace seqmeas
