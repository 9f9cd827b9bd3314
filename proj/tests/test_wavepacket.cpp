#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#ifdef SEQMEAS_HAVE_OPENMP
#include <omp.h>
#endif

#include "seqmeas/errors.hpp"
#include "seqmeas/wavepacket.hpp"

using namespace seqmeas;
using std::numbers::pi;

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;

// Composite 20-point Gauss-Legendre over [a, b] in `panels` pieces.
template <typename F>
auto panel_integral(F f, double a, double b, int panels) {
  decltype(f(a)) s{};
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) s += Gauss::integrate(f, a + k * h, a + (k + 1) * h);
  return s;
}

// Free propagator applied to the cell state by direct quadrature.
cplx propagated(int nu, int n, double t, double x) {
  const cplx pref = 1.0 / std::sqrt(cplx(0.0, 2.0 * pi * t));
  auto f = [&](double y) {
    return std::exp(cplx(0.0, (x - y) * (x - y) / (2.0 * t) + 2.0 * pi * n * y));
  };
  const int panels = 8 + static_cast<int>(std::abs(x - nu) / t + 4.0 * std::abs(n));
  return pref * panel_integral(f, nu, nu + 1.0, panels);
}

// <mu, m| applied to the closed-form evolved cell state by quadrature.
cplx projected(int mu, int m, int nu, int n, double t) {
  auto f = [&](double x) {
    return std::exp(cplx(0.0, -2.0 * pi * m * x)) * evolved_cell_state(nu, n, t, x);
  };
  const int panels = 16 + static_cast<int>(8.0 / t) + 4 * std::abs(m);
  return panel_integral(f, mu, mu + 1.0, panels);
}

double gaussian(double x, double sigma) {
  return std::exp(-x * x / (2 * sigma * sigma)) / std::sqrt(std::sqrt(pi) * sigma);
}

}  // namespace

TEST_CASE("first amplitudes: reflection symmetry and cell mass") {
  for (int nu : {-3, -1, 0, 2}) {
    for (int n : {-5, 0, 1, 7}) {
      const cplx a = first_amplitude(nu, n, 1.0);
      const cplx b = first_amplitude(-1 - nu, -n, 1.0);
      CHECK(std::abs(a - b) < 1e-14);
    }
  }
  // Cell mass by quadrature of |psi|^2.
  for (double sigma : {0.5, 1.0, 2.3}) {
    for (int nu : {-2, 0, 1}) {
      const double q =
          panel_integral([&](double x) { return std::pow(gaussian(x, sigma), 2); }, nu, nu + 1.0, 4);
      CHECK(std::abs(cell_mass(nu, sigma) - q) < 1e-14);
    }
  }
}

TEST_CASE("first amplitude is the Fourier coefficient on the cell") {
  for (int nu : {-1, 0, 3}) {
    for (int n : {0, 2, -9}) {
      const cplx q = panel_integral(
          [&](double x) { return std::exp(cplx(0.0, -2 * pi * n * x)) * gaussian(x, 1.3); }, nu,
          nu + 1.0, 16);
      CHECK(std::abs(first_amplitude(nu, n, 1.3) - q) < 1e-14);
    }
  }
}

TEST_CASE("Parseval on a cell with the 1/n^2 tail added back") {
  // |<nu, n|psi>|^2 ~ (psi(nu+1) - psi(nu))^2 / (4 pi^2 n^2); the next
  // order leaves an O(N^-3) remainder.
  const double sigma = 1.0;
  const int big_n = 4096;
  for (int nu : {-2, -1, 0, 3}) {
    double s = 0.0;
    for (int n = -big_n; n <= big_n; ++n) s += std::norm(first_amplitude(nu, n, sigma));
    const double jump = gaussian(nu + 1.0, sigma) - gaussian(nu, sigma);
    const double tail =
        2.0 * jump * jump / (4 * pi * pi) * boost::math::trigamma(static_cast<double>(big_n + 1));
    CHECK(std::abs(s + tail - cell_mass(nu, sigma)) < 1e-8);
  }
}

TEST_CASE("first distribution window and momentum tail") {
  const auto small = first_distribution(1.0, {6, 40});
  // The 1/n^2 momentum tail leaves a visible deficit in this window.
  CHECK(small.deficit == doctest::Approx(5.5e-4).epsilon(0.05));
  const auto f = first_distribution(1.0, {8, 512});
  CHECK(f.deficit > 0.0);
  CHECK(f.deficit == doctest::Approx(4.377e-5).epsilon(1e-3));
  CHECK(std::abs(f.entropy - 1.38516198) < 1e-8);
  // Deficit shrinks like 1/N_p.
  const auto g = first_distribution(1.0, {8, 1024});
  CHECK(f.deficit / g.deficit == doctest::Approx(2.0).epsilon(0.01));
  CHECK(f.at(0, 0) == doctest::Approx(std::norm(first_amplitude(0, 0, 1.0))));
}

TEST_CASE("evolved cell state against direct propagator quadrature") {
  double worst = 0.0;
  for (int n : {0, 2}) {
    for (int k = -20; k <= 20; ++k) {
      const double x = 0.25 * k + 0.013;
      worst = std::max(worst, std::abs(evolved_cell_state(0, n, 1.0, x) - propagated(0, n, 1.0, x)));
    }
  }
  CHECK(worst < 1e-8);
  for (double x : {-0.7, 0.2, 0.5, 1.4}) {
    CHECK(std::abs(evolved_cell_state(-1, 1, 0.05, x) - propagated(-1, 1, 0.05, x)) < 1e-8);
  }
}

TEST_CASE("evolved cell state: boost structure and short times") {
  // Momentum 2 pi n shifts the packet by 2 pi n t and adds the phase.
  const double t = 0.3;
  for (int n : {-2, 1, 3}) {
    for (double x : {-1.1, 0.4, 2.7}) {
      const cplx boosted = std::exp(cplx(0.0, -2 * pi * n * (pi * n * t - x))) *
                           evolved_cell_state(0, 0, t, x - 2 * pi * n * t);
      CHECK(std::abs(evolved_cell_state(0, n, t, x) - boosted) < 1e-12);
    }
  }
  CHECK(evolved_cell_state(0, 2, 0.0, 0.3) == std::exp(cplx(0.0, 2 * pi * 2 * 0.3)));
  CHECK(evolved_cell_state(0, 2, 0.0, 1.3) == cplx(0.0));
  CHECK(std::abs(evolved_cell_state(0, 1, 1e-7, 0.5) - std::exp(cplx(0.0, pi))) < 1e-3);
  CHECK(std::abs(evolved_cell_state(0, 1, 1e-7, 1.5)) < 1e-3);
  CHECK_THROWS(evolved_cell_state(0, 0, -1.0, 0.0));
}

TEST_CASE("evolved cell state keeps unit norm") {
  // Quadrature on [-L, L] plus the smooth part of the far tail,
  // |psi|^2 ~ t / (2 pi (x - y - 2 pi n t)^2) from each cell edge y.
  const double t = 0.05, L = 400.0;
  for (int n : {0, 1}) {
    const double inner = panel_integral(
        [&](double x) { return std::norm(evolved_cell_state(0, n, t, x)); }, -L, L, 8000);
    double tail = 0.0;
    for (double y : {0.0, 1.0}) {
      tail += t / (2 * pi * (L - y - 2 * pi * n * t));
      tail += t / (2 * pi * (L + y + 2 * pi * n * t));
    }
    CHECK(std::abs(inner + tail - 1.0) < 1e-8);
  }
}

TEST_CASE("conditional amplitudes against quadrature of the evolved state") {
  struct Case {
    int mu, m, nu, n;
    double t;
  };
  for (const Case& c : {Case{1, 1, 0, 0, 1.0}, Case{0, 0, 1, 1, 1.0}, Case{0, 0, 0, 0, 1.0},
                        Case{2, -1, 0, 3, 1.0}, Case{-1, 2, 0, 2, 0.1}, Case{0, 5, 0, 5, 0.01},
                        Case{1, 4, 0, 4, 0.01}, Case{0, 3, 0, -2, 0.01}}) {
    const cplx closed = conditional_amplitude(c.mu, c.m, c.nu, c.n, c.t);
    const cplx quad = projected(c.mu, c.m, c.nu, c.n, c.t);
    CHECK(std::abs(closed - quad) < 1e-10);
    CHECK(conditional_probability(c.mu, c.m, c.nu, c.n, c.t) == doctest::Approx(std::norm(closed)));
  }
}

TEST_CASE("asymmetry pair") {
  const auto a = asymmetry_pair(1.0);
  CHECK(std::abs(a.forward - 0.00483946) < 1e-8);
  CHECK(std::abs(a.backward - 0.00258997) < 1e-8);
  // Frozen from the quadrature oracle above at higher precision.
  CHECK(std::abs(a.forward - 0.004839463217) < 1e-11);
  CHECK(std::abs(a.backward - 0.002589969499) < 1e-11);
  CHECK(a.forward - a.backward > 2e-3);
}

TEST_CASE("tables reproduce the direct conditional") {
  const ConditionalTables tab(0.02, 12, -3, 3);
  double worst = 0.0;
  for (int delta = -3; delta <= 3; ++delta) {
    for (int m = -12; m <= 12; ++m) {
      for (int n = -12; n <= 12; ++n) {
        const double direct = conditional_probability(delta, m, 0, n, 0.02);
        worst = std::max(worst, std::abs(tab.probability(m, n, delta) - direct));
        // Shift invariance in position.
        CHECK(std::abs(conditional_probability(delta + 5, m, 5, n, 0.02) - direct) < 1e-15);
      }
    }
  }
  CHECK(worst < 1e-15);
}

TEST_CASE("row sums approach one up to the position tail") {
  // sum over (mu, m) of p(mu, m | 0, 0) at t = 0.01. The sharp cell edges
  // spread a t / (2 pi x^2) tail past |mu| <= D; the momentum window is
  // large enough that its own tail is below 1e-6.
  const double t = 0.01;
  const int k = 1 << 17, d = 3;
  const ConditionalTables tab(t, k, -d, d);
  double s = 0.0;
  for (int delta = -d; delta <= d; ++delta) {
    for (int m = -k; m <= k; ++m) s += tab.probability(m, 0, delta);
  }
  const double position_tail = t / (2 * pi) * (2.0 / d + 2.0 / (d + 1));
  CHECK(s <= 1.0 + 1e-12);
  CHECK(std::abs(1.0 - s - position_tail) < 1e-5);
}

TEST_CASE("second marginal kernels agree") {
  WavepacketConfig cfg;
  cfg.t = 0.01;
  cfg.window = {3, 16};
  cfg.mass_tolerance = 1.0;
  const auto first = first_distribution(cfg.sigma, cfg.window);
  const auto ref = second_marginal(cfg, first, MarginalKernel::reference);
  const auto blk = second_marginal(cfg, first, MarginalKernel::blocked);
  REQUIRE(ref.phat.rows() == blk.phat.rows());
  CHECK(max_abs(RMatrix(ref.phat - blk.phat)) < 1e-15);
  CHECK(ref.mu_max == mu_window(cfg));

  // Leakage is exactly the row-sum bookkeeping over the same windows.
  const int mu_max = ref.mu_max;
  const ConditionalTables tab(cfg.t, 16, -mu_max - 3, mu_max + 3);
  double kept = 0.0;
  for (int nu = -3; nu <= 3; ++nu) {
    for (int n = -16; n <= 16; ++n) {
      double row = 0.0;
      for (int mu = -mu_max; mu <= mu_max; ++mu) {
        for (int m = -16; m <= 16; ++m) row += tab.probability(m, n, mu - nu);
      }
      kept += first.at(nu, n) * row;
    }
  }
  CHECK(std::abs(ref.mass - kept) < 1e-13);
  CHECK(std::abs(ref.leakage - (first.mass - kept)) < 1e-13);
  CHECK(std::abs(blk.mass - ref.mass) < 1e-14);
}

TEST_CASE("blocked kernel is bitwise reproducible across thread counts") {
  WavepacketConfig cfg;
  cfg.t = 0.03;
  cfg.window = {4, 24};
  cfg.mass_tolerance = 1.0;
  cfg.chunk = 3;
  const auto first = first_distribution(cfg.sigma, cfg.window);
  const auto a = second_marginal(cfg, first, MarginalKernel::blocked);
#ifdef SEQMEAS_HAVE_OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
#endif
  const auto b = second_marginal(cfg, first, MarginalKernel::blocked);
#ifdef SEQMEAS_HAVE_OPENMP
  omp_set_num_threads(saved);
#endif
  CHECK(a.phat == b.phat);
  CHECK(a.entropy == b.entropy);
}

TEST_CASE("short times leave the distribution unchanged") {
  WavepacketConfig cfg;
  cfg.t = 1e-9;
  cfg.window = {3, 16};
  cfg.mass_tolerance = 1.0;
  const auto first = first_distribution(cfg.sigma, cfg.window);
  const auto sm = second_marginal(cfg, first);
  double worst = 0.0;
  for (int mu = -3; mu <= 3; ++mu) {
    for (int m = -16; m <= 16; ++m) worst = std::max(worst, std::abs(sm.at(mu, m) - first.at(mu, m)));
  }
  CHECK(worst < 1e-4);
  CHECK(std::abs(sm.entropy - first.entropy) < 1e-3);
}

TEST_CASE("entropy grows with t on a coarse window") {
  WavepacketConfig cfg;
  cfg.window = {8, 64};
  cfg.mass_tolerance = 1e-2;
  const auto rows = entropy_curve(cfg, {1e-4, 1e-3, 1e-2, 1e-1});
  REQUIRE(rows.size() == 4);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].s_phat > rows[k].s_p);
    if (k > 0) CHECK(rows[k].s_phat > rows[k - 1].s_phat);
  }
  // Frozen values for this window.
  CHECK(rows[0].s_phat == doctest::Approx(1.465189).epsilon(1e-6));
  CHECK(rows[3].s_phat == doctest::Approx(2.375890).epsilon(1e-6));
}

TEST_CASE("config validation and mass flag") {
  WavepacketConfig cfg;
  cfg.sigma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.t = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.window = {2, 8};
  cfg.t = 0.01;
  cfg.mass_tolerance = 1e-6;
  const auto sm = second_marginal(cfg);
  CHECK(sm.flagged);
  CHECK(sm.deficit > 1e-6);
  const auto grid = default_t_grid(10);
  REQUIRE(grid.size() == 10);
  CHECK(grid.front() == doctest::Approx(1e-4));
  CHECK(grid.back() == doctest::Approx(1e-1));
}
