#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "seqmeas/ensembles.hpp"
#include "seqmeas/errors.hpp"
#include "seqmeas/fock.hpp"
#include "seqmeas/random_models.hpp"

using namespace seqmeas;

namespace {

CMatrix diag(std::initializer_list<double> v) {
  const auto n = static_cast<Eigen::Index>(v.size());
  CMatrix a = CMatrix::Zero(n, n);
  Eigen::Index k = 0;
  for (double x : v) {
    a(k, k) = x;
    ++k;
  }
  return a;
}

double quantity(const EnsembleModel& m, const std::string& name) {
  for (const auto& [k, v] : m.quantities) {
    if (k == name) return v;
  }
  FAIL("missing quantity " << name);
  return 0.0;
}

// sum_ij P(i, j) f(i, j) straight from the table.
template <typename F>
double pair_sum(const EnsembleModel& m, F f) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.qm.model.n_first(); ++i) {
    for (std::size_t j = 0; j < m.qm.model.n_second(); ++j) s += m.qm.model(i, j) * f(i, j);
  }
  return s;
}

}  // namespace

TEST_CASE("local canonical, no dynamics") {
  const HermitianOperator h(diag({0.0, 0.4, 1.1}));
  const auto m = local_canonical_model({{h}, {h}, {0.7}}, UnitaryEvolution::identity(3));
  CHECK(m.jarzynski_lhs == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(quantity(m, "delta_F_0") == 0.0);
  CHECK(quantity(m, "mean_work_0") == 0.0);
  CHECK(max_abs(RMatrix(m.energy_change.cwiseProduct(m.qm.model.table()))) == 0.0);
}

TEST_CASE("local canonical two-level quench by hand") {
  const auto m = local_canonical_model(
      {{HermitianOperator(diag({0.0, 1.0}))}, {HermitianOperator(diag({0.0, 2.0}))}, {1.0}},
      UnitaryEvolution::identity(2));
  const double df = std::log((1.0 + std::exp(-1.0)) / (1.0 + std::exp(-2.0)));
  CHECK(quantity(m, "delta_F_0") == doctest::Approx(df).epsilon(1e-14));
  const double lhs = pair_sum(m, [&](std::size_t i, std::size_t j) {
    return std::exp(-(m.second.tuple(j)[0] - m.first.tuple(i)[0]));
  });
  // p0 + p1 e^{-1} with p from the canonical state at t0.
  const double p0 = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(lhs == doctest::Approx(p0 + (1.0 - p0) * std::exp(-1.0)).epsilon(1e-14));
  CHECK(lhs == doctest::Approx(std::exp(-df)).epsilon(1e-14));
  CHECK(m.jarzynski_lhs == doctest::Approx(1.0).epsilon(1e-14));

  const auto r = second_law_report(m);
  CHECK(r.jensen_lhs > 0.0);
  CHECK(r.jensen_lhs == doctest::Approx(quantity(m, "mean_work_0") - df).epsilon(1e-12));
  CHECK(r.jensen_ok);
}

TEST_CASE("local canonical with two subsystems") {
  auto rng = make_rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cfg = random_local_canonical(rng, {2, 2});
    const auto m = local_canonical_model(cfg, UnitaryEvolution(random_unitary(rng, 4)));
    CHECK(std::abs(m.jarzynski_lhs - 1.0) < 1e-10);
    CHECK(m.jensen_lhs > -1e-12);
    CHECK(m.route_discrepancy < 1e-9);
    CHECK(check_uniform_blocks(m.state.rho, m.first).ok);
    double sum = 0.0;
    for (int s = 0; s < 2; ++s) {
      const std::string k = std::to_string(s);
      sum += quantity(m, "beta_" + k) * (quantity(m, "mean_work_" + k) - quantity(m, "delta_F_" + k));
    }
    CHECK(sum == doctest::Approx(m.jensen_lhs).epsilon(1e-9));
  }
  CHECK_THROWS_AS(local_canonical_model({{HermitianOperator(diag({0.0}))},
                                         {HermitianOperator(diag({0.0}))},
                                         {-1.0}},
                                        UnitaryEvolution::identity(1)),
                  ValidationError);
}

TEST_CASE("micro-canonical") {
  const HermitianOperator one(diag({0.3}));
  const auto single = microcanonical_model({one, one, 0.3, 1.0}, UnitaryEvolution::identity(1));
  CHECK(single.jarzynski_lhs == 1.0);

  const HermitianOperator h(diag({-1.0, 0.2, 0.5, 2.0}));
  const auto still = microcanonical_model({h, h, 0.1, 0.8}, UnitaryEvolution::identity(4));
  CHECK(quantity(still, "delta_f") == 0.0);
  CHECK(still.jarzynski_lhs == doctest::Approx(1.0).epsilon(1e-15));

  auto rng = make_rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    auto cfg = random_microcanonical(rng, 6);
    const auto m = microcanonical_model(cfg, UnitaryEvolution(random_unitary(rng, 6)));
    // Direct double sum with W(t) from the spectra.
    auto log_w = [&](const HermitianOperator& op) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
      double s = 0.0;
      for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double z = (cfg.energy - es.eigenvalues()(k)) / cfg.width;
        s += std::exp(-z * z);
      }
      return std::log(s);
    };
    const double lw0 = log_w(cfg.h_t0), lw1 = log_w(cfg.h_t1);
    const double lhs = pair_sum(m, [&](std::size_t i, std::size_t j) {
      const double xi = (cfg.energy - m.first.tuple(i)[0]) / cfg.width;
      const double xj = (cfg.energy - m.second.tuple(j)[0]) / cfg.width;
      return std::exp(-xj * xj + xi * xi + lw0 - lw1);
    });
    CHECK(std::abs(lhs - 1.0) < 1e-10);
    CHECK(std::abs(m.jarzynski_lhs - 1.0) < 1e-10);
    CHECK(m.jensen_lhs > -1e-12);
  }

  const HermitianOperator far(diag({0.0, 1.0}));
  CHECK_THROWS_AS(microcanonical_model({far, far, 100.0, 0.5}, UnitaryEvolution::identity(2)),
                  PreconditionError);
  CHECK_THROWS_AS(microcanonical_model({far, far, 0.0, -1.0}, UnitaryEvolution::identity(2)),
                  ValidationError);
}

TEST_CASE("grand canonical") {
  GrandCanonicalConfig single{diag({0.4}), diag({0.4}), 1.2, 0.1};
  const auto m1 = grand_canonical_model(single, UnitaryEvolution::identity(2));
  CHECK(m1.jarzynski_lhs == doctest::Approx(1.0).epsilon(1e-15));

  // Product formula against the trace over the four-dimensional Fock space.
  const double beta = 0.9, mu = 1.4;
  const CMatrix h = diag({1.0, 2.0});
  const double product = -std::log((1.0 + std::exp(beta * (mu - 1.0))) *
                                   (1.0 + std::exp(beta * (mu - 2.0)))) / beta;
  CHECK(free_fermion_grand_potential(h, beta, mu) == doctest::Approx(product).epsilon(1e-14));
  const CMatrix k = beta * (mu * number_operator(2) - second_quantize(h));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
  const double trace = es.eigenvalues().array().exp().sum();
  CHECK(product == doctest::Approx(-std::log(trace) / beta).epsilon(1e-14));

  auto rng = make_rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto cfg = random_grand_canonical(rng, 3);
    const auto m = grand_canonical_model(cfg, UnitaryEvolution(random_number_conserving_unitary(rng, 3)));
    CHECK(std::abs(m.jarzynski_lhs - 1.0) < 1e-10);
    CHECK(m.jensen_lhs > -1e-12);
    CHECK(std::abs(quantity(m, "mean_number_change")) < 1e-11);
    CHECK(quantity(m, "Omega_t0") ==
          doctest::Approx(quantity(m, "Omega_t0_trace")).epsilon(1e-12));
    // Brute-force sum over the eight Fock states.
    const double lhs = pair_sum(m, [&](std::size_t i, std::size_t j) {
      const auto& ti = m.first.tuple(i);
      const auto& tj = m.second.tuple(j);
      return std::exp(-cfg.beta * ((tj[0] - ti[0]) - cfg.mu * (tj[1] - ti[1]) -
                                   (quantity(m, "Omega_t1") - quantity(m, "Omega_t0"))));
    });
    CHECK(std::abs(lhs - 1.0) < 1e-10);
    CHECK(second_law_report(m).jensen_ok);
  }
}

TEST_CASE("periodic thermodynamics") {
  auto rng = make_rng(54);
  const HermitianOperator bath(diag({0.0, 0.5, 0.5}));
  PeriodicThermoConfig cfg{{-0.3, 0.8}, CMatrix(), bath, -0.7, 1.5};
  const auto still = periodic_thermo_model(cfg, UnitaryEvolution::identity(6));
  CHECK(still.jarzynski_lhs == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(max_abs(RMatrix(still.energy_change.cwiseProduct(still.qm.model.table()))) == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    const auto rc = random_periodic_thermo(rng, 2, 3);
    const auto m = periodic_thermo_model(rc, UnitaryEvolution(random_unitary(rng, 6)));
    CHECK(std::abs(m.jarzynski_lhs - 1.0) < 1e-10);
    CHECK(m.jensen_lhs > -1e-12);
  }

  // theta = beta is a local canonical pair with static Hamiltonians.
  const CMatrix u = random_unitary(rng, 6);
  PeriodicThermoConfig same{{-0.3, 0.8}, CMatrix(), bath, 1.5, 1.5};
  const auto pt = periodic_thermo_model(same, UnitaryEvolution(u));
  const HermitianOperator hs(diag({-0.3, 0.8}));
  const auto lc = local_canonical_model({{hs, bath}, {hs, bath}, {1.5, 1.5}}, UnitaryEvolution(u));
  CHECK(max_abs(RMatrix(pt.qm.model.table() - lc.qm.model.table())) < 1e-12);
  CHECK(max_abs(RMatrix(pt.log_y - lc.log_y)) < 1e-12);
  CHECK(std::abs(pt.jensen_lhs - lc.jensen_lhs) < 1e-12);

  PeriodicThermoConfig dup{{0.2, 0.2}, CMatrix(), bath, 1.0, 1.0};
  CHECK_THROWS_AS(periodic_thermo_model(dup, UnitaryEvolution::identity(6)), ValidationError);
}

TEST_CASE("second-law report distinguishes the two statements") {
  const HermitianOperator h(diag({0.0, 1.0}));
  const auto m = local_canonical_model({{h}, {h}, {1.0}}, UnitaryEvolution::identity(2));
  const auto r = second_law_report(m);
  CHECK(r.jensen_lhs == 0.0);
  CHECK(std::abs(r.entropy_gap) < 1e-15);
  CHECK(r.jensen_ok);
  CHECK(r.entropy_gap_ok);
  CHECK_FALSE(r.jensen_label.empty());
}

TEST_CASE("local composition of micro-canonical factors") {
  auto rng = make_rng(55);
  const auto a = random_microcanonical(rng, 2);
  const auto b = random_microcanonical(rng, 3);
  const auto m = local_composition({microcanonical_subsystem(a), microcanonical_subsystem(b)},
                                   UnitaryEvolution(random_unitary(rng, 6)), "local_microcanonical");
  CHECK(std::abs(m.jarzynski_lhs - 1.0) < 1e-10);
  CHECK(m.jensen_lhs > -1e-12);
  CHECK(m.first.dim() == 6);
}

TEST_CASE("Rabi quasi-energies helper") {
  const auto e = rabi_quasi_energies(1.0, 0.8, 0.3);
  REQUIRE(e.size() == 2);
  const double r = std::sqrt(0.2 * 0.2 + 0.3 * 0.3);
  CHECK(e[0] == doctest::Approx(0.4 - r / 2));
  CHECK(e[1] == doctest::Approx(0.4 + r / 2));
}
