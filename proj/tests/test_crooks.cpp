#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "seqmeas/crooks.hpp"
#include "seqmeas/ensembles.hpp"
#include "seqmeas/errors.hpp"
#include "seqmeas/random_models.hpp"
#include "seqmeas/verify.hpp"

using namespace seqmeas;

namespace {

HermitianOperator real_diag(std::initializer_list<double> v) {
  CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) {
    a(k, k) = x;
    ++k;
  }
  return HermitianOperator(a);
}

}  // namespace

TEST_CASE("identity conditional with q = p has one level at y = 1") {
  RMatrix t = RMatrix::Zero(3, 3);
  t.diagonal() << 0.2, 0.5, 0.3;
  const auto m = JointModel::simple(t);
  const auto r = crooks_check(m, HypotheticalDistribution({0.2, 0.5, 0.3}));
  REQUIRE(r.levels.size() == 1);
  CHECK(r.levels[0].y == doctest::Approx(1.0));
  CHECK(r.levels[0].prob == doctest::Approx(1.0));
  CHECK(r.max_ratio_error < 1e-15);
  CHECK(r.j_sum == doctest::Approx(1.0));
}

TEST_CASE("per-level identity against brute-force enumeration") {
  // Two-level quench, beta = 1, random unitary.
  auto rng = make_rng(21);
  const auto u = UnitaryEvolution(random_unitary(rng, 2));
  const auto m = local_canonical_model({{real_diag({0.0, 1.0})}, {real_diag({0.0, 2.0})}, {1.0}}, u);
  const auto& jm = m.qm.model;
  const auto& q = m.hyp.q;
  const auto r = crooks_check(jm, q);
  CHECK(r.max_ratio_error < 1e-12);

  // Enumerate the four pairs directly: Y(i,j) = q(j)/p(i), P~(j,i) = pi(j|i) q(j).
  const auto mg = marginals(jm);
  std::map<long long, std::pair<double, double>> levels;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double y = q[j] / mg.p[i];
      const auto key = std::llround(std::log(y) * 1e8);
      levels[key].first += jm(i, j);
      levels[key].second += jm(i, j) / mg.p[i] * q[j];
    }
  }
  REQUIRE(levels.size() == r.levels.size());
  std::size_t k = 0;
  for (const auto& [key, pr] : levels) {
    const double y = std::exp(static_cast<double>(key) * 1e-8);
    CHECK(r.levels[k].prob == doctest::Approx(pr.first).epsilon(1e-12));
    CHECK(r.levels[k].reciprocal_prob == doctest::Approx(pr.second).epsilon(1e-12));
    CHECK(std::abs(pr.first * r.levels[k].y - pr.second) < 1e-12);
    CHECK(r.levels[k].y == doctest::Approx(y).epsilon(1e-7));
    ++k;
  }
  double sum = 0.0;
  for (const auto& l : r.levels) sum += l.prob * l.y;
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("work form for the canonical quench") {
  auto rng = make_rng(22);
  const auto u = UnitaryEvolution(random_unitary(rng, 2));
  const auto m = local_canonical_model({{real_diag({0.0, 1.0})}, {real_diag({0.0, 2.0})}, {1.0}}, u);
  const double df = std::log((1.0 + std::exp(-1.0)) / (1.0 + std::exp(-2.0)));
  const auto r = crooks_check(m.qm.model, m.hyp.q);
  const auto wd = WorkDistribution::from_crooks(r, 1.0, df);
  CHECK(wd.max_ratio_error() < 1e-12);
  // Levels E_j(t1) - E_i(t0) are all distinct.
  REQUIRE(wd.levels().size() == 4);
  const double expected[] = {-1.0, 0.0, 1.0, 2.0};
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(wd.levels()[k].w == doctest::Approx(expected[k]).epsilon(1e-9));
    const auto& l = wd.levels()[k];
    CHECK(std::abs(l.prob * std::exp(-(l.w - df)) - l.reciprocal_prob) < 1e-12);
  }
  const auto direct = canonical_work_check(m);
  CHECK(direct.ratio_error < 1e-12);
  CHECK(direct.level_mismatch < 1e-12);
  CHECK(direct.levels == 4);
}

TEST_CASE("enumerated modified models up to 8 x 8") {
  auto rng = make_rng(23);
  double worst = 0.0;
  for (int ni = 1; ni <= 8; ++ni) {
    for (int nj = 1; nj <= 8; ++nj) worst = std::max(worst, enumerated_crooks_error(rng, ni, nj));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("grouping merges levels within the tolerance only") {
  // q = p gives Y = 1 everywhere; a different q splits the columns.
  RMatrix t(2, 2);
  t << 0.25, 0.25, 0.25, 0.25;
  const auto m = JointModel::simple(t);
  auto r = crooks_check(m, HypotheticalDistribution({0.5, 0.5}));
  CHECK(r.levels.size() == 1);
  r = crooks_check(m, HypotheticalDistribution({0.4, 0.6}));
  CHECK(r.levels.size() == 2);
  CHECK(r.max_ratio_error < 1e-15);
}

TEST_CASE("work distribution validation") {
  CHECK_THROWS_AS(WorkDistribution({{0.0, 0.5, 0.5, 0.0}, {1e-12, 0.5, 0.5, 0.0}}, 1e-9),
                  ValidationError);
  CHECK_THROWS_AS(WorkDistribution({{0.0, 0.7, 0.5, 0.0}, {1.0, 0.5, 0.5, 0.0}}, 1e-9),
                  ValidationError);
  const WorkDistribution wd({{-1.0, 0.25, 0.1, 0.0}, {1.0, 0.75, 0.9, 0.0}}, 1e-9);
  CHECK(wd.mean() == doctest::Approx(0.5));
}

TEST_CASE("reciprocal model requires a modified doubly stochastic conditional") {
  RMatrix t(2, 2);
  t << 0.4, 0.0, 0.6, 0.0;
  CHECK_THROWS_AS(crooks_check(JointModel::simple(t), HypotheticalDistribution({0.5, 0.5})),
                  PreconditionError);
}
