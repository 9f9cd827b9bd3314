#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "seqmeas/errors.hpp"
#include "seqmeas/io.hpp"
#include "seqmeas/random_models.hpp"

using namespace seqmeas;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("doubles round-trip exactly") {
  auto rng = make_rng(81);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(u(rng) * 300));
    CHECK(std::stod(format_double(x)) == x);
  }
  const std::string tiny = format_double(std::numeric_limits<double>::denorm_min());
  CHECK(std::strtod(tiny.c_str(), nullptr) == std::numeric_limits<double>::denorm_min());
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("matrices round-trip through JSON") {
  auto rng = make_rng(82);
  const CMatrix a = random_hermitian(rng, 4);
  const CMatrix b = matrix_from_json(json::parse(matrix_to_json(a).dump()));
  CHECK(max_abs(CMatrix(a - b)) == 0.0);

  const json real = {{"re", {{1.0, 2.0}, {2.0, 3.0}}}};
  const CMatrix r = matrix_from_json(real);
  CHECK(r(0, 1) == cplx(2.0, 0.0));
  CHECK_THROWS_AS(matrix_from_json(json{{"re", {{1.0, 2.0}}}}), ShapeError);
  CHECK_THROWS_AS(matrix_from_json(json{{"dim", 3}, {"re", {{1.0}}}}), ShapeError);
  CHECK_THROWS_AS(matrix_from_json(json{{"im", {{1.0}}}}), ValidationError);
  CHECK_THROWS_AS(matrix_to_json(CMatrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("joint models round-trip through JSON") {
  RMatrix t(2, 3);
  t << 0.1, 0.2, 0.05, 0.3, 0.15, 0.2;
  const JointModel m(t, {1, 2}, {1, 1, 1}, {"a", "b"}, {"x", "y", "z"});
  const json j = joint_model_to_json(m);
  CHECK(j.contains("p_table"));
  const JointModel back = joint_model_from_json(json::parse(j.dump()));
  CHECK(back.table() == m.table());
  CHECK(back.d() == m.d());
  CHECK(back.D() == m.D());
  CHECK(back.labels_j() == m.labels_j());
  CHECK(back.mode() == Normalization::exact);

  json bad = j;
  bad["mode"] = "approximate";
  CHECK_THROWS_AS(joint_model_from_json(bad), ValidationError);
  bad = j;
  bad["p_table"][1] = {0.3, 0.15};
  CHECK_THROWS_AS(joint_model_from_json(bad), ShapeError);
  bad = j;
  bad["p_table"][0][0] = 0.2;
  CHECK_THROWS(joint_model_from_json(bad));
  // Defaults when only the table is given.
  const JointModel s = joint_model_from_json(json{{"p_table", {{0.5, 0.0}, {0.0, 0.5}}}});
  CHECK(s.d() == std::vector<int>{1, 1});
}

TEST_CASE("CSV headers") {
  std::ostringstream os;
  write_work_csv(os, WorkDistribution({{-1.0, 0.25, 0.1, 0.0}, {1.0, 0.75, 0.9, 0.0}}, 1e-9));
  CHECK(first_line(os.str()) == "w,prob,reciprocal_prob,ratio_error");
  const std::string work = os.str();
  CHECK(std::count(work.begin(), work.end(), '\n') == 3);

  std::ostringstream fig;
  write_entropy_curve_csv(fig, {EntropyCurveRow{}});
  CHECK(first_line(fig.str()) == "t,S_p,S_phat,mass_deficit_p,mass_deficit_phat,N_x,N_p");

  CMatrix h = CMatrix::Zero(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(2, 2) = 2.0;
  std::ostringstream fam;
  write_family_csv(fam, joint_diagonalize({HermitianOperator(h)}));
  const std::string s = fam.str();
  CHECK(first_line(s) == "index,E_1,d");
  CHECK(s.find(",2\n") != std::string::npos);
}

TEST_CASE("config hash is stable and key-order independent") {
  const json a = json::parse(R"({"beta": 1.0, "family": "canonical", "n": 3})");
  const json b = json::parse(R"({"n": 3, "family": "canonical", "beta": 1.0})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(json::parse(R"({"beta": 2.0, "family": "canonical", "n": 3})")));
  // Reference values of 64-bit FNV-1a.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
