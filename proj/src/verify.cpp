#include "seqmeas/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "seqmeas/bloch.hpp"
#include "seqmeas/classical.hpp"
#include "seqmeas/crooks.hpp"
#include "seqmeas/errors.hpp"
#include "seqmeas/wavepacket.hpp"

namespace seqmeas {
namespace {

std::uint64_t stream_of(CorpusFamily f, std::uint64_t index) {
  return (static_cast<std::uint64_t>(f) + 1) << 40 | index;
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double quantity(const EnsembleModel& m, const std::string& key) {
  for (const auto& [k, v] : m.quantities) {
    if (k == key) return v;
  }
  throw PreconditionError("model has no quantity " + key);
}

// Random composition of n into k positive parts.
std::vector<int> random_composition(Rng& rng, int n, int k) {
  std::vector<int> cuts(static_cast<std::size_t>(n - 1));
  std::iota(cuts.begin(), cuts.end(), 1);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(static_cast<std::size_t>(k - 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> parts;
  int prev = 0;
  for (int c : cuts) {
    parts.push_back(c - prev);
    prev = c;
  }
  parts.push_back(n - prev);
  return parts;
}

ModelMetrics worse(const ModelMetrics& a, const ModelMetrics& b) {
  ModelMetrics w;
  w.jarzynski_deviation = std::max(a.jarzynski_deviation, b.jarzynski_deviation);
  w.j_equation_deviation = std::max(a.j_equation_deviation, b.j_equation_deviation);
  w.ds_deviation = std::max(a.ds_deviation, b.ds_deviation);
  w.jensen = std::min(a.jensen, b.jensen);
  w.entropy_gap = std::min(a.entropy_gap, b.entropy_gap);
  w.povm_defect = std::max(a.povm_defect, b.povm_defect);
  w.route_discrepancy = std::max(a.route_discrepancy, b.route_discrepancy);
  w.crooks_error = std::max(a.crooks_error, b.crooks_error);
  return w;
}

struct CorpusModel {
  EnsembleModel model;
  UnitaryEvolution u;
};

CorpusModel make_corpus_model(CorpusFamily f, std::uint64_t seed, std::uint64_t index) {
  Rng rng = make_rng(seed, stream_of(f, index));
  switch (f) {
    case CorpusFamily::canonical_1: {
      const int d = uniform_int(rng, 1, 4);
      auto cfg = random_local_canonical(rng, {d});
      UnitaryEvolution u(random_unitary(rng, d));
      return {local_canonical_model(cfg, u), u};
    }
    case CorpusFamily::canonical_2: {
      const int d1 = uniform_int(rng, 1, 3);
      const int d2 = uniform_int(rng, 1, 3);
      auto cfg = random_local_canonical(rng, {d1, d2});
      UnitaryEvolution u(random_unitary(rng, d1 * d2));
      return {local_canonical_model(cfg, u), u};
    }
    case CorpusFamily::microcanonical: {
      const int d = uniform_int(rng, 2, 5);
      auto cfg = random_microcanonical(rng, d);
      UnitaryEvolution u(random_unitary(rng, d));
      return {microcanonical_model(cfg, u), u};
    }
    case CorpusFamily::grand_canonical_1:
    case CorpusFamily::grand_canonical_2:
    case CorpusFamily::grand_canonical_3: {
      const int modes = f == CorpusFamily::grand_canonical_1   ? 1
                        : f == CorpusFamily::grand_canonical_2 ? 2
                                                               : 3;
      auto cfg = random_grand_canonical(rng, modes);
      UnitaryEvolution u(random_number_conserving_unitary(rng, modes));
      return {grand_canonical_model(cfg, u), u};
    }
    case CorpusFamily::periodic_thermo: {
      const int ds = uniform_int(rng, 2, 3);
      const int db = uniform_int(rng, 2, 3);
      auto cfg = random_periodic_thermo(rng, ds, db);
      UnitaryEvolution u(random_unitary(rng, ds * db));
      return {periodic_thermo_model(cfg, u), u};
    }
  }
  throw ValidationError("unknown corpus family");
}

ModelMetrics metrics_with_u(const EnsembleModel& m, const UnitaryEvolution& u) {
  ModelMetrics out = model_metrics(m);
  out.povm_defect = povm_completeness_defect(povm_elements(u, m.first, m.second));
  return out;
}

}  // namespace

std::vector<CorpusFamily> all_corpus_families() {
  return {CorpusFamily::canonical_1,       CorpusFamily::canonical_2,
          CorpusFamily::microcanonical,    CorpusFamily::grand_canonical_1,
          CorpusFamily::grand_canonical_2, CorpusFamily::grand_canonical_3,
          CorpusFamily::periodic_thermo};
}

std::string family_name(CorpusFamily f) {
  switch (f) {
    case CorpusFamily::canonical_1: return "canonical_N1";
    case CorpusFamily::canonical_2: return "canonical_N2";
    case CorpusFamily::microcanonical: return "microcanonical";
    case CorpusFamily::grand_canonical_1: return "grand_canonical_M1";
    case CorpusFamily::grand_canonical_2: return "grand_canonical_M2";
    case CorpusFamily::grand_canonical_3: return "grand_canonical_M3";
    case CorpusFamily::periodic_thermo: return "periodic_thermo";
  }
  return "unknown";
}

EnsembleModel corpus_model(CorpusFamily f, std::uint64_t seed, std::uint64_t index) {
  return make_corpus_model(f, seed, index).model;
}

ModelMetrics model_metrics(const EnsembleModel& m) {
  ModelMetrics out;
  const JointModel& jm = m.qm.model;
  out.jarzynski_deviation = std::abs(m.jarzynski_lhs - 1.0);
  out.j_equation_deviation = std::abs(m.j_equation_lhs - 1.0);
  out.ds_deviation = is_modified_doubly_stochastic(m.qm.pi, jm.d(), jm.D(), 1.0).max_deviation;
  out.jensen = m.jensen_lhs;
  out.entropy_gap = entropy_gap(jm);
  out.route_discrepancy = m.route_discrepancy;
  out.crooks_error = crooks_check(jm, m.hyp.q).max_ratio_error;
  return out;
}

FamilyStats sweep_family(CorpusFamily f, std::uint64_t seed, int count) {
  if (count < 1) throw ValidationError("sweep needs at least one model");
  const auto start = std::chrono::steady_clock::now();
  std::vector<ModelMetrics> all(static_cast<std::size_t>(count));
  std::vector<std::string> errors(all.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (int k = 0; k < count; ++k) {
    try {
      const auto cm = make_corpus_model(f, seed, static_cast<std::uint64_t>(k));
      all[static_cast<std::size_t>(k)] = metrics_with_u(cm.model, cm.u);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(k)] = e.what();
    }
  }
  for (int k = 0; k < count; ++k) {
    if (!errors[static_cast<std::size_t>(k)].empty()) {
      std::ostringstream msg;
      msg << family_name(f) << " model " << k << ": " << errors[static_cast<std::size_t>(k)];
      throw PreconditionError(msg.str());
    }
  }
  FamilyStats st;
  st.family = f;
  st.models = count;
  st.worst = all.front();
  for (const auto& m : all) st.worst = worse(st.worst, m);
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return st;
}

double indicator_detection(const JointModel& m, std::size_t row, std::size_t col, double size) {
  RMatrix pi = conditional(m).matrix();
  const auto r = static_cast<Eigen::Index>(row);
  pi(r, static_cast<Eigen::Index>(col)) += size;
  pi.row(r) /= pi.row(r).sum();
  const auto p = marginals(m).p;
  const JointModel perturbed = joint_from_conditional(ConditionalMatrix(pi), p, m.d(), m.D());
  double worst = 0.0;
  for (std::size_t j = 0; j < m.n_second(); ++j) {
    std::vector<double> e(m.n_second(), 0.0);
    e[j] = 1.0;
    worst = std::max(worst, std::abs(j_equation_lhs(perturbed, HypotheticalDistribution(e)) - 1.0));
  }
  return worst;
}

double best_indicator_detection(const JointModel& m, double size) {
  const RMatrix pi = conditional(m).matrix();
  std::size_t row = 0, col = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < m.n_first(); ++i) {
    for (std::size_t j = 0; j < m.n_second(); ++j) {
      const double s = m.d()[i] * (1.0 - pi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) /
                       m.D()[j];
      if (s > best) {
        best = s;
        row = i;
        col = j;
      }
    }
  }
  return indicator_detection(m, row, col, size);
}

double perturbation_sensitivity(const EnsembleModel& m, std::size_t row, std::size_t col,
                                double size) {
  const JointModel& jm = m.qm.model;
  const RMatrix& pi = m.qm.pi.matrix();
  const auto r = static_cast<Eigen::Index>(row);
  double change = 0.0;
  for (std::size_t j = 0; j < jm.n_second(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    const double after = (pi(r, c) + (j == col ? size : 0.0)) / (1.0 + size);
    change += (after - pi(r, c)) * m.hyp.q[j] / jm.D()[j];
  }
  return std::abs(change * jm.d()[row]);
}

double permutation_entropy_gap(Rng& rng, int n) {
  const RMatrix pi = random_permutation(rng, n);
  const auto p = random_probability(rng, static_cast<std::size_t>(n));
  const std::vector<int> ones(static_cast<std::size_t>(n), 1);
  return entropy_gap(joint_from_conditional(ConditionalMatrix(pi), p, ones, ones));
}

double positive_ds_entropy_gap(Rng& rng, int n) {
  const RMatrix pi = random_doubly_stochastic(rng, n);
  const auto p = random_probability(rng, static_cast<std::size_t>(n));
  const std::vector<int> ones(static_cast<std::size_t>(n), 1);
  return entropy_gap(joint_from_conditional(ConditionalMatrix(pi), p, ones, ones));
}

double enumerated_crooks_error(Rng& rng, int ni, int nj) {
  const int n = std::max(ni, nj) + uniform_int(rng, 0, 2);
  const auto d = random_composition(rng, n, ni);
  const auto dd = random_composition(rng, n, nj);
  RMatrix fine;
  if (std::bernoulli_distribution(0.5)(rng)) {
    fine = RMatrix::Zero(n, n);
    const int perms = uniform_int(rng, 1, 3);
    double total = 0.0;
    std::uniform_real_distribution<double> w(0.1, 1.0);
    std::vector<double> ws;
    for (int k = 0; k < perms; ++k) total += ws.emplace_back(w(rng));
    for (int k = 0; k < perms; ++k) fine += ws[static_cast<std::size_t>(k)] / total * random_permutation(rng, n);
  } else {
    fine = random_doubly_stochastic(rng, n);
  }
  RMatrix pi = RMatrix::Zero(ni, nj);
  int a0 = 0;
  for (int i = 0; i < ni; ++i) {
    int b0 = 0;
    for (int j = 0; j < nj; ++j) {
      pi(i, j) = fine.block(a0, b0, d[static_cast<std::size_t>(i)], dd[static_cast<std::size_t>(j)]).sum() /
                 d[static_cast<std::size_t>(i)];
      b0 += dd[static_cast<std::size_t>(j)];
    }
    a0 += d[static_cast<std::size_t>(i)];
  }
  const auto p = random_probability(rng, static_cast<std::size_t>(ni));
  const auto q = random_probability(rng, static_cast<std::size_t>(nj));
  const JointModel m = joint_from_conditional(ConditionalMatrix(pi), p, d, dd);
  return crooks_check(m, HypotheticalDistribution(q)).max_ratio_error;
}

CanonicalWorkCheck canonical_work_check(const EnsembleModel& m) {
  if (m.kind != "local_canonical" || m.first_components.front().size() != 1) {
    throw PreconditionError("canonical work check needs a single canonical system");
  }
  const double beta = quantity(m, "beta_0");
  const double df = quantity(m, "delta_F_0");
  const JointModel& jm = m.qm.model;
  const JointModel rec = reciprocal_model(jm, m.hyp.q);

  struct Pair {
    double w;
    double prob;
    double rprob;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < jm.n_first(); ++i) {
    for (std::size_t j = 0; j < jm.n_second(); ++j) {
      if (jm(i, j) <= 0.0) continue;
      pairs.push_back({m.energy_change(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                       jm(i, j), rec(j, i)});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.w < b.w; });
  const double tol = kGroupingTolerance / beta;
  std::vector<WorkLevel> levels;
  double anchor = 0.0;
  for (const auto& pr : pairs) {
    if (levels.empty() || pr.w - anchor > tol) {
      anchor = pr.w;
      levels.push_back({0.0, 0.0, 0.0, 0.0});
    }
    auto& l = levels.back();
    l.w += pr.prob * pr.w;
    l.prob += pr.prob;
    l.reciprocal_prob += pr.rprob;
  }
  CanonicalWorkCheck out;
  out.levels = levels.size();
  for (auto& l : levels) {
    l.w /= l.prob;
    out.ratio_error = std::max(
        out.ratio_error, std::abs(l.prob * std::exp(-beta * (l.w - df)) - l.reciprocal_prob));
  }
  const auto wd = WorkDistribution::from_crooks(crooks_check(jm, m.hyp.q), beta, df);
  if (wd.levels().size() != levels.size()) {
    out.level_mismatch = std::numeric_limits<double>::infinity();
    return out;
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& a = levels[k];
    const auto& b = wd.levels()[k];
    out.level_mismatch = std::max({out.level_mismatch, std::abs(a.prob - b.prob),
                                   std::abs(a.reciprocal_prob - b.reciprocal_prob),
                                   std::abs(a.w - b.w) * std::min(a.prob, 1.0)});
  }
  return out;
}

TimeReversalReport real_model_pauli(Rng& rng, int dim) {
  const HermitianOperator a(random_real_symmetric(rng, dim));
  const HermitianOperator b(random_real_symmetric(rng, dim));
  const CMatrix h = random_real_symmetric(rng, dim);
  const double tau = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
  const UnitaryEvolution u(unitary_exp(h, tau));
  return time_reversal_symmetry_check(u, joint_diagonalize({a}), joint_diagonalize({b}));
}

BlochGridCheck bloch_grid_check(int n) {
  BlochGridCheck out;
  for (int k = 0; k < n; ++k) {
    const double p = (k + 1.0) / (n + 1.0);
    const double lmax = bloch_lambda_max(p);
    const double h = 1e-5 * lmax;
    for (int l = 0; l < n; ++l) {
      const double lambda = lmax * (l + 0.5) / (n + 0.5);
      const double alpha = 0.37 * l;
      const auto pt = bloch_curve(p, lambda, alpha);
      const double fd =
          (bloch_curve(p, lambda + h, alpha).entropy - bloch_curve(p, lambda - h, alpha).entropy) /
          (2.0 * h);
      out.max_derivative_rel_error =
          std::max(out.max_derivative_rel_error, std::abs(fd - pt.dS_dlambda) / std::abs(pt.dS_dlambda));
      const CMatrix diff = pt.rho - 0.5 * CMatrix::Identity(2, 2);
      out.max_distance_error =
          std::max(out.max_distance_error, std::abs(diff.squaredNorm() - pt.distance2));
    }
  }
  return out;
}

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyReport run_verification(const VerifyOptions& opts) {
  VerifyReport rep;
  auto tol = [&](double t) { return opts.tolerance.value_or(t); };
  auto add = [&](std::string name, const std::string& rel, double measured, double threshold,
                 std::string detail = {}) {
    const bool ok = rel == "<=" ? measured <= threshold : measured >= threshold;
    rep.checks.push_back({std::move(name), rel, measured, threshold, ok, std::move(detail)});
  };

  for (CorpusFamily f : all_corpus_families()) {
    FamilyStats st = sweep_family(f, opts.seed, opts.models_per_family);
    const std::string fam = family_name(f);
    std::string fault_detail;
    if (opts.inject_fault && f == CorpusFamily::canonical_1) {
      for (std::uint64_t k = 0;; ++k) {
        const auto cm = make_corpus_model(f, opts.seed, k);
        const JointModel& jm = cm.model.qm.model;
        if (jm.n_first() < 2 || jm.n_second() < 2) continue;
        std::size_t col = 0;
        double sens = -1.0;
        for (std::size_t j = 0; j < jm.n_second(); ++j) {
          const double s = perturbation_sensitivity(cm.model, 0, j, opts.fault_size);
          if (s > sens) {
            sens = s;
            col = j;
          }
        }
        RMatrix pi = cm.model.qm.pi.matrix();
        pi(0, static_cast<Eigen::Index>(col)) += opts.fault_size;
        pi.row(0) /= pi.row(0).sum();
        const JointModel bad =
            joint_from_conditional(ConditionalMatrix(pi), cm.model.qm.p, jm.d(), jm.D());
        const double dev = std::abs(j_equation_lhs(bad, cm.model.hyp.q) - 1.0);
        const double ds = is_modified_doubly_stochastic(ConditionalMatrix(pi), jm.d(), jm.D(), 1.0)
                              .max_deviation;
        st.worst.j_equation_deviation = std::max(st.worst.j_equation_deviation, dev);
        st.worst.ds_deviation = std::max(st.worst.ds_deviation, ds);
        std::ostringstream os;
        os << "fault injected in model " << k << ": pi(" << col << "|0) += " << opts.fault_size
           << ", expected deviation " << sens;
        fault_detail = os.str();
        break;
      }
    }
    const std::string n = std::to_string(st.models) + " models";
    add(fam + "/jarzynski", "<=", st.worst.jarzynski_deviation, tol(1e-10), n);
    add(fam + "/j_equation", "<=", st.worst.j_equation_deviation, tol(1e-10),
        fault_detail.empty() ? n : fault_detail);
    add(fam + "/modified_doubly_stochastic", "<=", st.worst.ds_deviation, tol(1e-11), n);
    add(fam + "/jensen", ">=", st.worst.jensen, -tol(1e-12), n);
    add(fam + "/entropy_gap", ">=", st.worst.entropy_gap, -tol(1e-12), n);
    add(fam + "/povm_completeness", "<=", st.worst.povm_defect, tol(1e-11), n);
    add(fam + "/crooks_per_level", "<=", st.worst.crooks_error, tol(1e-12), n);
    add(fam + "/route_agreement", "<=", st.worst.route_discrepancy, tol(1e-9), n);
    rep.families.push_back(st);
  }

  Rng rng = make_rng(opts.seed, 1);
  double perm = 0.0;
  double positive = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const int n = uniform_int(rng, 2, 6);
    perm = std::max(perm, std::abs(permutation_entropy_gap(rng, n)));
    positive = std::min(positive, positive_ds_entropy_gap(rng, n));
  }
  add("entropy_gap/permutations", "<=", perm, tol(1e-9), "100 models, n <= 6");
  add("entropy_gap/positive_doubly_stochastic", ">=", positive, 1e-6, "100 models, n <= 6");

  double detect = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0, used = 0; used < 50; ++k) {
    const auto m = corpus_model(CorpusFamily::canonical_2, opts.seed, k);
    if (m.qm.model.n_second() < 2) continue;
    detect = std::min(detect, best_indicator_detection(m.qm.model, 1e-3));
    ++used;
  }
  add("converse/indicator_detection", ">=", detect, 1e-4, "best entry of pi += 1e-3 on 50 models");

  double crooks = 0.0;
  for (int ni = 1; ni <= 8; ++ni) {
    for (int nj = 1; nj <= 8; ++nj) {
      for (int r = 0; r < 3; ++r) crooks = std::max(crooks, enumerated_crooks_error(rng, ni, nj));
    }
  }
  add("crooks/enumerated_models", "<=", crooks, tol(1e-12), "|I|, |J| <= 8");

  double level_ratio = 0.0;
  double level_mismatch = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto wc = canonical_work_check(corpus_model(CorpusFamily::canonical_1, opts.seed, k));
    level_ratio = std::max(level_ratio, wc.ratio_error);
    level_mismatch = std::max(level_mismatch, wc.level_mismatch);
  }
  add("crooks/canonical_work_levels", "<=", level_ratio, tol(1e-12), "50 models");
  add("crooks/canonical_level_agreement", "<=", level_mismatch, tol(1e-12), "50 models");

  double pauli = 0.0;
  for (int k = 0; k < 100; ++k) pauli = std::max(pauli, real_model_pauli(rng, uniform_int(rng, 2, 5)).pauli_defect);
  add("pauli/real_models", "<=", pauli, tol(1e-12), "100 models");

  double uniform_dev = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = uniform_int(rng, 2, 6);
    const RMatrix pi = random_symmetric_doubly_stochastic(rng, n);
    const std::vector<double> p(static_cast<std::size_t>(n), 1.0 / n);
    const std::vector<int> ones(static_cast<std::size_t>(n), 1);
    const auto u = uniformity_check(joint_from_conditional(ConditionalMatrix(pi), p, ones, ones));
    uniform_dev = std::max(uniform_dev, u.holds() ? u.marginal_deviation : 1.0);
  }
  add("symmetric/uniform_marginals", "<=", uniform_dev, tol(1e-12), "50 models");

  const auto bloch = bloch_grid_check(20);
  add("bloch/derivative", "<=", bloch.max_derivative_rel_error, tol(1e-6), "20 x 20 grid");
  add("bloch/distance", "<=", bloch.max_distance_error, tol(1e-14), "20 x 20 grid");

  add("classical/quadrature", "<=", std::abs(harmonic_quench_quadrature(1.0, 1.0, 2.0) - 0.5),
      tol(1e-12), "omega 1 -> 2, beta 1");
  const auto est = classical_j_expectation(harmonic_canonical(1.0, 1.0), harmonic_canonical(2.0, 1.0),
                                           leapfrog_map(harmonic_ramp(1.0, 2.0, 2.0), 0.01, 200),
                                           100000, opts.seed);
  add("classical/monte_carlo", "<=", std::abs(est.mean - 1.0) / est.std_error, 3.0,
      "standard errors, ramp, n = 1e5");
  Rng jrng = make_rng(opts.seed, 2);
  add("classical/leapfrog_jacobian", "<=",
      jacobian_defect(leapfrog_map(harmonic_ramp(1.0, 2.0, 2.0), 0.01, 200), jrng, 100), tol(1e-8),
      "100 points");

  if (opts.include_wavepacket) {
    const auto pair = asymmetry_pair(1.0);
    add("wavepacket/forward", "<=", std::abs(pair.forward - 0.00483946), tol(1e-8), "p(1,1|0,0)");
    add("wavepacket/backward", "<=", std::abs(pair.backward - 0.00258997), tol(1e-8), "p(0,0|1,1)");
    add("wavepacket/pauli_violation", ">=", std::abs(pair.forward - pair.backward), 2e-3);
  }
  return rep;
}

}  // namespace seqmeas
