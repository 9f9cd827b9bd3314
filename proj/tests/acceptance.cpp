// Acceptance suite: one PASS/FAIL line per criterion. Run with criterion
// numbers as arguments, or none for all twelve.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "seqmeas/bloch.hpp"
#include "seqmeas/classical.hpp"
#include "seqmeas/verify.hpp"
#include "seqmeas/wavepacket.hpp"

using namespace seqmeas;

namespace {

constexpr std::uint64_t kSeed = 20240611;

constexpr double kReferenceEntropy = 1.3654;
constexpr double kReferenceEntropyTol = 5e-4;
constexpr double kReferenceEntropySeconds = 60.0;
constexpr double kForward = 0.00483946;
constexpr double kBackward = 0.00258997;
constexpr double kPairTol = 1e-8;
constexpr int kSweepModels = 1000;
constexpr double kSweepSeconds = 300.0;
constexpr double kJarzynskiTol = 1e-10;
constexpr double kDoublyStochasticTol = 1e-11;
constexpr double kFaultSize = 1e-3;
constexpr double kDetectionMin = 1e-4;
constexpr double kSecondLawTol = 1e-12;
constexpr double kPermutationTol = 1e-9;
constexpr double kPositiveGapMin = 1e-6;
constexpr double kCrooksTol = 1e-12;
constexpr double kPauliTol = 1e-12;
constexpr double kPauliViolationMin = 2e-3;
constexpr double kBlochDerivativeTol = 1e-6;
constexpr double kBlochDistanceTol = 1e-14;
constexpr double kQuadratureTol = 1e-12;
constexpr double kStandardErrors = 3.0;
constexpr double kJacobianTol = 1e-8;
constexpr double kPovmTol = 1e-11;

struct Line {
  std::string what;
  double measured;
  std::string relation;
  double threshold;
  bool ok() const {
    if (relation == "<=") return measured <= threshold;
    if (relation == ">") return measured > threshold;
    return measured >= threshold;
  }
};

struct Outcome {
  std::vector<Line> lines;
  std::string note;
};

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<FamilyStats> full_sweep(double* seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<FamilyStats> out;
  for (CorpusFamily f : all_corpus_families()) out.push_back(sweep_family(f, kSeed, kSweepModels));
  if (seconds) *seconds = seconds_since(t0);
  return out;
}

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = first_distribution(1.0, {8, 512});
  const double secs = seconds_since(t0);
  const auto finer = first_distribution(1.0, {8, 1024});
  const auto narrow = first_distribution(1.0, {8, 14});
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "S(p) = %.8f at N_p = 512, %.8f at N_p = 1024; |n| <= 14 gives %.6f",
                f.entropy, finer.entropy, narrow.entropy);
  return {{{"|S(p) - 1.3654|", std::abs(f.entropy - kReferenceEntropy), "<=", kReferenceEntropyTol},
           {"seconds", secs, "<=", kReferenceEntropySeconds}},
          buf};
}

Outcome c2() {
  WavepacketConfig cfg;
  cfg.window = {8, 512};
  const auto rows = entropy_curve(cfg, default_t_grid(10));
  double min_gap = std::numeric_limits<double>::infinity();
  double min_step = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    min_gap = std::min(min_gap, rows[k].s_phat - rows[k].s_p);
    if (k > 0) min_step = std::min(min_step, rows[k].s_phat - rows[k - 1].s_phat);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "S(phat) from %.6f to %.6f over %zu points", rows.front().s_phat,
                rows.back().s_phat, rows.size());
  return {{{"min S(phat) - S(p)", min_gap, ">", 0.0},
           {"min consecutive step", min_step, ">=", 0.0},
           {"grid points", static_cast<double>(rows.size()), ">=", 10.0}},
          buf};
}

Outcome c3() {
  const auto pair = asymmetry_pair(1.0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "forward %.12f, backward %.12f", pair.forward, pair.backward);
  return {{{"|p(1,1|0,0) - 0.00483946|", std::abs(pair.forward - kForward), "<=", kPairTol},
           {"|p(0,0|1,1) - 0.00258997|", std::abs(pair.backward - kBackward), "<=", kPairTol}},
          buf};
}

Outcome c4() {
  double secs = 0.0;
  const auto sweep = full_sweep(&secs);
  Outcome o;
  for (const auto& st : sweep) {
    o.lines.push_back({family_name(st.family) + " |jarzynski - 1|", st.worst.jarzynski_deviation,
                       "<=", kJarzynskiTol});
  }
  o.lines.push_back({"seconds", secs, "<=", kSweepSeconds});
  o.note = std::to_string(kSweepModels) + " models per family";
  return o;
}

Outcome c5() {
  const auto sweep = full_sweep(nullptr);
  Outcome o;
  for (const auto& st : sweep) {
    o.lines.push_back({family_name(st.family) + " doubly stochastic defect", st.worst.ds_deviation,
                       "<=", kDoublyStochasticTol});
  }
  // Converse: every family, first 100 models with at least two outcomes.
  for (CorpusFamily f : all_corpus_families()) {
    double detect = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0, used = 0; used < 100; ++k) {
      const auto m = corpus_model(f, kSeed, k);
      if (m.qm.model.n_second() < 2) continue;
      detect = std::min(detect, best_indicator_detection(m.qm.model, kFaultSize));
      ++used;
    }
    o.lines.push_back({family_name(f) + " perturbation detected", detect, ">=", kDetectionMin});
  }
  o.note = "pi(j|i) += 1e-3 at the most sensitive entry, row renormalized";
  return o;
}

Outcome c6() {
  const auto sweep = full_sweep(nullptr);
  Outcome o;
  for (const auto& st : sweep) {
    o.lines.push_back({family_name(st.family) + " entropy gap", st.worst.entropy_gap, ">=",
                       -kSecondLawTol});
    o.lines.push_back({family_name(st.family) + " Jensen", st.worst.jensen, ">=", -kSecondLawTol});
  }
  return o;
}

Outcome c7() {
  Rng rng = make_rng(kSeed, 1);
  double perm = 0.0;
  double positive = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const int n = uniform_int(rng, 2, 6);
    perm = std::max(perm, std::abs(permutation_entropy_gap(rng, n)));
    positive = std::min(positive, positive_ds_entropy_gap(rng, n));
  }
  return {{{"permutation |gap|", perm, "<=", kPermutationTol},
           {"positive doubly stochastic gap", positive, ">=", kPositiveGapMin}},
          "100 models each, n <= 6"};
}

Outcome c8() {
  Rng rng = make_rng(kSeed, 3);
  double enumerated = 0.0;
  for (int ni = 1; ni <= 8; ++ni) {
    for (int nj = 1; nj <= 8; ++nj) {
      for (int r = 0; r < 5; ++r) enumerated = std::max(enumerated, enumerated_crooks_error(rng, ni, nj));
    }
  }
  double ratio = 0.0, mismatch = 0.0;
  for (std::uint64_t k = 0; k < 400; ++k) {
    const auto wc = canonical_work_check(corpus_model(CorpusFamily::canonical_1, kSeed, k));
    ratio = std::max(ratio, wc.ratio_error);
    mismatch = std::max(mismatch, wc.level_mismatch);
  }
  return {{{"per-level error, enumerated", enumerated, "<=", kCrooksTol},
           {"canonical work ratio error", ratio, "<=", kCrooksTol},
           {"canonical level mismatch", mismatch, "<=", kCrooksTol}},
          "5 models per (|I|, |J|) <= (8, 8); 400 single-system canonical models"};
}

Outcome c9() {
  Rng rng = make_rng(kSeed, 4);
  double defect = 0.0;
  for (int k = 0; k < 200; ++k) {
    defect = std::max(defect, real_model_pauli(rng, uniform_int(rng, 2, 6)).pauli_defect);
  }
  const auto pair = asymmetry_pair(1.0);
  return {{{"real models Pauli defect", defect, "<=", kPauliTol},
           {"wavepacket violation", std::abs(pair.forward - pair.backward), ">=", kPauliViolationMin}},
          "200 real models, dim <= 6"};
}

Outcome c10() {
  const auto g = bloch_grid_check(20);
  return {{{"dS/dlambda relative error", g.max_derivative_rel_error, "<=", kBlochDerivativeTol},
           {"distance^2 error", g.max_distance_error, "<=", kBlochDistanceTol}},
          "20 x 20 grid"};
}

Outcome c11() {
  const double quad = harmonic_quench_quadrature(1.0, 1.0, 2.0);
  const auto p = harmonic_canonical(1.0, 1.0);
  const auto q = harmonic_canonical(2.0, 1.0);
  const auto quench = classical_j_expectation(p, q, identity_map(2), 100000, kSeed);
  const auto ramp_map = leapfrog_map(harmonic_ramp(1.0, 2.0, 2.0), 0.01, 200);
  const auto ramp = classical_j_expectation(p, q, ramp_map, 100000, kSeed);
  Rng rng = make_rng(kSeed, 2);
  char buf[160];
  std::snprintf(buf, sizeof buf, "quench %.6f +- %.6f, ramp %.6f +- %.6f", quench.mean,
                quench.std_error, ramp.mean, ramp.std_error);
  return {{{"|quadrature - omega0/omega1|", std::abs(quad - 0.5), "<=", kQuadratureTol},
           {"quench |mean - 1| / SE", std::abs(quench.mean - 1.0) / quench.std_error, "<=",
            kStandardErrors},
           {"ramp |mean - 1| / SE", std::abs(ramp.mean - 1.0) / ramp.std_error, "<=", kStandardErrors},
           {"leapfrog Jacobian defect", jacobian_defect(ramp_map, rng, 100), "<=", kJacobianTol}},
          buf};
}

Outcome c12() {
  const auto sweep = full_sweep(nullptr);
  Outcome o;
  for (const auto& st : sweep) {
    o.lines.push_back({family_name(st.family) + " POVM completeness", st.worst.povm_defect, "<=",
                       kPovmTol});
  }
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"wavepacket first-measurement entropy", c1},
      {"entropy gap and monotone second marginal", c2},
      {"asymmetry pair", c3},
      {"Jarzynski sweep", c4},
      {"doubly stochastic equivalence and converse", c5},
      {"second-law suites", c6},
      {"entropy gap under doubly stochastic maps", c7},
      {"Crooks per level", c8},
      {"Pauli symmetry", c9},
      {"Bloch curve", c10},
      {"classical J-equation", c11},
      {"POVM completeness", c12},
  };
  return all;
}

bool run(int c) {
  const auto& [name, fn] = criteria()[static_cast<std::size_t>(c - 1)];
  const auto t0 = std::chrono::steady_clock::now();
  const Outcome o = fn();
  bool ok = true;
  for (const auto& l : o.lines) ok = ok && l.ok();
  std::printf("C%d %s %s (%.1f s)\n", c, ok ? "PASS" : "FAIL", name.c_str(), seconds_since(t0));
  for (const auto& l : o.lines) {
    std::printf("    %-4s %s = %.6g %s %.3g\n", l.ok() ? "ok" : "FAIL", l.what.c_str(), l.measured,
                l.relation.c_str(), l.threshold);
  }
  if (!o.note.empty()) std::printf("    %s\n", o.note.c_str());
  std::fflush(stdout);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int k = 1; k < argc; ++k) {
    const int c = std::atoi(argv[k]);
    if (c < 1 || c > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[k]);
      return 2;
    }
    which.push_back(c);
  }
  if (which.empty()) {
    for (int c = 1; c <= static_cast<int>(criteria().size()); ++c) which.push_back(c);
  }
  bool ok = true;
  for (int c : which) ok = run(c) && ok;
  return ok ? 0 : 1;
}
