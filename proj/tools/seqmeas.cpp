// seqmeas: command-line driver for the verification suites and the model
// generators. Every command writes a JSON report (stdout and output dir) and
// exits 0 iff all checks in the report pass.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "seqmeas/classical.hpp"
#include "seqmeas/crooks.hpp"
#include "seqmeas/ensembles.hpp"
#include "seqmeas/errors.hpp"
#include "seqmeas/fock.hpp"
#include "seqmeas/io.hpp"
#include "seqmeas/verify.hpp"
#include "seqmeas/wavepacket.hpp"

namespace fs = std::filesystem;
using namespace seqmeas;

namespace {

struct RunConfig {
  std::string command;
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 20240611;
  std::optional<double> tolerance;
};

struct Report {
  json checks = json::array();
  json results = json::object();
  json tolerances = json::object();
  json warnings = json::array();

  double tol(const RunConfig& rc, const std::string& name, double value) {
    const double t = rc.tolerance.value_or(value);
    tolerances[name] = t;
    return t;
  }

  void check(const std::string& name, const std::string& rel, double measured, double threshold,
             const std::string& detail = {}) {
    const bool ok = rel == "<=" ? measured <= threshold : measured >= threshold;
    json c = {{"name", name}, {"relation", rel}, {"measured", measured},
              {"threshold", threshold}, {"passed", ok}};
    if (!detail.empty()) c["detail"] = detail;
    checks.push_back(std::move(c));
  }

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.at("passed").get<bool>()) return false;
    }
    return true;
  }
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
}

fs::path output_path(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.output_dir);
  return fs::path(rc.output_dir) / name;
}

json metadata(const RunConfig& rc, const json& config, const Report& rep) {
  return {{"version", SEQMEAS_VERSION},
          {"command", rc.command},
          {"config_path", rc.config_path},
          {"config_hash", config_hash(config)},
          {"seed", rc.seed},
          {"tolerances", rep.tolerances}};
}

// Unitary from "unitary" (matrix or "identity") or "protocol" (segments of
// {"h": matrix, "duration": t}). `lift` maps segment Hamiltonians into the
// measured space (second quantization for grand canonical configs).
UnitaryEvolution unitary_from(const json& cfg, Eigen::Index dim,
                              const std::function<CMatrix(const CMatrix&)>& lift) {
  if (cfg.contains("protocol")) {
    Protocol prot;
    for (const auto& seg : cfg.at("protocol")) {
      prot.push_back({HermitianOperator(lift(matrix_from_json(seg.at("h")))),
                      seg.at("duration").get<double>()});
    }
    return evolve(prot, dim);
  }
  if (!cfg.contains("unitary") || (cfg.at("unitary").is_string() &&
                                   cfg.at("unitary").get<std::string>() == "identity")) {
    return UnitaryEvolution::identity(dim);
  }
  return UnitaryEvolution(matrix_from_json(cfg.at("unitary")));
}

EnsembleModel ensemble_from(const json& cfg, UnitaryEvolution* u_out = nullptr) {
  const auto kind = cfg.at("kind").get<std::string>();
  auto same = [](const CMatrix& h) { return h; };
  auto keep = [&](UnitaryEvolution u) {
    if (u_out) *u_out = u;
    return u;
  };
  if (kind == "local_canonical") {
    LocalCanonicalConfig c;
    Eigen::Index dim = 1;
    for (const auto& s : cfg.at("subsystems")) {
      c.h_t0.emplace_back(matrix_from_json(s.at("h_t0")));
      c.h_t1.emplace_back(matrix_from_json(s.at("h_t1")));
      c.betas.push_back(s.at("beta").get<double>());
      dim *= c.h_t0.back().dim();
    }
    return local_canonical_model(c, keep(unitary_from(cfg, dim, same)));
  }
  if (kind == "microcanonical") {
    MicrocanonicalConfig c{HermitianOperator(matrix_from_json(cfg.at("h_t0"))),
                           HermitianOperator(matrix_from_json(cfg.at("h_t1"))),
                           cfg.at("energy").get<double>(), cfg.at("width").get<double>()};
    return microcanonical_model(c, keep(unitary_from(cfg, c.h_t0.dim(), same)));
  }
  if (kind == "grand_canonical") {
    GrandCanonicalConfig c{matrix_from_json(cfg.at("h_t0")), matrix_from_json(cfg.at("h_t1")),
                           cfg.at("beta").get<double>(), cfg.at("mu").get<double>()};
    const int modes = static_cast<int>(c.h_t0.rows());
    auto lift = [](const CMatrix& h) { return second_quantize(h); };
    return grand_canonical_model(c, keep(unitary_from(cfg, fock_dim(modes), lift)));
  }
  if (kind == "periodic_thermo") {
    PeriodicThermoConfig c{{}, CMatrix(), HermitianOperator(matrix_from_json(cfg.at("bath_hamiltonian"))),
                           cfg.at("theta").get<double>(), cfg.at("beta").get<double>()};
    if (cfg.contains("rabi")) {
      const auto& r = cfg.at("rabi");
      c.quasi_energies = rabi_quasi_energies(r.at("omega0").get<double>(),
                                             r.at("omega").get<double>(), r.at("rabi").get<double>());
    } else {
      c.quasi_energies = cfg.at("quasi_energies").get<std::vector<double>>();
    }
    if (cfg.contains("system_basis")) c.system_basis = matrix_from_json(cfg.at("system_basis"));
    const auto dim = static_cast<Eigen::Index>(c.quasi_energies.size()) * c.bath_hamiltonian.dim();
    return periodic_thermo_model(c, keep(unitary_from(cfg, dim, same)));
  }
  throw ValidationError("unknown ensemble kind \"" + kind + "\"");
}

int cmd_verify(const RunConfig& rc, const json& config, int models, bool fault, double fault_size,
               bool wavepacket, Report& rep) {
  VerifyOptions opts;
  opts.seed = rc.seed;
  opts.models_per_family = models;
  opts.tolerance = rc.tolerance;
  opts.inject_fault = fault;
  opts.fault_size = fault_size;
  opts.include_wavepacket = wavepacket;
  const VerifyReport vr = run_verification(opts);
  for (const auto& c : vr.checks) rep.check(c.name, c.relation, c.measured, c.threshold, c.detail);
  json fams = json::array();
  for (const auto& f : vr.families) {
    fams.push_back({{"family", family_name(f.family)}, {"models", f.models}, {"seconds", f.seconds}});
  }
  rep.results["families"] = fams;
  rep.results["models_per_family"] = models;
  rep.results["fault_injected"] = fault;
  if (rc.tolerance) rep.tolerances["override"] = *rc.tolerance;
  (void)config;
  return 0;
}

int cmd_ensemble(const RunConfig& rc, const json& config, Report& rep) {
  UnitaryEvolution u = UnitaryEvolution::identity(1);
  const EnsembleModel m = ensemble_from(config, &u);
  const auto slr = second_law_report(m, rep.tol(rc, "second_law", 1e-12));
  rep.check("jarzynski", "<=", std::abs(m.jarzynski_lhs - 1.0), rep.tol(rc, "jarzynski", 1e-10));
  rep.check("j_equation", "<=", std::abs(m.j_equation_lhs - 1.0), rep.tol(rc, "j_equation", 1e-10));
  rep.check("modified_doubly_stochastic", "<=",
            is_modified_doubly_stochastic(m.qm.pi, m.qm.model.d(), m.qm.model.D(), 1.0).max_deviation,
            rep.tol(rc, "doubly_stochastic", 1e-11));
  rep.check("jensen", ">=", slr.jensen_lhs, -slr.tolerance, slr.jensen_label);
  rep.check("entropy_gap", ">=", slr.entropy_gap, -slr.tolerance);
  rep.check("povm_completeness", "<=", povm_completeness_defect(povm_elements(u, m.first, m.second)),
            rep.tol(rc, "povm", 1e-11));
  const auto cr = crooks_check(m.qm.model, m.hyp.q);
  rep.check("crooks_per_level", "<=", cr.max_ratio_error, rep.tol(rc, "crooks", 1e-12));

  json q = json::object();
  for (const auto& [k, v] : m.quantities) q[k] = v;
  rep.results = {{"kind", m.kind},
                 {"jarzynski_lhs", m.jarzynski_lhs},
                 {"j_equation_lhs", m.j_equation_lhs},
                 {"jensen_lhs", m.jensen_lhs},
                 {"jensen_label", slr.jensen_label},
                 {"entropy_gap", slr.entropy_gap},
                 {"route_discrepancy", m.route_discrepancy},
                 {"quantities", q},
                 {"joint_model", joint_model_to_json(m.qm.model)}};
  {
    std::ofstream f(output_path(rc, "ensemble_first_family.csv"));
    write_family_csv(f, m.first);
    std::ofstream s(output_path(rc, "ensemble_second_family.csv"));
    write_family_csv(s, m.second);
  }
  if (m.kind == "local_canonical" && m.first_components.front().size() == 1) {
    double beta = 0.0, df = 0.0;
    for (const auto& [k, v] : m.quantities) {
      if (k == "beta_0") beta = v;
      if (k == "delta_F_0") df = v;
    }
    const auto wd = WorkDistribution::from_crooks(cr, beta, df);
    std::ofstream f(output_path(rc, "ensemble_work.csv"));
    write_work_csv(f, wd);
    rep.results["mean_work"] = wd.mean();
  }
  return 0;
}

int cmd_crooks(const RunConfig& rc, const json& config, Report& rep) {
  const double tol = rep.tol(rc, "crooks", 1e-12);
  std::optional<JointModel> model;
  std::optional<HypotheticalDistribution> q;
  std::optional<std::pair<double, double>> work;
  if (config.contains("ensemble")) {
    const EnsembleModel m = ensemble_from(config.at("ensemble"));
    model = m.qm.model;
    q = m.hyp.q;
    if (m.kind == "local_canonical" && m.first_components.front().size() == 1) {
      double beta = 0.0, df = 0.0;
      for (const auto& [k, v] : m.quantities) {
        if (k == "beta_0") beta = v;
        if (k == "delta_F_0") df = v;
      }
      work = {beta, df};
    }
  } else {
    model = joint_model_from_json(config);
    q = HypotheticalDistribution(config.at("q").get<std::vector<double>>());
    if (config.contains("beta")) {
      work = {config.at("beta").get<double>(), config.value("delta_f", 0.0)};
    }
  }
  const auto cr = crooks_check(*model, *q);
  rep.check("crooks_per_level", "<=", cr.max_ratio_error, tol);
  rep.check("j_equation", "<=", std::abs(cr.j_sum - 1.0), rep.tol(rc, "j_equation", 1e-10));
  json levels = json::array();
  for (const auto& l : cr.levels) {
    levels.push_back({{"y", l.y}, {"prob", l.prob}, {"reciprocal_prob", l.reciprocal_prob},
                      {"ratio_error", l.ratio_error}, {"pairs", l.n_pairs}});
  }
  rep.results = {{"levels", levels}, {"j_sum", cr.j_sum}, {"grouping_tolerance", cr.grouping_tolerance}};
  if (work) {
    const auto wd = WorkDistribution::from_crooks(cr, work->first, work->second);
    std::ofstream f(output_path(rc, "crooks_work.csv"));
    write_work_csv(f, wd);
    rep.results["beta"] = work->first;
    rep.results["delta_f"] = work->second;
    rep.results["mean_work"] = wd.mean();
  }
  return 0;
}

struct ClassicalArgs {
  double beta = 1.0;
  double omega0 = 1.0;
  double omega1 = 2.0;
  std::string protocol = "quench";
  std::uint64_t n = 100000;
  double dt = 0.01;
  int steps = 200;
  std::string dump_work;
};

int cmd_classical(const RunConfig& rc, const ClassicalArgs& a, Report& rep) {
  const auto p = harmonic_canonical(a.omega0, a.beta);
  const auto q = harmonic_canonical(a.omega1, a.beta);
  VolumePreservingMap u = a.protocol == "ramp"
                              ? leapfrog_map(harmonic_ramp(a.omega0, a.omega1, a.dt * a.steps),
                                             a.dt, a.steps)
                              : identity_map(2);
  if (a.protocol != "ramp" && a.protocol != "quench") {
    throw ValidationError("protocol must be quench or ramp");
  }
  const auto est = classical_j_expectation(p, q, u, a.n, rc.seed);
  rep.check("j_expectation_within_3_sigma", "<=", std::abs(est.mean - 1.0),
            3.0 * est.std_error, "|mean - 1| <= 3 standard errors");
  const double delta_f = std::log(a.omega1 / a.omega0) / a.beta;
  rep.results = {{"protocol", a.protocol},
                 {"mean", est.mean},
                 {"std_error", est.std_error},
                 {"n_samples", est.n_samples},
                 {"seed", est.seed},
                 {"effective_sample_size", est.effective_sample_size},
                 {"nonfinite", est.n_nonfinite},
                 {"delta_f", delta_f},
                 {"exp_minus_beta_delta_f", std::exp(-a.beta * delta_f)},
                 {"map_certificate", u.certificate}};
  if (a.protocol == "quench") {
    const double quad = harmonic_quench_quadrature(a.beta, a.omega0, a.omega1);
    rep.check("quadrature_oracle", "<=", std::abs(quad - a.omega0 / a.omega1),
              rep.tol(rc, "quadrature", 1e-12), "<exp(-beta w)> = omega0/omega1");
    rep.results["quadrature_exp_minus_beta_w"] = quad;
  } else {
    Rng rng = make_rng(rc.seed, 2);
    rep.check("leapfrog_jacobian", "<=", jacobian_defect(u, rng, 100),
              rep.tol(rc, "jacobian", 1e-8));
  }
  const auto h0 = harmonic_hamiltonian(a.omega0);
  const auto h1 = harmonic_hamiltonian(a.omega1);
  const auto w = work_samples(p, h0, h1, u, a.n, rc.seed);
  double mean_w = 0.0;
  for (double x : w) mean_w += x;
  mean_w /= static_cast<double>(w.size());
  rep.results["mean_work"] = mean_w;
  if (!a.dump_work.empty()) {
    std::ofstream f(output_path(rc, a.dump_work));
    f << "w\n";
    for (double x : w) f << format_double(x) << '\n';
  }
  return 0;
}

struct WavepacketArgs {
  double sigma = 1.0;
  int n_x = 8;
  int n_p = 512;
  std::vector<double> t_grid;
  int points = 10;
  double mass_tolerance = 1e-3;
};

int cmd_wavepacket(const RunConfig& rc, const json& config, WavepacketArgs a, Report& rep) {
  if (!config.is_null()) {
    a.sigma = config.value("sigma", a.sigma);
    if (config.contains("window")) {
      a.n_x = config.at("window").value("n_x", a.n_x);
      a.n_p = config.at("window").value("n_p", a.n_p);
    }
    if (config.contains("t_grid")) a.t_grid = config.at("t_grid").get<std::vector<double>>();
    a.points = config.value("points", a.points);
    a.mass_tolerance = config.value("mass_tolerance", a.mass_tolerance);
  }
  WavepacketConfig wc;
  wc.sigma = a.sigma;
  wc.window = {a.n_x, a.n_p};
  wc.mass_tolerance = a.mass_tolerance;
  rep.tolerances["mass_tolerance"] = a.mass_tolerance;
  const auto grid = a.t_grid.empty() ? default_t_grid(a.points) : a.t_grid;
  const auto rows = entropy_curve(wc, grid);
  {
    std::ofstream f(output_path(rc, "entropy_curve.csv"));
    write_entropy_curve_csv(f, rows);
  }
  double min_gap = rows.front().s_phat - rows.front().s_p;
  double min_step = 0.0;
  json jrows = json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    min_gap = std::min(min_gap, r.s_phat - r.s_p);
    if (k > 0) min_step = k == 1 ? r.s_phat - rows[0].s_phat : std::min(min_step, r.s_phat - rows[k - 1].s_phat);
    jrows.push_back({{"t", r.t}, {"S_p", r.s_p}, {"S_phat", r.s_phat},
                     {"mass_deficit_p", r.mass_deficit_p}, {"mass_deficit_phat", r.mass_deficit_phat},
                     {"mu_window", r.mu_max}, {"flagged", r.flagged}});
    if (r.flagged) {
      std::ostringstream msg;
      msg << "t=" << r.t << ": mass deficit " << r.mass_deficit_phat << " exceeds "
          << a.mass_tolerance;
      rep.warnings.push_back(msg.str());
      std::cerr << "warning: " << msg.str() << '\n';
    }
  }
  rep.check("entropy_gap_positive", ">=", min_gap, 0.0, "min_t S(p_hat, t) - S(p)");
  if (rows.size() > 1) rep.check("S_phat_nondecreasing", ">=", min_step, 0.0);
  const auto pair = asymmetry_pair(1.0);
  const double at = rep.tol(rc, "asymmetry_pair", 1e-8);
  rep.check("p(1,1|0,0)", "<=", std::abs(pair.forward - 0.00483946), at);
  rep.check("p(0,0|1,1)", "<=", std::abs(pair.backward - 0.00258997), at);
  rep.results = {{"sigma", a.sigma},
                 {"N_x", a.n_x},
                 {"N_p", a.n_p},
                 {"S_p", rows.front().s_p},
                 {"mass_deficit_p", rows.front().mass_deficit_p},
                 {"reference_entropy", 1.3654},
                 {"reference_entropy_difference", rows.front().s_p - 1.3654},
                 {"asymmetry_pair", {{"p(1,1|0,0)", pair.forward}, {"p(0,0|1,1)", pair.backward}}},
                 {"rows", jrows}};
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential measurement models: J-equation, Jarzynski and entropy checks"};
  app.require_subcommand(1);
  RunConfig rc;
  if (const char* env = std::getenv("SEQMEAS_OUTPUT_DIR")) rc.output_dir = env;
  if (rc.output_dir.empty()) rc.output_dir = "seqmeas_out";
  double tolerance = 0.0;
  app.add_option("--output-dir", rc.output_dir, "Directory for reports (default $SEQMEAS_OUTPUT_DIR)");
  app.add_option("--seed", rc.seed, "Base seed");
  auto* tol_opt = app.add_option("--tolerance", tolerance, "Override every floating-point tolerance");

  auto* verify = app.add_subcommand("verify", "Run the invariant corpus");
  int models = 200;
  bool fault = false;
  double fault_size = 1e-3;
  bool no_wavepacket = false;
  verify->add_option("--config", rc.config_path, "Optional JSON with models_per_family");
  verify->add_option("--models", models, "Random models per ensemble family");
  verify->add_flag("--inject-fault", fault, "Perturb one conditional entry");
  verify->add_option("--fault-size", fault_size, "Size of the injected perturbation");
  verify->add_flag("--no-wavepacket", no_wavepacket, "Skip the wavepacket checks");

  auto* ensemble = app.add_subcommand("ensemble", "Build one ensemble model from JSON");
  ensemble->add_option("--config", rc.config_path)->required()->check(CLI::ExistingFile);

  auto* crooks = app.add_subcommand("crooks", "Per-level Crooks check of a joint model");
  crooks->add_option("--config", rc.config_path)->required()->check(CLI::ExistingFile);

  auto* classical = app.add_subcommand("classical", "Classical harmonic J-equation estimate");
  ClassicalArgs ca;
  classical->add_option("--beta", ca.beta);
  classical->add_option("--omega0", ca.omega0);
  classical->add_option("--omega1", ca.omega1);
  classical->add_option("--protocol", ca.protocol)->check(CLI::IsMember({"quench", "ramp"}));
  classical->add_option("--n", ca.n);
  classical->add_option("--dt", ca.dt);
  classical->add_option("--steps", ca.steps);
  classical->add_option("--dump-work", ca.dump_work, "CSV file name for work samples");
  classical->add_option("--seed", rc.seed);

  auto* wavepacket = app.add_subcommand("wavepacket", "Entropy curve of the free wavepacket");
  WavepacketArgs wa;
  wavepacket->add_option("--config", rc.config_path)->check(CLI::ExistingFile);
  wavepacket->add_option("--sigma", wa.sigma);
  wavepacket->add_option("--nx", wa.n_x);
  wavepacket->add_option("--np", wa.n_p);
  wavepacket->add_option("--t-grid", wa.t_grid)->delimiter(',');
  wavepacket->add_option("--points", wa.points);
  wavepacket->add_option("--mass-tolerance", wa.mass_tolerance);

  CLI11_PARSE(app, argc, argv);
  if (*tol_opt) rc.tolerance = tolerance;

  Report rep;
  json config;
  int code = 0;
  try {
    if (!rc.config_path.empty()) config = read_json(rc.config_path);
    if (*verify) {
      rc.command = "verify";
      if (config.is_object()) models = config.value("models_per_family", models);
      cmd_verify(rc, config, models, fault, fault_size, !no_wavepacket, rep);
    } else if (*ensemble) {
      rc.command = "ensemble";
      cmd_ensemble(rc, config, rep);
    } else if (*crooks) {
      rc.command = "crooks";
      cmd_crooks(rc, config, rep);
    } else if (*classical) {
      rc.command = "classical";
      config = {{"beta", ca.beta}, {"omega0", ca.omega0}, {"omega1", ca.omega1},
                {"protocol", ca.protocol}, {"n", ca.n}, {"dt", ca.dt}, {"steps", ca.steps}};
      cmd_classical(rc, ca, rep);
    } else if (*wavepacket) {
      rc.command = "wavepacket";
      cmd_wavepacket(rc, config, wa, rep);
    }
    code = rep.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    rep.results["error"] = e.what();
    std::cerr << "error: " << e.what() << '\n';
    code = 2;
  }

  json out = {{"metadata", metadata(rc, config, rep)},
              {"checks", rep.checks},
              {"results", rep.results},
              {"warnings", rep.warnings},
              {"passed", code == 0}};
  const std::string text = out.dump(2);
  std::cout << text << '\n';
  try {
    std::ofstream f(output_path(rc, (rc.command.empty() ? "run" : rc.command) + "_report.json"));
    f << text << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write report: " << e.what() << '\n';
    if (code == 0) code = 2;
  }
  return code;
}
