#include "seqmeas/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "seqmeas/errors.hpp"
#include "seqmeas/fock.hpp"

namespace seqmeas {
namespace {

double log_sum_exp(const std::vector<double>& x) {
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : x) s += std::exp(v - top);
  return top + std::log(s);
}

RVector spectrum(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// ln sum_k exp(-beta lambda_k) straight from the spectrum.
double log_partition(const HermitianOperator& h, double beta) {
  const RVector ev = spectrum(h);
  std::vector<double> x(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index k = 0; k < ev.size(); ++k) x[static_cast<std::size_t>(k)] = -beta * ev(k);
  return log_sum_exp(x);
}

double log_normalization(const SpectralFamily& fam, const EnsembleWeight& log_g) {
  std::vector<double> x(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    x[i] = log_g(fam.tuple(i)) + std::log(static_cast<double>(fam.degeneracies()[i]));
  }
  return log_sum_exp(x);
}

// Splits a concatenated product tuple into per-subsystem slices.
std::vector<std::span<const double>> split_tuple(std::span<const double> t,
                                                 const std::vector<std::size_t>& lengths) {
  std::vector<std::span<const double>> out;
  std::size_t off = 0;
  for (std::size_t len : lengths) {
    out.push_back(t.subspan(off, len));
    off += len;
  }
  return out;
}

void finalize(EnsembleModel& m) {
  const JointModel& jm = m.qm.model;
  const auto& q = m.hyp.q;
  m.jarzynski_lhs = 0.0;
  m.jensen_lhs = 0.0;
  m.route_discrepancy = 0.0;
  for (std::size_t i = 0; i < jm.n_first(); ++i) {
    for (std::size_t j = 0; j < jm.n_second(); ++j) {
      const double pij = jm(i, j);
      const double ly = m.log_y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      m.jarzynski_lhs += pij * std::exp(ly);
      m.jensen_lhs -= pij * ly;
      if (pij > 0.0 && q[j] > 0.0) {
        const double generic =
            std::log(jm.d()[i] * q[j] / (jm.D()[j] * m.qm.p[i]));
        m.route_discrepancy = std::max(m.route_discrepancy, std::abs(generic - ly));
      }
    }
  }
  m.j_equation_lhs = j_equation_lhs(jm, q);
}

double pair_mean(const JointModel& jm, const RMatrix& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < jm.n_first(); ++i) {
    for (std::size_t j = 0; j < jm.n_second(); ++j) {
      s += jm(i, j) * x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return s;
}

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    std::ostringstream msg;
    msg << name << " must be finite, got " << x;
    throw ValidationError(msg.str());
  }
}

}  // namespace

ProductFamily product_family(const std::vector<const SpectralFamily*>& factors) {
  if (factors.empty()) throw ShapeError("product_family: no factors");
  std::vector<CMatrix> bases{CMatrix::Identity(1, 1)};
  std::vector<std::vector<double>> tuples{{}};
  std::vector<std::vector<std::size_t>> comps{{}};
  std::vector<double> tols;
  std::vector<double> spreads;
  std::vector<int> dims;
  bool refined = false;
  for (const auto* f : factors) {
    dims.push_back(static_cast<int>(f->dim()));
    tols.insert(tols.end(), f->group_tolerances().begin(), f->group_tolerances().end());
    spreads.insert(spreads.end(), f->cluster_spreads().begin(), f->cluster_spreads().end());
    refined = refined || f->refined();
    std::vector<CMatrix> nb;
    std::vector<std::vector<double>> nt;
    std::vector<std::vector<std::size_t>> nc;
    for (std::size_t a = 0; a < bases.size(); ++a) {
      for (std::size_t k = 0; k < f->size(); ++k) {
        nb.push_back(kron(bases[a], f->basis(k)));
        auto t = tuples[a];
        t.insert(t.end(), f->tuple(k).begin(), f->tuple(k).end());
        nt.push_back(std::move(t));
        auto c = comps[a];
        c.push_back(k);
        nc.push_back(std::move(c));
      }
    }
    bases = std::move(nb);
    tuples = std::move(nt);
    comps = std::move(nc);
  }
  std::vector<HermitianOperator> ops;
  for (std::size_t s = 0; s < factors.size(); ++s) {
    for (const auto& op : factors[s]->operators()) {
      ops.emplace_back(lift_to_slot(op.matrix(), dims, s));
    }
  }
  for (std::size_t a = 0; a < ops.size(); ++a) {
    for (std::size_t b = a + 1; b < ops.size(); ++b) {
      const double c = max_abs(commutator(ops[a].matrix(), ops[b].matrix()));
      if (c > kCommutatorTolerance) {
        std::ostringstream msg;
        msg << "lifted operators " << a << " and " << b << " do not commute (" << c << ")";
        throw PreconditionError(msg.str());
      }
    }
  }
  return {SpectralFamily(std::move(ops), std::move(bases), std::move(tuples), std::move(tols),
                         std::move(spreads), refined),
          std::move(comps)};
}

EnsembleModel local_composition(const std::vector<Subsystem>& subsystems,
                                const UnitaryEvolution& u, const std::string& kind) {
  if (subsystems.empty()) throw ShapeError("local_composition: no subsystems");
  std::vector<const SpectralFamily*> f0, f1;
  std::vector<std::size_t> len0, len1;
  for (const auto& s : subsystems) {
    f0.push_back(&s.first);
    f1.push_back(&s.second);
    len0.push_back(s.first.tuple(0).size());
    len1.push_back(s.second.tuple(0).size());
  }
  ProductFamily p0 = product_family(f0);
  ProductFamily p1 = product_family(f1);

  auto total_log_g = [&subsystems](const std::vector<std::size_t>& lengths) {
    return [&subsystems, lengths](std::span<const double> t) {
      const auto parts = split_tuple(t, lengths);
      double s = 0.0;
      for (std::size_t k = 0; k < parts.size(); ++k) s += subsystems[k].log_g(parts[k]);
      return s;
    };
  };
  EnsembleState state = ensemble_state_log(p0.family, total_log_g(len0));
  HypotheticalWeights hyp = ensemble_hypothetical_log(p1.family, total_log_g(len1));
  QuantumModel qm = build_joint_model(state.rho, u, p0.family, p1.family);
  // The state is diagonal in the first family, so p(i) is known exactly;
  // Tr(rho P_i) loses relative accuracy in deep Boltzmann tails.
  {
    const auto& d0 = p0.family.degeneracies();
    for (std::size_t i = 0; i < qm.p.size(); ++i) qm.p[i] = state.weights[i] * d0[i];
    RMatrix table = qm.pi.matrix();
    for (Eigen::Index i = 0; i < table.rows(); ++i) table.row(i) *= qm.p[static_cast<std::size_t>(i)];
    qm.model = JointModel(std::move(table), d0, p1.family.degeneracies(), {}, {},
                          Normalization::exact, 1e-11);
  }

  const std::size_t n0 = p0.family.size();
  const std::size_t n1 = p1.family.size();
  RMatrix log_y = RMatrix::Zero(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(n1));
  RMatrix de = RMatrix::Zero(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(n1));
  std::vector<std::pair<std::string, double>> quantities;
  for (std::size_t s = 0; s < subsystems.size(); ++s) {
    const auto& sub = subsystems[s];
    const double ln0 = log_normalization(sub.first, sub.log_g);
    const double ln1 = log_normalization(sub.second, sub.log_g);
    quantities.emplace_back("log_normalization_t0_" + std::to_string(s), ln0);
    quantities.emplace_back("log_normalization_t1_" + std::to_string(s), ln1);
    for (std::size_t i = 0; i < n0; ++i) {
      const auto& ti = sub.first.tuple(p0.components[i][s]);
      const double gi = sub.log_g(ti);
      for (std::size_t j = 0; j < n1; ++j) {
        const auto& tj = sub.second.tuple(p1.components[j][s]);
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        log_y(ii, jj) += sub.log_g(tj) - gi + ln0 - ln1;
        de(ii, jj) += tj[0] - ti[0];
      }
    }
  }

  EnsembleModel m{kind,
                  std::move(p0.family),
                  std::move(p1.family),
                  std::move(p0.components),
                  std::move(p1.components),
                  std::move(state),
                  std::move(qm),
                  std::move(hyp),
                  std::move(log_y),
                  std::move(de),
                  0.0,
                  0.0,
                  0.0,
                  0.0,
                  std::move(quantities)};
  finalize(m);
  return m;
}

Subsystem canonical_subsystem(const HermitianOperator& h_t0, const HermitianOperator& h_t1,
                              double beta) {
  require_finite(beta, "beta");
  if (h_t0.dim() != h_t1.dim()) throw ShapeError("canonical subsystem: H(t0), H(t1) dims differ");
  return {joint_diagonalize({h_t0}), joint_diagonalize({h_t1}),
          [beta](std::span<const double> t) { return -beta * t[0]; }};
}

Subsystem microcanonical_subsystem(const MicrocanonicalConfig& cfg) {
  require_finite(cfg.energy, "energy");
  if (!(cfg.width > 0.0) || !std::isfinite(cfg.width)) {
    throw ValidationError("micro-canonical width must be positive");
  }
  if (cfg.h_t0.dim() != cfg.h_t1.dim()) throw ShapeError("micro-canonical: H dims differ");
  const double e = cfg.energy;
  const double w = cfg.width;
  const RVector ev = spectrum(cfg.h_t0);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double x = (e - ev(k)) / w;
    if (x * x > 700.0) {
      std::ostringstream msg;
      msg << "level " << ev(k) << " lies " << std::abs(x)
          << " widths from E; its weight exp(-x^2) underflows, so W(t0) cannot be formed "
             "reliably. Use a larger width";
      throw PreconditionError(msg.str());
    }
  }
  return {joint_diagonalize({cfg.h_t0}), joint_diagonalize({cfg.h_t1}),
          [e, w](std::span<const double> t) {
            const double x = (e - t[0]) / w;
            return -x * x;
          }};
}

Subsystem grand_canonical_subsystem(const GrandCanonicalConfig& cfg) {
  require_finite(cfg.beta, "beta");
  require_finite(cfg.mu, "mu");
  if (!(cfg.beta > 0.0)) throw ValidationError("grand canonical beta must be positive");
  if (cfg.h_t0.rows() != cfg.h_t1.rows()) throw ShapeError("grand canonical: mode counts differ");
  const int modes = static_cast<int>(cfg.h_t0.rows());
  const CMatrix n_op = number_operator(modes);
  auto lift = [&](const CMatrix& h, const char* when) {
    HermitianOperator one(h);
    HermitianOperator big(second_quantize(one.matrix()));
    const double c = max_abs(commutator(big.matrix(), n_op));
    if (c > 1e-11) {
      std::ostringstream msg;
      msg << "second-quantized H(" << when << ") does not conserve particle number (" << c << ")";
      throw PreconditionError(msg.str());
    }
    return big;
  };
  const HermitianOperator n_herm(n_op);
  const HermitianOperator h0 = lift(cfg.h_t0, "t0");
  const HermitianOperator h1 = lift(cfg.h_t1, "t1");
  const double beta = cfg.beta;
  const double mu = cfg.mu;
  return {joint_diagonalize({h0, n_herm}), joint_diagonalize({h1, n_herm}),
          [beta, mu](std::span<const double> t) { return beta * (mu * t[1] - t[0]); }};
}

EnsembleModel local_canonical_model(const LocalCanonicalConfig& cfg, const UnitaryEvolution& u) {
  const std::size_t n = cfg.betas.size();
  if (n == 0 || cfg.h_t0.size() != n || cfg.h_t1.size() != n) {
    throw ShapeError("local canonical: need one H(t0), H(t1) and beta per subsystem");
  }
  std::vector<Subsystem> subs;
  for (std::size_t s = 0; s < n; ++s) {
    if (!(cfg.betas[s] > 0.0)) {
      std::ostringstream msg;
      msg << "beta_" << s << " = " << cfg.betas[s] << " must be positive";
      throw ValidationError(msg.str());
    }
    subs.push_back(canonical_subsystem(cfg.h_t0[s], cfg.h_t1[s], cfg.betas[s]));
  }
  EnsembleModel m = local_composition(subs, u, "local_canonical");

  // exp(-sum_mu beta_mu (w_mu - dF_mu)) with F_mu from Tr exp(-beta_mu H_mu).
  m.log_y.setZero();
  m.quantities.clear();
  const JointModel& jm = m.qm.model;
  for (std::size_t s = 0; s < n; ++s) {
    const double b = cfg.betas[s];
    const double f0 = -log_partition(cfg.h_t0[s], b) / b;
    const double f1 = -log_partition(cfg.h_t1[s], b) / b;
    RMatrix w(m.log_y.rows(), m.log_y.cols());
    for (std::size_t i = 0; i < jm.n_first(); ++i) {
      const double ei = subs[s].first.tuple(m.first_components[i][s])[0];
      for (std::size_t j = 0; j < jm.n_second(); ++j) {
        const double ej = subs[s].second.tuple(m.second_components[j][s])[0];
        w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ej - ei;
      }
    }
    m.log_y.array() -= b * (w.array() - (f1 - f0));
    const std::string k = std::to_string(s);
    m.quantities.emplace_back("beta_" + k, b);
    m.quantities.emplace_back("F_t0_" + k, f0);
    m.quantities.emplace_back("F_t1_" + k, f1);
    m.quantities.emplace_back("delta_F_" + k, f1 - f0);
    m.quantities.emplace_back("mean_work_" + k, pair_mean(jm, w));
  }
  finalize(m);
  return m;
}

EnsembleModel microcanonical_model(const MicrocanonicalConfig& cfg, const UnitaryEvolution& u) {
  Subsystem sub = microcanonical_subsystem(cfg);
  EnsembleModel m = local_composition({sub}, u, "microcanonical");

  auto log_w = [&cfg](const HermitianOperator& h) {
    const RVector ev = spectrum(h);
    std::vector<double> x;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      const double z = (cfg.energy - ev(k)) / cfg.width;
      x.push_back(-z * z);
    }
    return log_sum_exp(x);
  };
  const double f0 = -log_w(cfg.h_t0);
  const double f1 = -log_w(cfg.h_t1);
  const JointModel& jm = m.qm.model;
  for (std::size_t i = 0; i < jm.n_first(); ++i) {
    const double xi = (cfg.energy - m.first.tuple(i)[0]) / cfg.width;
    for (std::size_t j = 0; j < jm.n_second(); ++j) {
      const double xj = (cfg.energy - m.second.tuple(j)[0]) / cfg.width;
      m.log_y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          -xj * xj + (f1 - f0) + xi * xi;
    }
  }
  m.quantities = {{"energy", cfg.energy},
                  {"width", cfg.width},
                  {"f_t0", f0},
                  {"f_t1", f1},
                  {"delta_f", f1 - f0},
                  {"mean_energy_change", pair_mean(jm, m.energy_change)}};
  finalize(m);
  return m;
}

double free_fermion_grand_potential(const CMatrix& h, double beta, double mu) {
  const HermitianOperator one(h);
  const RVector ev = spectrum(one);
  double s = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double x = beta * (mu - ev(k));
    // ln(1 + e^x) without overflow.
    s += x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return -s / beta;
}

EnsembleModel grand_canonical_model(const GrandCanonicalConfig& cfg, const UnitaryEvolution& u) {
  Subsystem sub = grand_canonical_subsystem(cfg);
  EnsembleModel m = local_composition({sub}, u, "grand_canonical");

  const double om0 = free_fermion_grand_potential(cfg.h_t0, cfg.beta, cfg.mu);
  const double om1 = free_fermion_grand_potential(cfg.h_t1, cfg.beta, cfg.mu);
  const JointModel& jm = m.qm.model;
  RMatrix dn(m.log_y.rows(), m.log_y.cols());
  for (std::size_t i = 0; i < jm.n_first(); ++i) {
    const auto& ti = m.first.tuple(i);
    for (std::size_t j = 0; j < jm.n_second(); ++j) {
      const auto& tj = m.second.tuple(j);
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      dn(ii, jj) = tj[1] - ti[1];
      m.log_y(ii, jj) = -cfg.beta * ((tj[0] - ti[0]) - cfg.mu * dn(ii, jj) - (om1 - om0));
    }
  }
  m.quantities = {{"beta", cfg.beta},
                  {"mu", cfg.mu},
                  {"Omega_t0", om0},
                  {"Omega_t1", om1},
                  {"delta_Omega", om1 - om0},
                  {"Omega_t0_trace", -m.state.log_normalization / cfg.beta},
                  {"mean_energy_change", pair_mean(jm, m.energy_change)},
                  {"mean_number_change", pair_mean(jm, dn)}};
  finalize(m);
  return m;
}

EnsembleModel periodic_thermo_model(const PeriodicThermoConfig& cfg, const UnitaryEvolution& u) {
  require_finite(cfg.theta, "theta");
  require_finite(cfg.beta, "beta");
  const std::size_t n = cfg.quasi_energies.size();
  if (n == 0) throw ShapeError("periodic thermodynamics: no quasi-energies");
  for (double e : cfg.quasi_energies) require_finite(e, "quasi-energy");
  CMatrix basis = cfg.system_basis.size() == 0
                      ? CMatrix(CMatrix::Identity(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n)))
                      : cfg.system_basis;
  if (basis.rows() != static_cast<Eigen::Index>(n) || basis.cols() != basis.rows()) {
    throw ShapeError("periodic thermodynamics: system basis must be n x n");
  }
  if (unitarity_defect(basis) > kUnitaryTolerance) {
    throw ValidationError("periodic thermodynamics: system basis is not unitary");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&cfg](std::size_t a, std::size_t b) {
    return cfg.quasi_energies[a] < cfg.quasi_energies[b];
  });
  double scale = 1.0;
  for (double e : cfg.quasi_energies) scale = std::max(scale, std::abs(e));
  const double tol = 1e-9 * scale;
  std::vector<CMatrix> bases;
  std::vector<std::vector<double>> tuples;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = order[r];
    if (r > 0 && cfg.quasi_energies[k] - tuples.back()[0] <= tol) {
      throw ValidationError(
          "periodic thermodynamics: quasi-energies must be pairwise distinct (rank-1 "
          "projections)");
    }
    bases.push_back(basis.col(static_cast<Eigen::Index>(k)));
    tuples.push_back({cfg.quasi_energies[k]});
  }
  RVector eps(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) eps(static_cast<Eigen::Index>(k)) = cfg.quasi_energies[k];
  const HermitianOperator h1(basis * eps.cast<cplx>().asDiagonal() * basis.adjoint(), 1e-10);
  const SpectralFamily sys({h1}, bases, tuples, {tol});

  const double theta = cfg.theta;
  const double beta = cfg.beta;
  const SpectralFamily bath = joint_diagonalize({cfg.bath_hamiltonian});
  std::vector<Subsystem> subs{
      {sys, sys, [theta](std::span<const double> t) { return -theta * t[0]; }},
      {bath, bath, [beta](std::span<const double> t) { return -beta * t[0]; }}};
  const double log_z1 = log_normalization(sys, subs[0].log_g);
  if (!std::isfinite(log_z1)) {
    throw ValidationError("periodic thermodynamics: quasi-partition function Z_1 is not finite");
  }
  EnsembleModel m = local_composition(subs, u, "periodic_thermo");

  // Both partition functions are time-independent: exp(-theta e - beta q).
  const JointModel& jm = m.qm.model;
  RMatrix e(m.log_y.rows(), m.log_y.cols());
  RMatrix q(m.log_y.rows(), m.log_y.cols());
  for (std::size_t i = 0; i < jm.n_first(); ++i) {
    const auto& ti = m.first.tuple(i);
    for (std::size_t j = 0; j < jm.n_second(); ++j) {
      const auto& tj = m.second.tuple(j);
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      e(ii, jj) = tj[0] - ti[0];
      q(ii, jj) = tj[1] - ti[1];
      m.log_y(ii, jj) = -theta * e(ii, jj) - beta * q(ii, jj);
    }
  }
  m.quantities = {{"theta", theta},
                  {"beta", beta},
                  {"log_Z1", log_z1},
                  {"log_Z2", log_normalization(bath, subs[1].log_g)},
                  {"mean_quasi_energy_change", pair_mean(jm, e)},
                  {"mean_heat", pair_mean(jm, q)}};
  finalize(m);
  return m;
}

SecondLawReport second_law_report(const EnsembleModel& m, double tol) {
  SecondLawReport r;
  r.tolerance = tol;
  if (m.kind == "local_canonical") {
    r.jensen_label = "sum_mu beta_mu (<w_mu> - dF_mu)";
  } else if (m.kind == "microcanonical") {
    r.jensen_label = "<((E - E_j)/width)^2 - df - ((E - E_i)/width)^2>";
  } else if (m.kind == "grand_canonical") {
    r.jensen_label = "beta (<dE> - mu <dN> - dOmega)";
  } else if (m.kind == "periodic_thermo") {
    r.jensen_label = "theta <e> + beta <q>";
  } else {
    r.jensen_label = "-<ln Y>";
  }
  r.jensen_lhs = m.jensen_lhs;
  r.jensen_ok = m.jensen_lhs >= -tol;
  r.entropy_gap = entropy_gap(m.qm.model);
  r.entropy_gap_ok = r.entropy_gap >= -tol;
  return r;
}

std::vector<double> rabi_quasi_energies(double omega0, double omega, double rabi) {
  require_finite(omega0, "omega0");
  require_finite(omega, "omega");
  require_finite(rabi, "rabi");
  CMatrix h(2, 2);
  const double detuning = omega0 - omega;
  h << 0.5 * detuning, 0.5 * rabi, 0.5 * rabi, -0.5 * detuning;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return {0.5 * omega + es.eigenvalues()(0), 0.5 * omega + es.eigenvalues()(1)};
}

}  // namespace seqmeas
