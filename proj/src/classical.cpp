#include "seqmeas/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

#include "seqmeas/errors.hpp"

namespace seqmeas {
namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
}

void check_omega(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ValidationError("harmonic frequency must be positive (non-integrable otherwise)");
  }
}

std::uint64_t chain_size(std::uint64_t n, int chains, int c) {
  const auto k = static_cast<std::uint64_t>(chains);
  return n / k + (static_cast<std::uint64_t>(c) < n % k ? 1 : 0);
}

// Running mean and sum of squared deviations (Welford), merged with Chan's rule.
struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
    sum += x;
    sum_sq += x * x;
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    mean += d * nb / (na + nb);
    m2 += o.m2 + d * d * na * nb / (na + nb);
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
};

}  // namespace

PhaseSpaceDensity canonical_density(const PhaseFunction& h, double beta, int dim,
                                    PhaseSampler sampler, double log_z) {
  check_beta(beta);
  if (dim <= 0 || dim % 2 != 0) throw ValidationError("phase space dimension must be even");
  if (!std::isfinite(log_z)) throw ValidationError("partition function must be finite");
  if (!h || !sampler) throw ValidationError("canonical density needs H and a sampler");
  PhaseSpaceDensity d;
  d.dim = dim;
  d.log_density = [h, beta, log_z](std::span<const double> x) { return -beta * h(x) - log_z; };
  d.sampler = std::move(sampler);
  d.log_normalization = log_z;
  d.name = "canonical";
  return d;
}

PhaseFunction harmonic_hamiltonian(double omega) {
  check_omega(omega);
  return [omega](std::span<const double> x) {
    return 0.5 * x[1] * x[1] + 0.5 * omega * omega * x[0] * x[0];
  };
}

PhaseSpaceDensity harmonic_canonical(double omega, double beta) {
  check_beta(beta);
  check_omega(omega);
  const double sq = 1.0 / (omega * std::sqrt(beta));
  const double sp = 1.0 / std::sqrt(beta);
  PhaseSampler sampler = [sq, sp](Rng& rng, std::span<double> x) {
    std::normal_distribution<double> nd(0.0, 1.0);
    x[0] = sq * nd(rng);
    x[1] = sp * nd(rng);
  };
  auto d = canonical_density(harmonic_hamiltonian(omega), beta, 2, std::move(sampler),
                             std::log(2.0 * std::numbers::pi / (beta * omega)));
  d.name = "harmonic canonical";
  return d;
}

VolumePreservingMap identity_map(int dim) {
  return {dim, [](std::span<double>) {}, "identity"};
}

VolumePreservingMap harmonic_rotation(double omega, double duration) {
  check_omega(omega);
  const double c = std::cos(omega * duration);
  const double s = std::sin(omega * duration);
  return {2,
          [omega, c, s](std::span<double> x) {
            const double q = x[0];
            const double p = x[1];
            x[0] = c * q + s * p / omega;
            x[1] = -omega * s * q + c * p;
          },
          "exact rotation"};
}

VolumePreservingMap leapfrog_map(const SeparableProtocol& h, double dt, int steps) {
  if (!(dt > 0.0) || steps < 0) throw ValidationError("leapfrog needs dt > 0 and steps >= 0");
  if (h.dofs <= 0 || !h.grad_v) throw ValidationError("protocol needs dofs and grad_v");
  const int n = h.dofs;
  auto grad_v = h.grad_v;
  return {2 * n,
          [grad_v, n, dt, steps](std::span<double> x) {
            std::span<double> q = x.subspan(0, static_cast<std::size_t>(n));
            std::span<double> p = x.subspan(static_cast<std::size_t>(n));
            std::vector<double> g(static_cast<std::size_t>(n));
            for (int k = 0; k < steps; ++k) {
              const double t0 = k * dt;
              grad_v(q, t0, g);
              for (int i = 0; i < n; ++i) p[i] -= 0.5 * dt * g[i];
              for (int i = 0; i < n; ++i) q[i] += dt * p[i];
              grad_v(q, t0 + dt, g);
              for (int i = 0; i < n; ++i) p[i] -= 0.5 * dt * g[i];
            }
          },
          "leapfrog composition"};
}

SeparableProtocol harmonic_ramp(double omega0, double omega1, double duration) {
  check_omega(omega0);
  check_omega(omega1);
  if (!(duration > 0.0)) throw ValidationError("ramp duration must be positive");
  auto w2 = [=](double t) {
    const double s = std::clamp(t / duration, 0.0, 1.0);
    return omega0 * omega0 + (omega1 * omega1 - omega0 * omega0) * s;
  };
  SeparableProtocol h;
  h.dofs = 1;
  h.grad_v = [w2](std::span<const double> q, double t, std::span<double> g) {
    g[0] = w2(t) * q[0];
  };
  h.potential = [w2](std::span<const double> q, double t) { return 0.5 * w2(t) * q[0] * q[0]; };
  return h;
}

SeparableProtocol static_harmonic(double omega) {
  check_omega(omega);
  SeparableProtocol h;
  h.dofs = 1;
  h.grad_v = [omega](std::span<const double> q, double, std::span<double> g) {
    g[0] = omega * omega * q[0];
  };
  h.potential = [omega](std::span<const double> q, double) {
    return 0.5 * omega * omega * q[0] * q[0];
  };
  return h;
}

double jacobian_defect(const VolumePreservingMap& u, Rng& rng, int points, double scale,
                       double step) {
  const int d = u.dim;
  std::normal_distribution<double> nd(0.0, scale);
  double worst = 0.0;
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> plus(x.size());
  std::vector<double> minus(x.size());
  for (int k = 0; k < points; ++k) {
    for (auto& v : x) v = nd(rng);
    RMatrix jac(d, d);
    for (int c = 0; c < d; ++c) {
      plus = x;
      minus = x;
      plus[static_cast<std::size_t>(c)] += step;
      minus[static_cast<std::size_t>(c)] -= step;
      u.forward(plus);
      u.forward(minus);
      for (int r = 0; r < d; ++r) {
        jac(r, c) = (plus[static_cast<std::size_t>(r)] - minus[static_cast<std::size_t>(r)]) /
                    (2.0 * step);
      }
    }
    worst = std::max(worst, std::abs(jac.determinant() - 1.0));
  }
  return worst;
}

EstimatorResult classical_j_expectation(const PhaseSpaceDensity& p, const PhaseSpaceDensity& q,
                                        const VolumePreservingMap& u, std::uint64_t n,
                                        std::uint64_t seed, const EstimatorOptions& opts) {
  if (p.dim != q.dim || p.dim != u.dim) throw ShapeError("densities and map differ in dimension");
  if (n == 0) throw ValidationError("need at least one sample");
  if (opts.chains < 1) throw ValidationError("need at least one chain");
  std::vector<Moments> moments(static_cast<std::size_t>(opts.chains));
  std::vector<std::uint64_t> nonfinite(moments.size(), 0);

#pragma omp parallel for schedule(static, 1)
  for (int c = 0; c < opts.chains; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    std::vector<double> x(static_cast<std::size_t>(p.dim));
    std::vector<double> y(x.size());
    auto& mom = moments[static_cast<std::size_t>(c)];
    const std::uint64_t m = chain_size(n, opts.chains, c);
    for (std::uint64_t k = 0; k < m; ++k) {
      p.sampler(rng, x);
      y = x;
      u.forward(y);
      const double r = std::exp(q.log_density(y) - p.log_density(x));
      if (!std::isfinite(r)) {
        ++nonfinite[static_cast<std::size_t>(c)];
        continue;
      }
      mom.add(r);
    }
  }

  Moments all;
  std::uint64_t bad = 0;
  for (std::size_t c = 0; c < moments.size(); ++c) {
    all.merge(moments[c]);
    bad += nonfinite[c];
  }
  if (static_cast<double>(bad) > opts.max_nonfinite_fraction * static_cast<double>(n)) {
    throw PreconditionError("non-finite q/p ratio in " + std::to_string(bad) + " of " +
                            std::to_string(n) + " samples");
  }
  EstimatorResult out;
  out.mean = all.mean;
  out.n_samples = all.n;
  out.seed = seed;
  out.n_nonfinite = bad;
  const double nn = static_cast<double>(all.n);
  out.std_error = all.n > 1 ? std::sqrt(all.m2 / (nn - 1.0) / nn) : 0.0;
  out.effective_sample_size = all.sum_sq > 0.0 ? all.sum * all.sum / all.sum_sq : 0.0;
  return out;
}

std::vector<double> work_samples(const PhaseSpaceDensity& p, const PhaseFunction& h0,
                                 const PhaseFunction& h1, const VolumePreservingMap& u,
                                 std::uint64_t n, std::uint64_t seed, int chains) {
  if (p.dim != u.dim) throw ShapeError("density and map differ in dimension");
  if (chains < 1) throw ValidationError("need at least one chain");
  std::vector<std::vector<double>> parts(static_cast<std::size_t>(chains));
#pragma omp parallel for schedule(static, 1)
  for (int c = 0; c < chains; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    std::vector<double> x(static_cast<std::size_t>(p.dim));
    std::vector<double> y(x.size());
    const std::uint64_t m = chain_size(n, chains, c);
    auto& out = parts[static_cast<std::size_t>(c)];
    out.reserve(m);
    for (std::uint64_t k = 0; k < m; ++k) {
      p.sampler(rng, x);
      y = x;
      u.forward(y);
      out.push_back(h1(y) - h0(x));
    }
  }
  std::vector<double> all;
  all.reserve(n);
  for (const auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  return all;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw ValidationError("quadrature needs at least one node");
  RMatrix jacobi = RMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(jacobi);
  QuadratureRule rule;
  for (int k = 0; k < n; ++k) {
    rule.nodes.push_back(es.eigenvalues()(k));
    const double v = es.eigenvectors()(0, k);
    rule.weights.push_back(std::sqrt(std::numbers::pi) * v * v);
  }
  return rule;
}

double gaussian_expectation(const PhaseFunction& f, const std::vector<double>& stddev, int n) {
  const auto rule = gauss_hermite(n);
  const std::size_t d = stddev.size();
  if (d == 0) throw ValidationError("need at least one dimension");
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  double acc = 0.0;
  const double norm = std::pow(std::numbers::pi, -0.5 * static_cast<double>(d));
  for (;;) {
    double w = norm;
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = std::numbers::sqrt2 * stddev[k] * rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    acc += w * f(x);
    std::size_t k = 0;
    while (k < d && ++idx[k] == rule.nodes.size()) idx[k++] = 0;
    if (k == d) break;
  }
  return acc;
}

double harmonic_quench_quadrature(double beta, double omega0, double omega1, int nodes) {
  check_beta(beta);
  check_omega(omega0);
  check_omega(omega1);
  const auto h0 = harmonic_hamiltonian(omega0);
  const auto h1 = harmonic_hamiltonian(omega1);
  // Sample positions at the wider of the two widths so the reweighted
  // integrand decays; an expanding quench otherwise grows like exp(a q^2).
  const double omega_min = std::min(omega0, omega1);
  const PhaseFunction f = [&](std::span<const double> x) {
    const double reweight =
        omega0 / omega_min * std::exp(-0.5 * beta * (omega0 * omega0 - omega_min * omega_min) * x[0] * x[0]);
    return reweight * std::exp(-beta * (h1(x) - h0(x)));
  };
  return gaussian_expectation(f, {1.0 / (omega_min * std::sqrt(beta)), 1.0 / std::sqrt(beta)},
                              nodes);
}

double harmonic_quench_work_cdf(double w, double beta, double omega0, double omega1) {
  check_beta(beta);
  check_omega(omega0);
  check_omega(omega1);
  // W = c X with X chi-squared with one degree of freedom.
  const double c = (omega1 * omega1 - omega0 * omega0) / (2.0 * beta * omega0 * omega0);
  if (c == 0.0) return w >= 0.0 ? 1.0 : 0.0;
  const boost::math::chi_squared chi(1.0);
  const double x = w / c;
  if (c > 0.0) return x <= 0.0 ? 0.0 : boost::math::cdf(chi, x);
  return x <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, x));
}

ClassicalCrooksReport classical_crooks(const ClassicalCrooksSetup& setup, std::uint64_t n,
                                       std::uint64_t seed, int bins, std::uint64_t min_count) {
  check_beta(setup.beta);
  if (bins < 1) throw ValidationError("need at least one bin");
  const auto wf = work_samples(setup.forward_initial, setup.h_initial, setup.h_final,
                               setup.forward, n, seed);
  auto wr = work_samples(setup.reverse_initial, setup.h_final, setup.h_initial, setup.reverse,
                         n, splitmix64(seed ^ 0x7265766572736521ULL));
  for (auto& w : wr) w = -w;

  ClassicalCrooksReport rep;
  rep.beta = setup.beta;
  rep.delta_f = setup.delta_f;
  const auto [fmin, fmax] = std::minmax_element(wf.begin(), wf.end());
  const auto [rmin, rmax] = std::minmax_element(wr.begin(), wr.end());
  double lo = std::max(*fmin, *rmin);
  double hi = std::min(*fmax, *rmax);
  if (!(hi > lo)) {
    // Degenerate work (e.g. identity maps with q = p): one bin around the value.
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<std::uint64_t> cf(static_cast<std::size_t>(bins), 0);
  std::vector<std::uint64_t> cr(cf.size(), 0);
  auto bin_of = [&](double w) -> long {
    if (w < lo || w > hi) return -1;
    return std::min<long>(bins - 1, static_cast<long>((w - lo) / width));
  };
  for (double w : wf) {
    const long b = bin_of(w);
    if (b >= 0) ++cf[static_cast<std::size_t>(b)];
  }
  for (double w : wr) {
    const long b = bin_of(w);
    if (b >= 0) ++cr[static_cast<std::size_t>(b)];
  }
  const double nf = static_cast<double>(wf.size());
  const double nr = static_cast<double>(wr.size());
  rep.ok = true;
  for (int b = 0; b < bins; ++b) {
    CrooksBin bin;
    bin.lo = lo + b * width;
    bin.hi = lo + (b + 1) * width;
    bin.count_forward = cf[static_cast<std::size_t>(b)];
    bin.count_reverse = cr[static_cast<std::size_t>(b)];
    bin.expected = setup.beta * (0.5 * (bin.lo + bin.hi) - setup.delta_f);
    bin.used = bin.count_forward >= min_count && bin.count_reverse >= min_count;
    if (bin.used) {
      const double a = static_cast<double>(bin.count_forward);
      const double r = static_cast<double>(bin.count_reverse);
      bin.log_ratio = std::log((a / nf) / (r / nr));
      bin.tolerance = 0.5 * setup.beta * width + 3.0 * std::sqrt(1.0 / a + 1.0 / r);
      const double excess = std::abs(bin.log_ratio - bin.expected) - bin.tolerance;
      bin.ok = excess <= 0.0;
      rep.max_excess = rep.used_bins == 0 ? excess : std::max(rep.max_excess, excess);
      ++rep.used_bins;
      rep.ok = rep.ok && bin.ok;
    }
    rep.bins.push_back(bin);
  }
  rep.ok = rep.ok && rep.used_bins > 0;
  return rep;
}

ClassicalCrooksSetup harmonic_quench_setup(double beta, double omega0, double omega1) {
  ClassicalCrooksSetup s{harmonic_canonical(omega0, beta),
                         harmonic_canonical(omega1, beta),
                         harmonic_hamiltonian(omega0),
                         harmonic_hamiltonian(omega1),
                         identity_map(2),
                         identity_map(2),
                         beta,
                         std::log(omega1 / omega0) / beta};
  return s;
}

ChiSquareResult harmonic_quench_chi_square(const std::vector<double>& work, double beta,
                                           double omega0, double omega1, int bins) {
  if (bins < 2) throw ValidationError("chi-square test needs at least two bins");
  if (work.empty()) throw ValidationError("no work samples");
  const double c = (omega1 * omega1 - omega0 * omega0) / (2.0 * beta * omega0 * omega0);
  if (c == 0.0) throw PreconditionError("no quench: work is identically zero");
  const boost::math::chi_squared chi(1.0);
  std::vector<double> edges;
  for (int b = 1; b < bins; ++b) {
    edges.push_back(boost::math::quantile(chi, static_cast<double>(b) / bins));
  }
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double w : work) {
    const double x = w / c;
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    counts[static_cast<std::size_t>(it - edges.begin())] += 1.0;
  }
  const double expected = static_cast<double>(work.size()) / bins;
  ChiSquareResult res;
  for (double o : counts) res.statistic += (o - expected) * (o - expected) / expected;
  res.dof = bins - 1;
  res.p_value = boost::math::cdf(
      boost::math::complement(boost::math::chi_squared(res.dof), res.statistic));
  return res;
}

}  // namespace seqmeas
