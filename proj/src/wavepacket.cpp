#include "seqmeas/wavepacket.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "seqmeas/errors.hpp"
#include "wavepacket_detail.hpp"

namespace seqmeas {

using std::numbers::pi;

namespace detail {

// Direct evaluation below this |a|; the split form is used above.
constexpr double kSplitThreshold = 0.35;

ErfiPiece erfi_piece(int k, int d, double t) {
  const double a = (2.0 * pi * k * t - d) / (2.0 * std::sqrt(t));
  ErfiPiece out;
  if (std::abs(a) < kSplitThreshold) {
    const double phi = 2.0 * pi * pi * t * static_cast<double>(k) * k;
    out.sign = 0;
    out.rem = std::polar(1.0, -phi) * complex_erfi(cplx(a, a));
    return out;
  }
  const auto parts = diagonal_erfi_parts(a);
  out.sign = parts.sign > 0 ? 1 : -1;
  const double dd = static_cast<double>(d) * d;
  out.rem = std::polar(1.0, dd / (2.0 * t)) * parts.oscillatory;
  return out;
}

cplx combine_y(int k, double t, const ErfiPiece& at, const ErfiPiece& below,
               const ErfiPiece& above) {
  const int c = -2 * at.sign + below.sign + above.sign;
  cplx out = -2.0 * at.rem + below.rem + above.rem;
  if (c != 0) {
    const double phi = 2.0 * pi * pi * t * static_cast<double>(k) * k;
    out += cplx(0.0, c) * std::polar(1.0, -phi);
  }
  return out;
}

cplx combine_z(int n, int delta, double t, const ErfiPiece& at, const ErfiPiece& below,
               const ErfiPiece& above) {
  const double s = 2.0 * pi * n * t - delta;
  const double c0 = -2.0 * s;
  const double c1 = s + 1.0;
  const double c2 = s - 1.0;
  cplx b = c0 * at.rem + c1 * below.rem + c2 * above.rem;
  const bool cancels = at.sign != 0 && at.sign == below.sign && at.sign == above.sign;
  if (!cancels) {
    const double kc = c0 * at.sign + c1 * below.sign + c2 * above.sign;
    if (kc != 0.0) {
      const double phi = 2.0 * pi * pi * t * static_cast<double>(n) * n;
      b += cplx(0.0, kc) * std::polar(1.0, -phi);
    }
  }
  b *= cplx(0.0, -std::sqrt(pi));
  const double d0 = static_cast<double>(delta);
  const cplx a = cplx(1.0, 1.0) * std::sqrt(t) *
                 (std::polar(1.0, (d0 + 1.0) * (d0 + 1.0) / (2.0 * t)) -
                  2.0 * std::polar(1.0, d0 * d0 / (2.0 * t)) +
                  std::polar(1.0, (d0 - 1.0) * (d0 - 1.0) / (2.0 * t)));
  return (a + b) / (2.0 * std::sqrt(pi));
}

}  // namespace detail

void WavepacketConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be positive");
  if (window.n_x < 0 || window.n_p < 0) throw ValidationError("window sizes must be >= 0");
  if (!(mass_tolerance >= 0.0)) throw ValidationError("mass_tolerance must be >= 0");
  if (mu_margin < 0) throw ValidationError("mu_margin must be >= 0");
  if (chunk < 1) throw ValidationError("chunk must be >= 1");
}

cplx first_amplitude(int nu, int n, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  // exp(-y^2) erf(x + i y) with y = sqrt(2) pi n sigma, written through w so
  // that nothing overflows for large |n|.
  const double y = std::numbers::sqrt2 * pi * n * sigma;
  const double ey = std::exp(-y * y);
  auto scaled_erf = [&](double x) {
    const double s = x < 0.0 ? -1.0 : 1.0;
    const cplx w = faddeeva_w(cplx(-s * y, std::abs(x)));
    return s * ey - s * std::polar(std::exp(-x * x), -2.0 * x * y) * w;
  };
  const double x0 = nu / (std::numbers::sqrt2 * sigma);
  const double x1 = (nu + 1) / (std::numbers::sqrt2 * sigma);
  const double pre = std::pow(pi, 0.25) * std::sqrt(sigma) / std::numbers::sqrt2;
  return pre * (scaled_erf(x1) - scaled_erf(x0));
}

double cell_mass(int nu, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  const double a = nu / sigma;
  const double b = (nu + 1) / sigma;
  if (a >= 0.0) return 0.5 * (std::erfc(a) - std::erfc(b));
  if (b <= 0.0) return 0.5 * (std::erfc(-b) - std::erfc(-a));
  return 0.5 * (std::erf(b) - std::erf(a));
}

double entropy_nats(const RMatrix& p) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double v = p(r, c);
      if (v > 0.0) s -= v * std::log(v);
    }
  }
  return s;
}

FirstDistribution first_distribution(double sigma, WavepacketWindow window) {
  if (window.n_x < 0 || window.n_p < 0) throw ValidationError("window sizes must be >= 0");
  FirstDistribution out;
  out.window = window;
  out.p.resize(2 * window.n_x + 1, 2 * window.n_p + 1);
  for (int nu = -window.n_x; nu <= window.n_x; ++nu) {
    for (int n = -window.n_p; n <= window.n_p; ++n) {
      out.p(nu + window.n_x, n + window.n_p) = std::norm(first_amplitude(nu, n, sigma));
    }
  }
  out.mass = out.p.sum();
  out.deficit = 1.0 - out.mass;
  out.entropy = entropy_nats(out.p);
  return out;
}

cplx evolved_cell_state(int nu, int n, double t, double x) {
  if (t < 0.0) throw ValidationError("t must be >= 0");
  if (t == 0.0) {
    if (x < nu || x >= nu + 1) return 0.0;
    return std::polar(1.0, 2.0 * pi * n * x);
  }
  const double shift = 2.0 * pi * n * t - x;
  const double scale = 2.0 * std::sqrt(t);
  const cplx diff = diagonal_erfi((nu + shift) / scale) - diagonal_erfi((nu + 1 + shift) / scale);
  const double phase = -2.0 * pi * pi * static_cast<double>(n) * n * t + 2.0 * pi * n * x;
  return cplx(0.0, 0.5) * std::polar(1.0, phase) * diff;
}

cplx conditional_amplitude(int mu, int m, int nu, int n, double t) {
  if (!(t > 0.0)) throw ValidationError("conditional amplitude needs t > 0");
  const int delta = mu - nu;
  if (m == n) {
    return detail::combine_z(n, delta, t, detail::erfi_piece(n, delta, t),
                             detail::erfi_piece(n, delta - 1, t),
                             detail::erfi_piece(n, delta + 1, t));
  }
  auto y = [&](int k) {
    return detail::combine_y(k, t, detail::erfi_piece(k, delta, t),
                             detail::erfi_piece(k, delta - 1, t),
                             detail::erfi_piece(k, delta + 1, t));
  };
  return (y(m) - y(n)) / (4.0 * pi * (m - n));
}

double conditional_probability(int mu, int m, int nu, int n, double t) {
  return std::norm(conditional_amplitude(mu, m, nu, n, t));
}

ConditionalTables::ConditionalTables(double t, int n_p, int delta_min, int delta_max)
    : t_(t), n_p_(n_p), delta_min_(delta_min), delta_max_(delta_max) {
  if (!(t > 0.0)) throw ValidationError("conditional tables need t > 0");
  if (n_p < 0) throw ValidationError("n_p must be >= 0");
  if (delta_max < delta_min) throw ValidationError("empty delta range");
  const int nk = 2 * n_p + 1;
  const int nd = delta_max - delta_min + 1;
  // Pieces for d in [delta_min - 1, delta_max + 1].
  std::vector<detail::ErfiPiece> pieces(static_cast<std::size_t>(nk) * (nd + 2));
  auto piece = [&](int ki, int di) -> detail::ErfiPiece& {
    return pieces[static_cast<std::size_t>(di) * nk + ki];
  };
#pragma omp parallel for schedule(static)
  for (int di = 0; di < nd + 2; ++di) {
    for (int ki = 0; ki < nk; ++ki) {
      piece(ki, di) = detail::erfi_piece(ki - n_p, delta_min - 1 + di, t);
    }
  }
  y_.resize(nk, nd);
  z_.resize(nk, nd);
#pragma omp parallel for schedule(static)
  for (int di = 0; di < nd; ++di) {
    const int delta = delta_min + di;
    for (int ki = 0; ki < nk; ++ki) {
      const int k = ki - n_p;
      const auto& at = piece(ki, di + 1);
      const auto& below = piece(ki, di);
      const auto& above = piece(ki, di + 2);
      y_(ki, di) = detail::combine_y(k, t, at, below, above);
      z_(ki, di) = std::norm(detail::combine_z(k, delta, t, at, below, above));
    }
  }
}

double ConditionalTables::probability(int m, int n, int delta) const {
  if (m == n) return z(n, delta);
  return std::norm(y(m, delta) - y(n, delta)) * detail::offdiagonal_weight(m - n);
}

int mu_window(const WavepacketConfig& cfg) {
  return cfg.window.n_x +
         static_cast<int>(std::ceil(2.0 * pi * cfg.window.n_p * cfg.t)) + cfg.mu_margin;
}

SecondMarginal second_marginal(const WavepacketConfig& cfg, const FirstDistribution& first,
                               MarginalKernel kernel) {
  cfg.validate();
  if (first.window.n_x != cfg.window.n_x || first.window.n_p != cfg.window.n_p) {
    throw ValidationError("first distribution window differs from the configuration");
  }
  const int n_x = cfg.window.n_x;
  const int mu_max = mu_window(cfg);
  const ConditionalTables tables(cfg.t, cfg.window.n_p, -mu_max - n_x, mu_max + n_x);
  const RMatrix acc = kernel == MarginalKernel::reference
                          ? second_marginal_reference(first.p, tables, n_x, mu_max)
                          : second_marginal_blocked(first.p, tables, n_x, mu_max, cfg.chunk);
  SecondMarginal out;
  out.mu_max = mu_max;
  out.n_p = cfg.window.n_p;
  out.phat = acc.transpose();
  out.mass = out.phat.sum();
  out.deficit = 1.0 - out.mass;
  out.leakage = first.mass - out.mass;
  out.entropy = entropy_nats(out.phat);
  out.flagged = out.deficit > cfg.mass_tolerance;
  return out;
}

SecondMarginal second_marginal(const WavepacketConfig& cfg, MarginalKernel kernel) {
  cfg.validate();
  return second_marginal(cfg, first_distribution(cfg.sigma, cfg.window), kernel);
}

std::vector<double> default_t_grid(int points) {
  if (points < 1) throw ValidationError("t grid needs at least one point");
  std::vector<double> grid;
  if (points == 1) return {1e-4};
  for (int i = 0; i < points; ++i) {
    grid.push_back(std::pow(10.0, -4.0 + 3.0 * i / (points - 1)));
  }
  return grid;
}

std::vector<EntropyCurveRow> entropy_curve(const WavepacketConfig& base,
                                           const std::vector<double>& t_grid) {
  base.validate();
  const FirstDistribution first = first_distribution(base.sigma, base.window);
  std::vector<EntropyCurveRow> rows;
  for (double t : t_grid) {
    WavepacketConfig cfg = base;
    cfg.t = t;
    const SecondMarginal sm = second_marginal(cfg, first);
    EntropyCurveRow row;
    row.t = t;
    row.s_p = first.entropy;
    row.s_phat = sm.entropy;
    row.mass_deficit_p = first.deficit;
    row.mass_deficit_phat = sm.deficit;
    row.n_x = base.window.n_x;
    row.n_p = base.window.n_p;
    row.mu_max = sm.mu_max;
    row.flagged = sm.flagged || first.deficit > base.mass_tolerance;
    rows.push_back(row);
  }
  return rows;
}

AsymmetryPair asymmetry_pair(double t) {
  return {conditional_probability(1, 1, 0, 0, t), conditional_probability(0, 0, 1, 1, t)};
}

}  // namespace seqmeas
