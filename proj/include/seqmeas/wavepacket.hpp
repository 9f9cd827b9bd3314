#pragma once

// Free particle on the line (units with cell width, mass and hbar equal to
// one) measured twice in the discretized position-momentum basis
//   <x|nu, n> = 1_[nu, nu+1)(x) exp(2 pi i n x),
// prepared in a centered Gaussian of width sigma.

#include <vector>

#include "seqmeas/faddeeva.hpp"
#include "seqmeas/linalg.hpp"

namespace seqmeas {

struct WavepacketWindow {
  int n_x = 8;    // nu in [-n_x, n_x]
  int n_p = 512;  // n, m in [-n_p, n_p]
};

struct WavepacketConfig {
  double sigma = 1.0;
  double t = 0.1;
  WavepacketWindow window;
  double mass_tolerance = 1e-4;
  int mu_margin = 4;  // extra position cells beyond the ballistic spread
  int chunk = 32;     // mu rows per parallel work item

  void validate() const;
};

// <nu, n|psi> for psi(x) = pi^{-1/4} sigma^{-1/2} exp(-x^2 / (2 sigma^2)).
cplx first_amplitude(int nu, int n, double sigma);

// Integral of |psi|^2 over [nu, nu+1); equals sum_n |<nu, n|psi>|^2.
double cell_mass(int nu, double sigma);

struct FirstDistribution {
  WavepacketWindow window;
  RMatrix p;  // rows nu + n_x, columns n + n_p
  double mass = 0.0;
  double deficit = 0.0;  // 1 - mass
  double entropy = 0.0;  // natural log, over the window

  double at(int nu, int n) const { return p(nu + window.n_x, n + window.n_p); }
};

FirstDistribution first_distribution(double sigma, WavepacketWindow window);

// <x|nu, n, t>: the cell state after free evolution for time t. For t = 0
// the initial cell state is returned (zero outside [nu, nu+1)).
cplx evolved_cell_state(int nu, int n, double t, double x);

// <mu, m|exp(-i t p^2/2)|nu, n> from the closed forms; t > 0.
cplx conditional_amplitude(int mu, int m, int nu, int n, double t);
double conditional_probability(int mu, int m, int nu, int n, double t);

// Amplitude pieces on a (k, delta = mu - nu) grid. For m != n the
// conditional probability is |Y_m - Y_n|^2 / (16 pi^2 (m - n)^2); for m = n
// it is Z_n.
class ConditionalTables {
 public:
  ConditionalTables(double t, int n_p, int delta_min, int delta_max);

  double t() const { return t_; }
  int n_p() const { return n_p_; }
  int delta_min() const { return delta_min_; }
  int delta_max() const { return delta_max_; }

  cplx y(int k, int delta) const { return y_(k + n_p_, delta - delta_min_); }
  double z(int k, int delta) const { return z_(k + n_p_, delta - delta_min_); }
  const CMatrix& y_table() const { return y_; }
  const RMatrix& z_table() const { return z_; }

  double probability(int m, int n, int delta) const;

 private:
  double t_;
  int n_p_;
  int delta_min_;
  int delta_max_;
  CMatrix y_;  // rows k + n_p, columns delta - delta_min
  RMatrix z_;
};

int mu_window(const WavepacketConfig& cfg);

// p_hat^T accumulation kernels. `p` is the first distribution (rows nu,
// columns n); the result has rows m + n_p and columns mu + mu_max.
// Plain quadruple loop in fixed order.
RMatrix second_marginal_reference(const RMatrix& p, const ConditionalTables& tables, int n_x,
                                  int mu_max);
// Per delta, T_delta(m, n) times a block of p^T via gemm; OpenMP over
// chunks of mu rows, each accumulated in ascending delta. Bitwise identical
// for any thread count.
RMatrix second_marginal_blocked(const RMatrix& p, const ConditionalTables& tables, int n_x,
                                int mu_max, int chunk = 32);

enum class MarginalKernel { reference, blocked };

struct SecondMarginal {
  int mu_max = 0;
  int n_p = 0;
  RMatrix phat;          // rows mu + mu_max, columns m + n_p
  double mass = 0.0;
  double deficit = 0.0;  // 1 - mass
  double leakage = 0.0;  // sum p - sum p_hat
  double entropy = 0.0;
  bool flagged = false;  // deficit above mass_tolerance

  double at(int mu, int m) const { return phat(mu + mu_max, m + n_p); }
};

SecondMarginal second_marginal(const WavepacketConfig& cfg, const FirstDistribution& first,
                               MarginalKernel kernel = MarginalKernel::blocked);
SecondMarginal second_marginal(const WavepacketConfig& cfg,
                               MarginalKernel kernel = MarginalKernel::blocked);

struct EntropyCurveRow {
  double t = 0.0;
  double s_p = 0.0;
  double s_phat = 0.0;
  double mass_deficit_p = 0.0;
  double mass_deficit_phat = 0.0;
  int n_x = 0;
  int n_p = 0;
  int mu_max = 0;
  bool flagged = false;
};

// `points` log-spaced values from 1e-4 to 1e-1.
std::vector<double> default_t_grid(int points = 10);

std::vector<EntropyCurveRow> entropy_curve(const WavepacketConfig& base,
                                           const std::vector<double>& t_grid);

struct AsymmetryPair {
  double forward = 0.0;   // p(1, 1 | 0, 0)
  double backward = 0.0;  // p(0, 0 | 1, 1)
};

AsymmetryPair asymmetry_pair(double t = 1.0);

double entropy_nats(const RMatrix& p);

}  // namespace seqmeas
