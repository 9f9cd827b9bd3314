#pragma once

// Qubit states on the segment between a Lüders post-state and its
// pre-image: rho(lambda) = [[p, lambda e^{i alpha}], [lambda e^{-i alpha}, 1 - p]].

#include <cmath>

#include "seqmeas/quantum.hpp"

namespace seqmeas {

struct BlochPoint {
  CMatrix rho;
  double p1 = 0.0;  // 1/2 + sqrt(lambda^2 + 1/4 - p(1-p))
  double p2 = 0.0;
  double distance2 = 0.0;    // ||rho - 1/2||_HS^2 = 2 lambda^2 - 2 p (1-p) + 1/2
  double entropy = 0.0;      // -p1 ln p1 - p2 ln p2
  double dS_dlambda = 0.0;   // -4 lambda atanh(r) / r, r = sqrt(4 lambda^2 + (1-2p)^2)
};

// Requires p in (0, 1) and 0 <= lambda <= sqrt(p(1-p)); at the upper end the
// state is pure and the derivative is -infinity.
BlochPoint bloch_curve(double p, double lambda, double alpha);

inline double bloch_lambda_max(double p) { return std::sqrt(p * (1.0 - p)); }

}  // namespace seqmeas
