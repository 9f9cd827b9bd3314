#include "seqmeas/bloch.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {
namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

BlochPoint bloch_curve(double p, double lambda, double alpha) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "bloch_curve: p = " << p << " must lie in (0, 1)";
    throw ValidationError(msg.str());
  }
  const double lmax = bloch_lambda_max(p);
  if (!(lambda >= 0.0) || lambda > lmax * (1.0 + 1e-15)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "bloch_curve: lambda = " << lambda << " outside [0, " << lmax
        << "]; the matrix would not be positive";
    throw PreconditionError(msg.str());
  }
  lambda = std::min(lambda, lmax);

  BlochPoint out;
  const cplx off = std::polar(lambda, alpha);
  out.rho.resize(2, 2);
  out.rho << p, off, std::conj(off), 1.0 - p;

  const double half_gap = std::sqrt(std::max(0.0, lambda * lambda + 0.25 - p * (1.0 - p)));
  out.p1 = 0.5 + half_gap;
  out.p2 = 0.5 - half_gap;
  out.distance2 = 2.0 * lambda * lambda - 2.0 * p * (1.0 - p) + 0.5;
  out.entropy = -xlogx(out.p1) - xlogx(out.p2);

  const double r = std::sqrt(4.0 * lambda * lambda + (1.0 - 2.0 * p) * (1.0 - 2.0 * p));
  if (r >= 1.0) {
    out.dS_dlambda = lambda > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  } else if (r < 1e-4) {
    // atanh(r)/r = 1 + r^2/3 + r^4/5 + ...
    const double r2 = r * r;
    out.dS_dlambda = -4.0 * lambda * (1.0 + r2 / 3.0 + r2 * r2 / 5.0);
  } else {
    out.dS_dlambda = -4.0 * lambda * std::atanh(r) / r;
  }
  return out;
}

}  // namespace seqmeas
