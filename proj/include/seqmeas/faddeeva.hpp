#pragma once

// Complex error functions built on the Faddeeva function
// w(z) = exp(-z^2) erfc(-i z).

#include <complex>

namespace seqmeas {

using cplx = std::complex<double>;

// w(z) for Im z >= 0 (Weideman's rational approximation inside |z| < 8,
// Laplace continued fraction outside). Other half plane via
// w(z) = 2 exp(-z^2) - w(-z), which overflows for large |z|.
cplx faddeeva_w(cplx z);

// erf(z). Small |z| uses the Taylor series; otherwise
// erf(z) = 1 - exp(-z^2) w(i z) for Re z >= 0 and odd symmetry.
cplx complex_erf(cplx z);

// erfi(z) = erf(i z) / i.
cplx complex_erfi(cplx z);

// erfi((1 + i) a) for real a, split as constant + oscillatory with
// constant = i sgn(a) and oscillatory = -i sgn(a) exp(2 i a^2) w((1 + i)|a|).
// The oscillatory part decays like 1/|a|, so combinations whose constants
// cancel keep full relative accuracy.
struct DiagonalErfi {
  double sign;       // sgn(a), +1 for a = 0
  cplx oscillatory;  // -i sgn(a) w((1 + i)|a|), without the exp(2 i a^2) phase
};
DiagonalErfi diagonal_erfi_parts(double a);
cplx diagonal_erfi(double a);

}  // namespace seqmeas
