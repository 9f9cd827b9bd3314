#include "seqmeas/faddeeva.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace seqmeas {
namespace {

constexpr int kWeidemanN = 48;
constexpr int kContinuedFractionTerms = 40;
constexpr double kRegionRadius = 8.0;

struct Weideman {
  std::array<double, kWeidemanN> a{};  // polynomial coefficients, highest degree first
  double L = 0.0;
};

// Coefficients from the discrete Fourier transform of
// f(t) = exp(-t^2) (L^2 + t^2) sampled at t = L tan(theta/2).
Weideman make_weideman() {
  constexpr int n = kWeidemanN;
  constexpr int m = 2 * n;
  constexpr int m2 = 2 * m;
  Weideman w;
  w.L = std::sqrt(n / std::sqrt(2.0));
  std::array<double, m2> f{};
  // f[0] = 0 pads the sample vector; k runs over -m+1 .. m-1.
  for (int k = -m + 1; k < m; ++k) {
    const double theta = k * std::numbers::pi / m;
    const double t = w.L * std::tan(0.5 * theta);
    f[static_cast<std::size_t>(k + m)] = std::exp(-t * t) * (w.L * w.L + t * t);
  }
  // fftshift of a length-m2 vector swaps its halves.
  std::array<double, m2> g{};
  for (int k = 0; k < m2; ++k) g[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>((k + m) % m2)];
  for (int j = 1; j <= n; ++j) {
    double re = 0.0;
    for (int k = 0; k < m2; ++k) {
      re += g[static_cast<std::size_t>(k)] * std::cos(2.0 * std::numbers::pi * j * k / m2);
    }
    w.a[static_cast<std::size_t>(n - j)] = re / m2;
  }
  return w;
}

const Weideman& weideman() {
  static const Weideman w = make_weideman();
  return w;
}

cplx w_upper(cplx z) {
  const cplx i(0.0, 1.0);
  if (std::abs(z) >= kRegionRadius) {
    cplx r = 0.0;
    for (int k = kContinuedFractionTerms; k >= 1; --k) r = (0.5 * k) / (z - r);
    return (i / std::sqrt(std::numbers::pi)) / (z - r);
  }
  const auto& wd = weideman();
  const cplx denom = wd.L - i * z;
  const cplx zz = (wd.L + i * z) / denom;
  cplx p = 0.0;
  for (double c : wd.a) p = p * zz + c;
  return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(std::numbers::pi)) / denom;
}

cplx erf_series(cplx z) {
  const cplx z2 = z * z;
  cplx term = z;
  cplx sum = z;
  for (int n = 1; n < 60; ++n) {
    term *= -z2 / static_cast<double>(n);
    const cplx add = term / static_cast<double>(2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

}  // namespace

cplx faddeeva_w(cplx z) {
  if (z.imag() >= 0.0) return w_upper(z);
  return 2.0 * std::exp(-z * z) - w_upper(-z);
}

cplx complex_erf(cplx z) {
  if (std::abs(z) < 0.5) return erf_series(z);
  const cplx i(0.0, 1.0);
  if (z.real() >= 0.0) return 1.0 - std::exp(-z * z) * w_upper(i * z);
  return std::exp(-z * z) * w_upper(-i * z) - 1.0;
}

cplx complex_erfi(cplx z) {
  const cplx i(0.0, 1.0);
  return -i * complex_erf(i * z);
}

DiagonalErfi diagonal_erfi_parts(double a) {
  const double s = a < 0.0 ? -1.0 : 1.0;
  const double b = std::abs(a);
  return {s, cplx(0.0, -s) * w_upper(cplx(b, b))};
}

cplx diagonal_erfi(double a) {
  if (std::abs(a) < 0.35) return complex_erfi(cplx(a, a));
  const auto parts = diagonal_erfi_parts(a);
  return cplx(0.0, parts.sign) + std::polar(1.0, 2.0 * a * a) * parts.oscillatory;
}

}  // namespace seqmeas
