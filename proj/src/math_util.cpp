#include "olink/math_util.hpp"

#include <stdexcept>

namespace olink {

double erfc_inv(double y) {
  if (!(y > 0.0 && y < 2.0))
    throw std::domain_error("erfc_inv: argument outside (0, 2)");
  // x solves erfc(x) = y. Use symmetry erfc(-x) = 2 - erfc(x).
  if (y > 1.0) return -erfc_inv(2.0 - y);

  // Initial guess via the Hastings upper-tail normal quantile:
  // erfc(x) = y  <=>  x = Phi^{-1}(1 - y/2) / sqrt(2).
  const double t = std::sqrt(-2.0 * std::log(y / 2.0));
  const double z =
      t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
  double x = z / std::sqrt(2.0);

  // Newton polish: f(x) = erfc(x) - y, f'(x) = -2/sqrt(pi) exp(-x^2).
  constexpr double two_over_sqrt_pi = 1.1283791670955126;
  for (int i = 0; i < 8; ++i) {
    const double err = std::erfc(x) - y;
    const double step = err / (two_over_sqrt_pi * std::exp(-x * x));
    x += step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double GaussianSource::uniform01() {
  // 53-bit mantissa uniform, strictly inside (0, 1).
  const std::uint64_t bits = eng_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double GaussianSource::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void GaussianSource::complex_pair(double variance, double& re, double& im) {
  const double s = std::sqrt(variance / 2.0);
  re = s * (*this)();
  im = s * (*this)();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  // splitmix64 over the combined value.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace olink
