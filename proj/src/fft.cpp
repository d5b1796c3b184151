#include "olink/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace olink {

namespace {
// FFTW planning is not thread-safe; execution of independent plans is.
std::mutex plan_mutex;

cvec transform(const cvec& x, int sign) {
  if (x.empty()) throw std::invalid_argument("fft: empty input");
  cvec out(x.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan = fftw_plan_dft_1d(
        static_cast<int>(x.size()),
        reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(x.data())),
        reinterpret_cast<fftw_complex*>(out.data()), sign,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}
}  // namespace

cvec fft(const cvec& x) { return transform(x, FFTW_FORWARD); }

cvec ifft(const cvec& X) {
  cvec out = transform(X, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(X.size());
  for (auto& v : out) v *= scale;
  return out;
}

double fft_bin_freq(std::size_t k, std::size_t n, double sample_rate) {
  const double df = sample_rate / static_cast<double>(n);
  const auto ki = static_cast<long long>(k);
  const auto ni = static_cast<long long>(n);
  const long long shifted = (ki <= (ni - 1) / 2) ? ki : ki - ni;
  return static_cast<double>(shifted) * df;
}

}  // namespace olink
