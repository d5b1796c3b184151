#ifndef OLINK_FFT_HPP
#define OLINK_FFT_HPP

#include <complex>
#include <vector>

namespace olink {

using cdouble = std::complex<double>;
using cvec = std::vector<cdouble>;

// Forward/inverse DFT of arbitrary length (FFTW backend). ifft includes the
// 1/N normalization so ifft(fft(x)) == x.
cvec fft(const cvec& x);
cvec ifft(const cvec& X);

// Frequency of FFT bin k for an N-point transform at the given sample rate,
// in [-fs/2, fs/2).
double fft_bin_freq(std::size_t k, std::size_t n, double sample_rate);

}  // namespace olink

#endif
