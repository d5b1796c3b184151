#ifndef OLINK_RX_FRONTEND_HPP
#define OLINK_RX_FRONTEND_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "olink/eo_frontend.hpp"
#include "olink/math_util.hpp"
#include "olink/waveform.hpp"

namespace olink {

struct JonesMatrix {
  cdouble xx{1.0, 0.0}, xy{0.0, 0.0};
  cdouble yx{0.0, 0.0}, yy{1.0, 0.0};

  static JonesMatrix identity() { return {}; }
  static JonesMatrix rotation(double theta_rad);
  static JonesMatrix pol_swap();  // 90 degree swap of the tributaries
  static JonesMatrix random_unitary(GaussianSource& rng);

  bool is_unitary(double tol = 1e-9) const;
};

struct AdcParams {
  double sample_rate = 80e9;
  double analog_bw_hz = 33e9;  // 4th-order Bessel corner
  double enob = 5.5;
  double clip_sigma = 3.3;
  std::size_t capture_len = std::size_t{1} << 20;
  std::uint64_t noise_seed = 2;

  static constexpr double enob_off = std::numeric_limits<double>::infinity();
  static constexpr double bw_off = std::numeric_limits<double>::infinity();
};

// The four balanced-detector outputs, real-valued, one common rate.
struct QuadStreams {
  std::vector<double> xi, xq, yi, yq;
  double sample_rate = 0.0;
};

// Optical band-pass around the carrier; bandwidth given in nm at the
// carrier wavelength. Ideal rectangle, or super-Gaussian order 3.
DualPolWaveform optical_bandpass(const DualPolWaveform& sig, double bw_nm,
                                 bool super_gaussian = false);

// Per-sample [Ex', Ey']^T = J [Ex, Ey]^T, plus an optional extra group
// delay on Y. J must be unitary.
DualPolWaveform rotate_polarization(const DualPolWaveform& sig,
                                    const JonesMatrix& j,
                                    double extra_delay_ps = 0.0);

// Ideal homodyne against the LO: XI + jXQ ~ Ex conj(E_lo), likewise Y.
// LO phase noise and frequency offset rotate the constellation; each
// polarization pair is normalized to unit RMS.
QuadStreams coherent_detect(const DualPolWaveform& sig, const LaserModel& lo,
                            GaussianSource& rng);

// Bessel low-pass, resample to the scope rate, clip + quantize at enob.
QuadStreams adc_capture(const QuadStreams& streams, const AdcParams& p);

// Complex response of the 4th-order Bessel low-pass at frequency f for a
// -3 dB corner fc (exposed for tests).
cdouble bessel4_response(double f, double fc);

}  // namespace olink

#endif
