#ifndef OLINK_FREQ_RESPONSE_HPP
#define OLINK_FREQ_RESPONSE_HPP

#include <string>
#include <utility>
#include <vector>

#include "olink/waveform.hpp"

namespace olink {

// Magnitude response on an ascending nonnegative frequency grid, with either
// measured phase or minimum-phase reconstruction at evaluation time.
// Magnitude between grid points is monotone-cubic interpolated in
// log-frequency; beyond the last point the final log-log slope continues.
class FreqResponse {
 public:
  // Parametric model from (freq_hz, mag_db) anchors. Anchors must include
  // DC at 0 dB and be non-increasing in magnitude.
  static FreqResponse from_anchors(
      const std::vector<std::pair<double, double>>& anchors);

  // CSV `freq_hz,mag_db,phase_deg` (header line required, rows ascending).
  // A missing phase column selects minimum-phase reconstruction.
  static FreqResponse from_s21_csv(const std::string& path);

  // Frequency-flat unity response.
  static FreqResponse all_pass();

  // Interpolated magnitude, dB, for f >= 0.
  double mag_db_at(double freq_hz) const;

  bool has_measured_phase() const { return !phase_rad_.empty(); }
  double phase_rad_at(double freq_hz) const;  // measured phase only

  // Per-bin product on a merged grid (dB magnitudes add). Both sides must
  // be magnitude-only (minimum-phase) models.
  FreqResponse cascaded_with(const FreqResponse& other) const;

  // Complex transfer function sampled on the N-point FFT bin grid (bin
  // order, not shifted) at the given sample rate. Magnitude is evaluated at
  // |f|; phase is minimum-phase (cepstral reconstruction) unless measured
  // phase is present.
  cvec sample_fft_grid(std::size_t n, double sample_rate) const;

  const std::vector<double>& freq_grid() const { return freq_; }
  const std::vector<double>& mag_db() const { return mag_db_; }

 private:
  std::vector<double> freq_;       // Hz, ascending, freq_[0] == 0
  std::vector<double> mag_db_;
  std::vector<double> phase_rad_;  // empty -> minimum phase
};

// Minimum-phase spectrum from a magnitude sampled on an FFT bin grid:
// returns complex H with |H| = mag and cepstrum-derived phase.
cvec minimum_phase_from_magnitude(const std::vector<double>& mag);

// Multiply the waveform spectrum by the response (circular, zero delay).
Waveform apply_response(const Waveform& w, const FreqResponse& r);

}  // namespace olink

#endif
