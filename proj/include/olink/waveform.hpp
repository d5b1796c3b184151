#ifndef OLINK_WAVEFORM_HPP
#define OLINK_WAVEFORM_HPP

#include <cstddef>
#include <string>

#include "olink/fft.hpp"

namespace olink {

// Uniformly sampled complex baseband field. |sample|^2 is instantaneous
// power in mW once the waveform is power-tagged (after the modulator).
struct Waveform {
  cvec samples;
  double sample_rate = 0.0;          // Hz
  double center_freq = 193.4e12;     // Hz, carrier bookkeeping

  std::size_t size() const { return samples.size(); }

  // Mean squared magnitude.
  double power() const;
  double power_dbm() const;

  void scale(double factor);
  void validate(const char* where) const;
};

struct DualPolWaveform {
  Waveform pol_x;
  Waveform pol_y;

  double power() const { return pol_x.power() + pol_y.power(); }
  double power_dbm() const;
  void validate(const char* where) const;  // matching rates and lengths
};

// One-sided or two-sided PSD on an explicit frequency grid.
struct Spectrum {
  std::vector<double> freq_bins;  // Hz, ascending, uniform spacing
  std::vector<double> psd;        // linear power density, power-units/Hz
  double bin_width = 0.0;         // Hz

  // Integral of the linear PSD over the grid.
  double total_power() const;
};

// Binary dump: little-endian float64 interleaved (re, im) per polarization,
// pol_x first, with a JSON sidecar {sample_rate, center_freq, pols}.
void save_waveform(const std::string& path, const DualPolWaveform& w);
DualPolWaveform load_waveform(const std::string& path);

}  // namespace olink

#endif
