#ifndef OLINK_CHANNEL_HPP
#define OLINK_CHANNEL_HPP

#include "olink/math_util.hpp"
#include "olink/waveform.hpp"

namespace olink {

struct FiberParams {
  double length_km = 120.0;
  double dispersion_D = 17.0;    // ps/nm/km
  double alpha_db_km = 0.2;
  double gamma = 1.3;            // 1/(W*km)
  double step_m = 100.0;
  double manakov_factor = 8.0 / 9.0;  // set 1.0 for scalar-NLSE checks
};

struct AmpParams {
  double gain_db = 24.0;
  double noise_figure_db = 5.0;
  bool ideal = false;  // suppress ASE
};

// Exact noise bookkeeping alongside a signal: power before noise loading
// and accumulated white-noise PSD (both polarizations combined, mW/Hz).
struct NoiseRecord {
  double signal_power_mw = 0.0;
  double noise_psd_mw_hz = 0.0;

  double osnr_db(double ref_bw_hz = kOsnrRefBw) const;
  static constexpr double kOsnrRefBw = 12.5e9;  // the 0.1-nm convention
};

// Symmetric split-step Fourier propagation over standard single-mode fiber:
// dispersion + loss in frequency domain, Manakov-averaged Kerr rotation in
// time domain.
DualPolWaveform propagate_ssmf(const DualPolWaveform& sig,
                               const FiberParams& fp);

// Frequency-domain all-pass with the conjugate dispersion phase.
DualPolWaveform compensate_cd(const DualPolWaveform& sig, double dispersion_D,
                              double length_km);
Waveform compensate_cd(const Waveform& w, double dispersion_D,
                       double length_km);

// Scale both polarizations so total power hits the target.
DualPolWaveform set_power(const DualPolWaveform& sig, double target_dbm);

// Add white complex Gaussian noise (pol-balanced) so that
// signal / (noise in 12.5 GHz, both pols) equals the target. The record
// accumulates across calls; a target above the current OSNR is rejected.
DualPolWaveform load_noise_to_osnr(const DualPolWaveform& sig,
                                   double target_osnr_db, GaussianSource& rng,
                                   NoiseRecord& record);

// Exact-mode OSNR from the tracked record.
double measure_osnr(const NoiseRecord& record);

// Estimator mode: noise floor from the PSD outside +-signal_band_hz.
double measure_osnr_psd(const DualPolWaveform& sig, double signal_band_hz);

// Flat-gain amplifier with ASE PSD (G-1)*F*h*nu/2 per polarization.
DualPolWaveform amplify_with_ase(const DualPolWaveform& sig,
                                 const AmpParams& p, GaussianSource& rng,
                                 NoiseRecord& record);

}  // namespace olink

#endif
