#ifndef OLINK_EO_FRONTEND_HPP
#define OLINK_EO_FRONTEND_HPP

#include "olink/freq_response.hpp"
#include "olink/math_util.hpp"
#include "olink/waveform.hpp"

namespace olink {

enum class MzmBias { null, quadrature };

struct MzmParams {
  double v_pi = 4.5;               // volts
  MzmBias bias = MzmBias::null;
  double insertion_loss_db = 18.0; // static, couplers included
  double chirp_alpha = 0.0;
  double drive_gain_limit_db = 14.5;
  double target_peak_v = 2.25;     // drive swing, default V_pi/2
};

struct LaserModel {
  double center_freq = 193.4e12;  // Hz
  double power_dbm = 16.0;
  double linewidth_hz = 100e3;    // Lorentzian
  double freq_offset_hz = 0.0;    // used for the LO
};

// Parametric chip magnitude model through (freq, mag_db) anchors,
// minimum phase. Default anchors: DC 0 dB, -3 dB at 11 GHz, -6 dB at 35 GHz.
FreqResponse chip_response_model(
    const std::vector<std::pair<double, double>>& anchors = {
        {0.0, 0.0}, {11e9, -3.0}, {35e9, -6.0}});

// Chip-filtered drive scaled so the peak voltage equals the configured
// swing. Input is expected near unit RMS; the implied driver gain must stay
// within the gain limit.
Waveform apply_driver(const Waveform& w, const MzmParams& p,
                      const FreqResponse& chip);

// Continuous-wave laser field with Wiener phase noise and an optional
// frequency offset. |sample|^2 is power in mW.
Waveform laser_field(const LaserModel& laser, std::size_t n,
                     double sample_rate, GaussianSource& rng);

// Field transfer at the configured bias point:
//   null: E = laser * sin(pi v / (2 V_pi)) * 10^(-IL/20)
// optionally chirped by exp(j alpha pi v / (2 V_pi)).
Waveform mzm_modulate(const Waveform& drive, const LaserModel& laser,
                      const MzmParams& p, GaussianSource& rng);

// Delay-decorrelation polarization multiplexing: Y is a circularly shifted
// copy of X; both branches take the split loss.
DualPolWaveform polmux(const Waveform& field, int delay_symbols,
                       double split_loss_db = 3.0, double symbol_rate = 64e9);

}  // namespace olink

#endif
