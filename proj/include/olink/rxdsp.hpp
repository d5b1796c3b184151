#ifndef OLINK_RXDSP_HPP
#define OLINK_RXDSP_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "olink/modformat.hpp"
#include "olink/waveform.hpp"

namespace olink {

struct FrameSyncResult {
  std::size_t offset_symbols = 0;  // preamble start in the received stream
  int sample_phase = 0;            // T/2 phase (0 or 1)
  double coarse_phase_rad = 0.0;
  bool polarity_inverted = false;
  double freq_offset_hz = 0.0;
  double peak_to_sidelobe = 0.0;
};

struct MimoConfig {
  int num_taps = 31;       // T/2-spaced
  double mu_train = 1e-3;
  int epochs = 8;
  bool track_payload = false;
  double mu_track = 1e-4;
  double train_mse_limit = 0.75;
};

struct BpsConfig {
  int num_phases = 32;     // over [-pi/2, pi/2)
  int block_len = 64;
};

struct DdConfig {
  int num_taps = 15;       // T-spaced
  double mu = 2e-5;
};

struct EqualizerState {
  // 2x2 butterfly rows: [hxx, hxy] feed X, [hyx, hyy] feed Y.
  cvec hxx, hxy, hyx, hyy;
  double final_training_mse = 0.0;
  bool converged = false;
};

struct BpsResult {
  cvec symbols;
  std::vector<double> phase_track;  // one entry per block
};

struct BerCount {
  std::size_t errors = 0;
  std::size_t total = 0;
  double ratio() const;
};

// Locate the training structure in a 2-sps capture by FFT-based cyclic
// cross-correlation against the full frame-length training template
// (training symbols at header positions, zeros elsewhere). Both
// polarization streams are searched jointly so an arbitrary input SOP
// cannot hide the peak; `alias_delay` (the PolMux decorrelation, in
// symbols) marks the other tributary's equally legitimate peak, which is
// excluded from the sidelobe scan. Also estimates coarse phase, bipolar
// polarity and the residual frequency offset from the preamble phase
// slope. Throws if the correlation peak is not at least peak_threshold
// times the sidelobe level.
FrameSyncResult frame_sync(const cvec& x_2sps, const cvec& y_2sps,
                           const std::vector<double>& training_template,
                           double symbol_rate, double peak_threshold = 2.0,
                           std::size_t alias_delay = 0);

// Single-stream convenience overload.
FrameSyncResult frame_sync(const cvec& stream_2sps,
                           const std::vector<double>& training_template,
                           double symbol_rate, double peak_threshold = 2.0,
                           std::size_t alias_delay = 0);

// Data-aided 2x2 complex LMS butterfly, T/2-spaced input, T-spaced output.
// ref_x / ref_y are the full per-tributary reference symbol sequences;
// known_x / known_y flag the training positions. Outputs are normalized to
// unit RMS. Throws on training MSE above the configured limit.
struct MimoOutput {
  cvec out_x, out_y;
  EqualizerState state;
};
MimoOutput mimo_equalize_da(const cvec& x_2sps, const cvec& y_2sps,
                            const std::vector<double>& ref_x,
                            const std::vector<double>& ref_y,
                            const std::vector<char>& known_x,
                            const std::vector<char>& known_y,
                            const MimoConfig& cfg);

// Refinement pass for a trained butterfly: ridge-regularized least squares
// over every output position against complex reference symbols (typically
// rebuilt from carrier-recovered decisions plus the known training content).
// Training on the whole frame removes the bias a long equalizer picks up
// from short-period training sequences; the exact solve avoids the slow
// convergence of gradient updates through low-power spectral modes. `init`
// fixes the tap count; `ridge` scales the diagonal loading relative to the
// mean input power and pins the out-of-band tap directions to zero.
MimoOutput mimo_refine_da(const cvec& x_2sps, const cvec& y_2sps,
                          const cvec& ref_x, const cvec& ref_y,
                          const EqualizerState& init, double ridge = 1e-3);

// Blind phase search over [-pi/2, pi/2): per block, pick the test phase
// minimizing the distance to the nearest in-phase level, unwrap across
// blocks, rotate.
BpsResult bps_cpe(const cvec& symbols, const ModFormat& fmt,
                  const BpsConfig& cfg);

// T-spaced 4x4 real decision-directed equalizer on (XI, XQ, YI, YQ);
// targets are [level, 0, level, 0]. Throws on divergence.
std::array<std::vector<double>, 4> dd_equalize_4x4(
    const std::array<std::vector<double>, 4>& streams, const ModFormat& fmt,
    const DdConfig& cfg);

// In-phase-only nearest-level decision, Gray demapping.
std::vector<int> decide_inphase(const cvec& symbols, const ModFormat& fmt);

BerCount count_ber(const std::vector<int>& decided,
                   const std::vector<int>& reference);

// Q^2 [dB] = 20 log10(sqrt(2) erfc^{-1}(2 BER)), defined for 0 < BER < 0.5.
double ber_to_q2(double ber);

}  // namespace olink

#endif
