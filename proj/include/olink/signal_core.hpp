#ifndef OLINK_SIGNAL_CORE_HPP
#define OLINK_SIGNAL_CORE_HPP

#include <cstdint>
#include <vector>

#include "olink/waveform.hpp"

namespace olink {

// Maximal-length Fibonacci LFSR bits. Order 5 uses x^5 + x^3 + 1; a few
// other common orders are wired in. Seed must be nonzero.
std::vector<int> generate_prbs(int order, std::uint32_t seed_state,
                               std::size_t length);

// Root-raised-cosine taps, closed form in time domain, unit energy.
// span_symbols counts symbol periods covered (even), so the vector has
// span_symbols * samples_per_symbol + 1 taps and is exactly symmetric.
std::vector<double> design_rrc(double rolloff, int span_symbols,
                               int samples_per_symbol);

// FFT-based rate conversion; exact for signals band-limited below the
// smaller Nyquist frequency. Output length = round(len * new/old).
Waveform resample(const Waveform& w, double new_rate);
DualPolWaveform resample(const DualPolWaveform& w, double new_rate);

// Welch-averaged PSD: Hann window, 50% overlap, segment length chosen from
// the requested resolution bandwidth. Two-sided, ascending frequency grid.
Spectrum estimate_psd(const Waveform& w, double resolution_bw);

// Peak-to-trough PSD spread (dB) over |f| <= band_hz.
double inband_ripple_db(const Spectrum& s, double band_hz);

// Circular convolution of a waveform with a real FIR centered on its
// middle tap (zero net delay). Used for pulse shaping and matched filtering.
cvec circular_filter(const cvec& x, const std::vector<double>& taps);

}  // namespace olink

#endif
