#ifndef OLINK_TXDSP_HPP
#define OLINK_TXDSP_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "olink/freq_response.hpp"
#include "olink/modformat.hpp"
#include "olink/waveform.hpp"

namespace olink {

// Placement of the PRBS training headers inside one frame.
struct HeaderConfig {
  // The preamble is long enough that its phase-slope frequency estimate
  // resolves the grating ambiguity of the periodic-header fine estimate
  // even at the lowest operating OSNR.
  int preamble_len = 256;     // symbols at frame start
  int block_len = 32;         // interior training block length
  int block_period = 2048;    // payload symbols between interior blocks
  int prbs_order = 5;
  std::uint32_t prbs_seed = 0x1F;  // all-ones
};

// Symbol-rate frame: training headers interleaved with payload.
struct SymbolFrame {
  std::vector<double> symbols;     // full frame, training + payload
  std::vector<double> payload_symbols;
  std::vector<int> payload_bits;
  std::vector<std::pair<std::size_t, std::size_t>> header_map;  // (offset, len)
  std::vector<double> training_symbols;  // concatenated header content
  ModFormat format;
  HeaderConfig header_cfg;

  std::size_t frame_len() const { return symbols.size(); }
  bool is_header_position(std::size_t idx) const;
  // Frame positions of payload symbols, in payload order.
  std::vector<std::size_t> payload_positions() const;
};

struct DacParams {
  double sample_rate = 84e9;
  double enob = 5.0;          // infinity disables quantization
  double clip_sigma = 3.3;    // clip point in units of signal RMS
  bool include_zoh = false;
  std::uint64_t noise_seed = 1;  // fractional-ENOB dither stream

  static constexpr double enob_off = std::numeric_limits<double>::infinity();
};

// Payload bits -> framed symbol sequence with PRBS-5 training headers
// mapped to the outer levels (bit 0 -> -outer, 1 -> +outer).
SymbolFrame build_frame(const std::vector<int>& payload_bits,
                        const ModFormat& fmt, const HeaderConfig& hdr);

// RRC pulse shaping at sps samples per symbol (circular). Sample k*sps of
// the matched-filtered output reproduces symbol k.
Waveform shape_pulse(const SymbolFrame& frame, int sps,
                     const std::vector<double>& rrc_taps,
                     double symbol_rate = 64e9);

// Zero-forcing inverse of the cascade, magnitude capped at max_boost_db,
// minimum-phase. Applying the cascade afterwards restores the in-band
// spectrum wherever the cap is not active.
Waveform predistort(const Waveform& w, const FreqResponse& cascade,
                    double max_boost_db = 20.0);

// Clip + mid-rise quantization at the DAC rate; fractional ENOB is reached
// by adding white Gaussian noise on top of the integer-bit quantizer.
Waveform dac_convert(const Waveform& w, const DacParams& p);

// Frame layout + generating bits as JSON, so a receiver can run data-aided
// without hidden state.
std::string frame_layout_json(const SymbolFrame& frame);

}  // namespace olink

#endif
