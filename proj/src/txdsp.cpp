#include "olink/txdsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "olink/math_util.hpp"
#include "olink/signal_core.hpp"

namespace olink {

bool SymbolFrame::is_header_position(std::size_t idx) const {
  for (const auto& [off, len] : header_map)
    if (idx >= off && idx < off + len) return true;
  return false;
}

std::vector<std::size_t> SymbolFrame::payload_positions() const {
  std::vector<std::size_t> pos;
  pos.reserve(payload_symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (!is_header_position(i)) pos.push_back(i);
  return pos;
}

SymbolFrame build_frame(const std::vector<int>& payload_bits,
                        const ModFormat& fmt, const HeaderConfig& hdr) {
  if (hdr.preamble_len <= 0 || hdr.block_len < 0 || hdr.block_period <= 0)
    throw std::invalid_argument("build_frame: bad header layout");

  SymbolFrame frame;
  frame.format = fmt;
  frame.header_cfg = hdr;
  frame.payload_bits = payload_bits;
  frame.payload_symbols = map_bits_to_ask(payload_bits, fmt);

  const std::size_t n_payload = frame.payload_symbols.size();
  const std::size_t n_blocks =
      (n_payload > 0)
          ? (n_payload - 1) / static_cast<std::size_t>(hdr.block_period)
          : 0;
  const std::size_t n_training =
      static_cast<std::size_t>(hdr.preamble_len) + n_blocks * hdr.block_len;

  const auto training_bits =
      generate_prbs(hdr.prbs_order, hdr.prbs_seed, n_training);
  const double outer = fmt.outer_level();
  frame.training_symbols.reserve(n_training);
  for (int b : training_bits)
    frame.training_symbols.push_back(b ? outer : -outer);

  frame.symbols.reserve(n_training + n_payload);
  std::size_t t = 0, p = 0;

  auto emit_training = [&](std::size_t len) {
    frame.header_map.emplace_back(frame.symbols.size(), len);
    for (std::size_t i = 0; i < len; ++i)
      frame.symbols.push_back(frame.training_symbols[t++]);
  };

  emit_training(static_cast<std::size_t>(hdr.preamble_len));
  while (p < n_payload) {
    const std::size_t chunk =
        std::min<std::size_t>(hdr.block_period, n_payload - p);
    for (std::size_t i = 0; i < chunk; ++i)
      frame.symbols.push_back(frame.payload_symbols[p++]);
    if (p < n_payload) emit_training(static_cast<std::size_t>(hdr.block_len));
  }
  return frame;
}

Waveform shape_pulse(const SymbolFrame& frame, int sps,
                     const std::vector<double>& rrc_taps, double symbol_rate) {
  if (sps < 2) throw std::invalid_argument("shape_pulse: sps must be >= 2");
  Waveform w;
  w.sample_rate = symbol_rate * sps;
  w.samples.assign(frame.frame_len() * sps, cdouble{0.0, 0.0});
  for (std::size_t k = 0; k < frame.frame_len(); ++k)
    w.samples[k * sps] = frame.symbols[k];
  w.samples = circular_filter(w.samples, rrc_taps);
  return w;
}

Waveform predistort(const Waveform& w, const FreqResponse& cascade,
                    double max_boost_db) {
  w.validate("predistort");
  const cvec h = cascade.sample_fft_grid(w.size(), w.sample_rate);

  double min_mag = 1e300;
  for (const auto& v : h) min_mag = std::min(min_mag, std::abs(v));
  if (!std::isfinite(max_boost_db) && min_mag < 1e-12)
    throw std::invalid_argument(
        "predistort: cascade has nulls and no boost cap");

  const double cap = std::isfinite(max_boost_db)
                         ? std::pow(10.0, max_boost_db / 20.0)
                         : 1e300;
  std::vector<double> inv_mag(h.size());
  for (std::size_t k = 0; k < h.size(); ++k)
    inv_mag[k] = std::min(1.0 / std::max(std::abs(h[k]), 1e-300), cap);

  const cvec g = minimum_phase_from_magnitude(inv_mag);
  cvec X = fft(w.samples);
  for (std::size_t k = 0; k < X.size(); ++k) X[k] *= g[k];
  Waveform out = w;
  out.samples = ifft(X);
  return out;
}

namespace {
void quantize_component(std::vector<double>& x, double amp, int bits,
                        double extra_noise_var, GaussianSource& noise) {
  const double delta = 2.0 * amp / std::pow(2.0, bits);
  for (double& v : x) {
    double y = std::clamp(v, -amp, amp);
    // mid-rise: no zero level, ties go to +delta/2
    double q = (std::floor(y / delta) + 0.5) * delta;
    q = std::clamp(q, -amp + delta / 2.0, amp - delta / 2.0);
    if (extra_noise_var > 0.0)
      q += std::sqrt(extra_noise_var) * noise();
    v = q;
  }
}
}  // namespace

Waveform dac_convert(const Waveform& w, const DacParams& p) {
  Waveform out = resample(w, p.sample_rate);
  if (std::isfinite(p.enob)) {
    if (p.enob <= 1.0) throw std::invalid_argument("dac_convert: enob <= 1");
    const double rms = std::sqrt(out.power());
    if (rms > 0.0) {
      const double amp = p.clip_sigma * rms;
      const int bits = static_cast<int>(std::ceil(p.enob));
      // Integer-bit quantizer noise is delta^2/12; top up with white noise
      // to reach the fractional-ENOB target step.
      const double delta_b = 2.0 * amp / std::pow(2.0, bits);
      const double delta_t = 2.0 * amp / std::pow(2.0, p.enob);
      const double extra_var =
          (delta_t * delta_t - delta_b * delta_b) / 12.0;

      std::vector<double> re(out.size()), im(out.size());
      bool has_imag = false;
      for (std::size_t i = 0; i < out.size(); ++i) {
        re[i] = out.samples[i].real();
        im[i] = out.samples[i].imag();
        has_imag = has_imag || im[i] != 0.0;
      }
      GaussianSource noise(p.noise_seed);
      quantize_component(re, amp, bits, extra_var, noise);
      if (has_imag) quantize_component(im, amp, bits, extra_var, noise);
      for (std::size_t i = 0; i < out.size(); ++i)
        out.samples[i] = {re[i], has_imag ? im[i] : 0.0};
    }
  }
  if (p.include_zoh) {
    cvec X = fft(out.samples);
    for (std::size_t k = 0; k < X.size(); ++k) {
      const double f = fft_bin_freq(k, X.size(), out.sample_rate);
      const double x = M_PI * f / p.sample_rate;
      X[k] *= (std::abs(x) < 1e-12) ? 1.0 : std::sin(x) / x;
    }
    out.samples = ifft(X);
  }
  return out;
}

std::string frame_layout_json(const SymbolFrame& frame) {
  nlohmann::json j;
  j["format_m"] = frame.format.m;
  j["prbs_order"] = frame.header_cfg.prbs_order;
  j["prbs_seed"] = frame.header_cfg.prbs_seed;
  j["preamble_len"] = frame.header_cfg.preamble_len;
  j["block_len"] = frame.header_cfg.block_len;
  j["block_period"] = frame.header_cfg.block_period;
  j["frame_len"] = frame.frame_len();
  nlohmann::json hm = nlohmann::json::array();
  for (const auto& [off, len] : frame.header_map)
    hm.push_back({{"offset", off}, {"length", len}});
  j["header_map"] = hm;
  j["payload_bits"] = frame.payload_bits;
  return j.dump(2);
}

}  // namespace olink
