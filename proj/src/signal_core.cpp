#include "olink/signal_core.hpp"

#include <cmath>
#include <stdexcept>

namespace olink {

std::vector<int> generate_prbs(int order, std::uint32_t seed_state,
                               std::size_t length) {
  if (seed_state == 0)
    throw std::invalid_argument("generate_prbs: zero seed locks the LFSR");
  // Primitive trinomials x^order + x^mid + 1; the right-shift Fibonacci
  // recurrence is s[n] = s[n-order] ^ s[n-mid], i.e. feedback from bit 0
  // (the current output, delay `order`) and bit (order - mid).
  int mid = 0;
  switch (order) {
    case 5: mid = 3; break;
    case 7: mid = 6; break;
    case 9: mid = 5; break;
    case 11: mid = 9; break;
    case 15: mid = 14; break;
    default:
      throw std::invalid_argument("generate_prbs: unsupported order");
  }
  const std::uint32_t mask = (1u << order) - 1u;
  std::uint32_t state = seed_state & mask;
  if (state == 0)
    throw std::invalid_argument("generate_prbs: seed reduces to zero");

  std::vector<int> bits(length);
  for (auto& b : bits) {
    const int out = static_cast<int>(state & 1u);
    const int fb =
        (static_cast<int>(state) ^ static_cast<int>(state >> (order - mid))) &
        1;
    state = ((state >> 1) | (static_cast<std::uint32_t>(fb) << (order - 1))) & mask;
    b = out;
  }
  return bits;
}

std::vector<double> design_rrc(double rolloff, int span_symbols,
                               int samples_per_symbol) {
  if (!(rolloff > 0.0 && rolloff <= 1.0))
    throw std::invalid_argument("design_rrc: rolloff outside (0, 1]");
  if (span_symbols <= 0 || span_symbols % 2 != 0)
    throw std::invalid_argument("design_rrc: span must be positive and even");
  if (samples_per_symbol < 2)
    throw std::invalid_argument("design_rrc: need >= 2 samples per symbol");

  const int n = span_symbols * samples_per_symbol + 1;
  const int mid = (n - 1) / 2;
  const double beta = rolloff;
  std::vector<double> taps(n);
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k - mid) / samples_per_symbol;
    double h;
    if (std::abs(t) < 1e-12) {
      h = 1.0 - beta + 4.0 * beta / M_PI;
    } else if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
      const double a = M_PI / (4.0 * beta);
      h = (beta / std::sqrt(2.0)) *
          ((1.0 + 2.0 / M_PI) * std::sin(a) + (1.0 - 2.0 / M_PI) * std::cos(a));
    } else {
      const double num = std::sin(M_PI * t * (1.0 - beta)) +
                         4.0 * beta * t * std::cos(M_PI * t * (1.0 + beta));
      const double den = M_PI * t * (1.0 - std::pow(4.0 * beta * t, 2));
      h = num / den;
    }
    taps[k] = h;
  }
  double energy = 0.0;
  for (double h : taps) energy += h * h;
  const double norm = 1.0 / std::sqrt(energy);
  for (double& h : taps) h *= norm;
  return taps;
}

Waveform resample(const Waveform& w, double new_rate) {
  w.validate("resample");
  if (new_rate <= 0.0) throw std::invalid_argument("resample: rate <= 0");
  if (new_rate == w.sample_rate) return w;

  const std::size_t n = w.size();
  const auto m = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * new_rate / w.sample_rate));
  if (m == 0) throw std::invalid_argument("resample: output would be empty");

  const cvec X = fft(w.samples);
  cvec Y(m, cdouble{0.0, 0.0});
  const auto ni = static_cast<long long>(n);
  const auto mi = static_cast<long long>(m);
  const long long dst_lo = -(mi / 2), dst_hi = (mi - 1) / 2;
  const double scale = static_cast<double>(m) / static_cast<double>(n);

  for (std::size_t k = 0; k < n; ++k) {
    const auto ki = static_cast<long long>(k);
    const long long s = (ki <= (ni - 1) / 2) ? ki : ki - ni;  // signed bin
    if (s < dst_lo || s > dst_hi) continue;                   // truncated
    const long long dk = (s >= 0) ? s : s + mi;
    cdouble v = X[k] * scale;
    // A source Nyquist bin maps to one edge bin; split it between the two
    // destination edges when both exist, to keep the result conjugate-clean.
    if (ni % 2 == 0 && s == -(ni / 2) && mi > ni && -s <= dst_hi) {
      Y[static_cast<std::size_t>(dk)] += v * 0.5;
      Y[static_cast<std::size_t>(-s)] += std::conj(v) * 0.5;
    } else {
      Y[static_cast<std::size_t>(dk)] += v;
    }
  }

  Waveform out;
  out.samples = ifft(Y);
  out.sample_rate = new_rate;
  out.center_freq = w.center_freq;
  return out;
}

DualPolWaveform resample(const DualPolWaveform& w, double new_rate) {
  return {resample(w.pol_x, new_rate), resample(w.pol_y, new_rate)};
}

Spectrum estimate_psd(const Waveform& w, double resolution_bw) {
  w.validate("estimate_psd");
  if (resolution_bw <= 0.0)
    throw std::invalid_argument("estimate_psd: resolution_bw <= 0");
  const double fs = w.sample_rate;
  const auto seg_len =
      static_cast<std::size_t>(std::llround(fs / resolution_bw));
  if (seg_len < 8 || seg_len > w.size())
    throw std::invalid_argument(
        "estimate_psd: resolution_bw incompatible with waveform length");

  std::vector<double> window(seg_len);
  double win_sq = 0.0;
  for (std::size_t i = 0; i < seg_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / seg_len);
    win_sq += window[i] * window[i];
  }

  const std::size_t hop = seg_len / 2;
  std::vector<double> acc(seg_len, 0.0);
  std::size_t count = 0;
  for (std::size_t start = 0; start + seg_len <= w.size(); start += hop) {
    cvec seg(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i)
      seg[i] = w.samples[start + i] * window[i];
    const cvec S = fft(seg);
    for (std::size_t k = 0; k < seg_len; ++k) acc[k] += std::norm(S[k]);
    ++count;
  }

  const double norm = 1.0 / (fs * win_sq * static_cast<double>(count));
  Spectrum out;
  out.bin_width = fs / static_cast<double>(seg_len);
  out.freq_bins.resize(seg_len);
  out.psd.resize(seg_len);
  // fftshift to an ascending grid
  const std::size_t half = (seg_len + 1) / 2;
  for (std::size_t k = 0; k < seg_len; ++k) {
    const std::size_t src = (k + half) % seg_len;
    out.freq_bins[k] = fft_bin_freq(src, seg_len, fs);
    out.psd[k] = acc[src] * norm;
  }
  return out;
}

double inband_ripple_db(const Spectrum& s, double band_hz) {
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 0; k < s.freq_bins.size(); ++k) {
    if (std::abs(s.freq_bins[k]) > band_hz) continue;
    lo = std::min(lo, s.psd[k]);
    hi = std::max(hi, s.psd[k]);
  }
  if (hi < lo) throw std::invalid_argument("inband_ripple_db: empty band");
  return 10.0 * std::log10(hi / lo);
}

cvec circular_filter(const cvec& x, const std::vector<double>& taps) {
  if (x.empty()) throw std::invalid_argument("circular_filter: empty input");
  if (taps.empty() || taps.size() > x.size())
    throw std::invalid_argument("circular_filter: bad tap count");
  const std::size_t n = x.size();
  const std::size_t center = (taps.size() - 1) / 2;
  cvec h(n, cdouble{0.0, 0.0});
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const std::size_t idx = (k + n - center) % n;
    h[idx] += taps[k];
  }
  const cvec X = fft(x);
  cvec H = fft(h);
  for (std::size_t k = 0; k < n; ++k) H[k] *= X[k];
  return ifft(H);
}

}  // namespace olink
