#include "olink/freq_response.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace olink {

namespace {

// Transform used for interpolation: well-defined at DC, logarithmic above.
double log_axis(double f) { return std::log10(1.0 + f / 1e9); }

// Fritsch-Carlson monotone cubic slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n == 1) return d;
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
      const double w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  return d;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& d, double xq) {
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  std::size_t i = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  if (i >= x.size() - 1) i = x.size() - 2;
  const double h = x[i + 1] - x[i];
  const double t = (xq - x[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return y[i] * (2 * t3 - 3 * t2 + 1) + h * d[i] * (t3 - 2 * t2 + t) +
         y[i + 1] * (-2 * t3 + 3 * t2) + h * d[i + 1] * (t3 - t2);
}

}  // namespace

FreqResponse FreqResponse::from_anchors(
    const std::vector<std::pair<double, double>>& anchors) {
  if (anchors.empty())
    throw std::invalid_argument("chip response: no anchors");
  FreqResponse r;
  double prev_f = -1.0, prev_m = 1e300;
  for (const auto& [f, m] : anchors) {
    if (f <= prev_f)
      throw std::invalid_argument("chip response: anchors not ascending");
    if (m > prev_m + 1e-12)
      throw std::invalid_argument("chip response: magnitudes must be non-increasing");
    r.freq_.push_back(f);
    r.mag_db_.push_back(m);
    prev_f = f;
    prev_m = m;
  }
  if (r.freq_.front() != 0.0 || std::abs(r.mag_db_.front()) > 1e-9)
    throw std::invalid_argument("chip response: first anchor must be DC at 0 dB");
  return r;
}

FreqResponse FreqResponse::from_s21_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("from_s21_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("from_s21_csv: empty file " + path);
  const bool has_phase = line.find("phase_deg") != std::string::npos;

  FreqResponse r;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double vals[3] = {0, 0, 0};
    int col = 0;
    while (std::getline(ss, cell, ',') && col < 3) vals[col++] = std::stod(cell);
    if (col < 2) throw std::runtime_error("from_s21_csv: malformed row: " + line);
    if (!r.freq_.empty() && vals[0] <= r.freq_.back())
      throw std::runtime_error("from_s21_csv: rows must ascend in frequency");
    r.freq_.push_back(vals[0]);
    r.mag_db_.push_back(vals[1]);
    if (has_phase) r.phase_rad_.push_back(vals[2] * M_PI / 180.0);
  }
  if (r.freq_.empty() || r.freq_.front() != 0.0)
    throw std::runtime_error("from_s21_csv: grid must start at DC");
  return r;
}

FreqResponse FreqResponse::all_pass() {
  return from_anchors({{0.0, 0.0}});
}

double FreqResponse::mag_db_at(double freq_hz) const {
  freq_hz = std::abs(freq_hz);
  if (freq_.size() == 1) return mag_db_.front();
  if (freq_hz >= freq_.back()) {
    // Continue the final slope in (log10 f, dB).
    const std::size_t n = freq_.size();
    const double f1 = std::max(freq_[n - 2], 1e6), f2 = freq_[n - 1];
    const double slope =
        (mag_db_[n - 1] - mag_db_[n - 2]) / std::log10(f2 / f1);
    return mag_db_.back() + slope * std::log10(freq_hz / f2);
  }
  std::vector<double> u(freq_.size());
  for (std::size_t i = 0; i < freq_.size(); ++i) u[i] = log_axis(freq_[i]);
  const auto d = pchip_slopes(u, mag_db_);
  return pchip_eval(u, mag_db_, d, log_axis(freq_hz));
}

double FreqResponse::phase_rad_at(double freq_hz) const {
  if (phase_rad_.empty())
    throw std::logic_error("phase_rad_at: response has no measured phase");
  const double sign = (freq_hz < 0.0) ? -1.0 : 1.0;
  freq_hz = std::abs(freq_hz);
  if (freq_hz >= freq_.back()) return sign * phase_rad_.back();
  auto it = std::upper_bound(freq_.begin(), freq_.end(), freq_hz);
  std::size_t i = static_cast<std::size_t>(it - freq_.begin());
  if (i == 0) return sign * phase_rad_.front();
  const double t = (freq_hz - freq_[i - 1]) / (freq_[i] - freq_[i - 1]);
  return sign * ((1.0 - t) * phase_rad_[i - 1] + t * phase_rad_[i]);
}

FreqResponse FreqResponse::cascaded_with(const FreqResponse& other) const {
  if (has_measured_phase() || other.has_measured_phase())
    throw std::logic_error("cascaded_with: measured-phase cascade unsupported");
  std::vector<double> grid = freq_;
  grid.insert(grid.end(), other.freq_.begin(), other.freq_.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  FreqResponse r;
  r.freq_ = grid;
  r.mag_db_.reserve(grid.size());
  for (double f : grid) r.mag_db_.push_back(mag_db_at(f) + other.mag_db_at(f));
  return r;
}

cvec minimum_phase_from_magnitude(const std::vector<double>& mag) {
  const std::size_t n = mag.size();
  cvec logmag(n);
  for (std::size_t k = 0; k < n; ++k)
    logmag[k] = std::log(std::max(mag[k], 1e-12));
  cvec ceps = ifft(logmag);
  // Fold the cepstrum: keep c[0] and (for even n) c[n/2], double the
  // causal part, zero the anti-causal part.
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k < n)
      ceps[k] *= 2.0;
    else if (2 * k > n)
      ceps[k] = 0.0;
  }
  const cvec log_h = fft(ceps);
  cvec h(n);
  for (std::size_t k = 0; k < n; ++k)
    h[k] = mag[k] * std::exp(cdouble{0.0, log_h[k].imag()});
  return h;
}

cvec FreqResponse::sample_fft_grid(std::size_t n, double sample_rate) const {
  std::vector<double> mag(n);
  for (std::size_t k = 0; k < n; ++k)
    mag[k] = std::pow(10.0, mag_db_at(fft_bin_freq(k, n, sample_rate)) / 20.0);
  if (!has_measured_phase()) return minimum_phase_from_magnitude(mag);
  cvec h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft_bin_freq(k, n, sample_rate);
    h[k] = mag[k] * std::exp(cdouble{0.0, phase_rad_at(f)});
  }
  return h;
}

Waveform apply_response(const Waveform& w, const FreqResponse& r) {
  w.validate("apply_response");
  const cvec h = r.sample_fft_grid(w.size(), w.sample_rate);
  cvec X = fft(w.samples);
  for (std::size_t k = 0; k < X.size(); ++k) X[k] *= h[k];
  Waveform out = w;
  out.samples = ifft(X);
  return out;
}

}  // namespace olink
