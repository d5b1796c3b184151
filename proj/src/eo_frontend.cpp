#include "olink/eo_frontend.hpp"

#include <cmath>
#include <stdexcept>

namespace olink {

FreqResponse chip_response_model(
    const std::vector<std::pair<double, double>>& anchors) {
  return FreqResponse::from_anchors(anchors);
}

Waveform apply_driver(const Waveform& w, const MzmParams& p,
                      const FreqResponse& chip) {
  w.validate("apply_driver");
  const double in_rms = std::sqrt(w.power());
  if (in_rms <= 0.0) throw std::invalid_argument("apply_driver: silent input");

  Waveform filtered = apply_response(w, chip);
  double peak = 0.0;
  for (const auto& s : filtered.samples) peak = std::max(peak, std::abs(s));
  const double scale = p.target_peak_v / peak;

  const double out_rms = std::sqrt(filtered.power()) * scale;
  const double gain_db = 20.0 * std::log10(out_rms / in_rms);
  if (gain_db > p.drive_gain_limit_db)
    throw std::invalid_argument("apply_driver: swing requires gain above limit");

  filtered.scale(scale);
  return filtered;
}

Waveform laser_field(const LaserModel& laser, std::size_t n,
                     double sample_rate, GaussianSource& rng) {
  if (laser.linewidth_hz < 0.0)
    throw std::invalid_argument("laser_field: negative linewidth");
  Waveform w;
  w.sample_rate = sample_rate;
  w.center_freq = laser.center_freq;
  w.samples.resize(n);
  const double amp = std::sqrt(dbm_to_mw(laser.power_dbm));
  const double dt = 1.0 / sample_rate;
  const double step_sigma =
      std::sqrt(2.0 * M_PI * laser.linewidth_hz * dt);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double total =
        phase + 2.0 * M_PI * laser.freq_offset_hz * dt * static_cast<double>(i);
    w.samples[i] = amp * std::exp(cdouble{0.0, total});
    phase += step_sigma * rng();
  }
  return w;
}

Waveform mzm_modulate(const Waveform& drive, const LaserModel& laser,
                      const MzmParams& p, GaussianSource& rng) {
  drive.validate("mzm_modulate");
  if (p.v_pi <= 0.0) throw std::invalid_argument("mzm_modulate: v_pi <= 0");

  const Waveform carrier =
      laser_field(laser, drive.size(), drive.sample_rate, rng);
  const double il = std::pow(10.0, -p.insertion_loss_db / 20.0);
  const double bias_shift = (p.bias == MzmBias::quadrature) ? M_PI / 4.0 : 0.0;

  Waveform out;
  out.sample_rate = drive.sample_rate;
  out.center_freq = laser.center_freq;
  out.samples.resize(drive.size());
  for (std::size_t i = 0; i < drive.size(); ++i) {
    const double arg = M_PI * drive.samples[i].real() / (2.0 * p.v_pi);
    cdouble field = carrier.samples[i] * std::sin(arg + bias_shift) * il;
    if (p.chirp_alpha != 0.0)
      field *= std::exp(cdouble{0.0, p.chirp_alpha * arg});
    out.samples[i] = field;
  }
  return out;
}

DualPolWaveform polmux(const Waveform& field, int delay_symbols,
                       double split_loss_db, double symbol_rate) {
  field.validate("polmux");
  const double sps = field.sample_rate / symbol_rate;
  const double delay_samples_f = delay_symbols * sps;
  const auto delay_samples = static_cast<long long>(std::llround(delay_samples_f));
  if (std::abs(delay_samples_f - static_cast<double>(delay_samples)) > 1e-6)
    throw std::invalid_argument(
        "polmux: delay is not an integer sample count, resample first");

  const double split = std::pow(10.0, -split_loss_db / 20.0);
  DualPolWaveform out;
  out.pol_x = field;
  out.pol_x.scale(split);
  out.pol_y = field;
  out.pol_y.scale(split);
  const std::size_t n = field.size();
  const std::size_t d =
      static_cast<std::size_t>(((delay_samples % static_cast<long long>(n)) + n) % n);
  for (std::size_t i = 0; i < n; ++i)
    out.pol_y.samples[(i + d) % n] = split * field.samples[i];
  return out;
}

}  // namespace olink
