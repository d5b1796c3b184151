#include "olink/channel.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "olink/signal_core.hpp"

namespace olink {

namespace {

// beta2 in s^2/m from D in ps/nm/km at the carrier wavelength.
double beta2_from_D(double dispersion_D, double center_freq) {
  const double lambda = kSpeedOfLight / center_freq;
  return -dispersion_D * 1e-6 * lambda * lambda / (2.0 * M_PI * kSpeedOfLight);
}

// Per-bin linear operator exp(-j beta2/2 w^2 dz) * exp(-alpha/2 dz).
cvec linear_operator(std::size_t n, double sample_rate, double beta2,
                     double alpha_np_per_m, double dz_m) {
  cvec h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 2.0 * M_PI * fft_bin_freq(k, n, sample_rate);
    const double phase = -0.5 * beta2 * w * w * dz_m;
    const double amp = std::exp(-0.5 * alpha_np_per_m * dz_m);
    h[k] = amp * std::exp(cdouble{0.0, phase});
  }
  return h;
}

void apply_in_freq(Waveform& w, const cvec& h) {
  cvec X = fft(w.samples);
  for (std::size_t k = 0; k < X.size(); ++k) X[k] *= h[k];
  w.samples = ifft(X);
}

}  // namespace

double NoiseRecord::osnr_db(double ref_bw_hz) const {
  if (noise_psd_mw_hz <= 0.0)
    throw std::domain_error("NoiseRecord: no noise tracked");
  return lin_to_db(signal_power_mw / (noise_psd_mw_hz * ref_bw_hz));
}

DualPolWaveform propagate_ssmf(const DualPolWaveform& sig,
                               const FiberParams& fp) {
  sig.validate("propagate_ssmf");
  if (fp.length_km < 0.0) throw std::invalid_argument("propagate_ssmf: length < 0");
  if (fp.length_km == 0.0) return sig;
  const double length_m = fp.length_km * 1e3;
  if (fp.step_m <= 0.0 || fp.step_m > length_m)
    throw std::invalid_argument("propagate_ssmf: bad step size");

  const std::size_t n = sig.pol_x.size();
  const double fs = sig.pol_x.sample_rate;
  const double beta2 = beta2_from_D(fp.dispersion_D, sig.pol_x.center_freq);
  const double alpha_np = fp.alpha_db_km * std::log(10.0) / 10.0 / 1e3;  // 1/m

  // Occupied-band check: warn if meaningful energy sits beyond 80% Nyquist.
  {
    const cvec X = fft(sig.pol_x.samples);
    double out_band = 0.0, total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double p = std::norm(X[k]);
      total += p;
      if (std::abs(fft_bin_freq(k, n, fs)) > 0.4 * fs) out_band += p;
    }
    if (total > 0.0 && out_band / total > 1e-3)
      std::cerr << "propagate_ssmf: warning, signal occupies >80% of the "
                   "Nyquist band, dispersion may alias\n";
  }

  const auto n_steps =
      static_cast<std::size_t>(std::ceil(length_m / fp.step_m));
  const double dz = length_m / static_cast<double>(n_steps);

  const cvec half = linear_operator(n, fs, beta2, alpha_np, dz / 2.0);
  const cvec full = linear_operator(n, fs, beta2, alpha_np, dz);

  DualPolWaveform out = sig;
  const double dz_km = dz / 1e3;
  const double nl_coef = fp.gamma * fp.manakov_factor * 1e-3 * dz_km;  // per mW

  auto kerr = [&](DualPolWaveform& s) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p_mw = std::norm(s.pol_x.samples[i]) +
                          std::norm(s.pol_y.samples[i]);
      const cdouble rot = std::exp(cdouble{0.0, nl_coef * p_mw});
      s.pol_x.samples[i] *= rot;
      s.pol_y.samples[i] *= rot;
    }
  };

  apply_in_freq(out.pol_x, half);
  apply_in_freq(out.pol_y, half);
  for (std::size_t s = 0; s < n_steps; ++s) {
    kerr(out);
    const cvec& op = (s + 1 == n_steps) ? half : full;
    apply_in_freq(out.pol_x, op);
    apply_in_freq(out.pol_y, op);
  }
  return out;
}

Waveform compensate_cd(const Waveform& w, double dispersion_D,
                       double length_km) {
  w.validate("compensate_cd");
  const double beta2 = beta2_from_D(dispersion_D, w.center_freq);
  const std::size_t n = w.size();
  cvec X = fft(w.samples);
  for (std::size_t k = 0; k < n; ++k) {
    const double omega = 2.0 * M_PI * fft_bin_freq(k, n, w.sample_rate);
    // conjugate of the propagation phase, unit magnitude
    X[k] *= std::exp(cdouble{0.0, 0.5 * beta2 * omega * omega * length_km * 1e3});
  }
  Waveform out = w;
  out.samples = ifft(X);
  return out;
}

DualPolWaveform compensate_cd(const DualPolWaveform& sig, double dispersion_D,
                              double length_km) {
  return {compensate_cd(sig.pol_x, dispersion_D, length_km),
          compensate_cd(sig.pol_y, dispersion_D, length_km)};
}

DualPolWaveform set_power(const DualPolWaveform& sig, double target_dbm) {
  sig.validate("set_power");
  const double current = sig.power();
  if (current <= 0.0) throw std::invalid_argument("set_power: zero signal");
  const double scale = std::sqrt(dbm_to_mw(target_dbm) / current);
  DualPolWaveform out = sig;
  out.pol_x.scale(scale);
  out.pol_y.scale(scale);
  return out;
}

DualPolWaveform load_noise_to_osnr(const DualPolWaveform& sig,
                                   double target_osnr_db, GaussianSource& rng,
                                   NoiseRecord& record) {
  sig.validate("load_noise_to_osnr");
  if (std::isinf(target_osnr_db)) return sig;  // no-op flag

  if (record.signal_power_mw <= 0.0)
    record.signal_power_mw = sig.power() -
                             record.noise_psd_mw_hz * sig.pol_x.sample_rate;

  const double target_lin = db_to_lin(target_osnr_db);
  const double needed_psd =
      record.signal_power_mw / (target_lin * NoiseRecord::kOsnrRefBw);
  const double add_psd = needed_psd - record.noise_psd_mw_hz;
  if (add_psd <= 0.0)
    throw std::invalid_argument(
        "load_noise_to_osnr: target above current OSNR");

  const double fs = sig.pol_x.sample_rate;
  const double var_per_pol = 0.5 * add_psd * fs;  // pol-balanced split
  DualPolWaveform out = sig;
  for (Waveform* pol : {&out.pol_x, &out.pol_y}) {
    for (auto& s : pol->samples) {
      double re, im;
      rng.complex_pair(var_per_pol, re, im);
      s += cdouble{re, im};
    }
  }
  record.noise_psd_mw_hz = needed_psd;
  return out;
}

double measure_osnr(const NoiseRecord& record) { return record.osnr_db(); }

double measure_osnr_psd(const DualPolWaveform& sig, double signal_band_hz) {
  sig.validate("measure_osnr_psd");
  const double fs = sig.pol_x.sample_rate;
  if (signal_band_hz >= 0.45 * fs)
    throw std::invalid_argument(
        "measure_osnr_psd: no out-of-band floor visible");

  double floor_psd = 0.0;  // both pols, mW/Hz
  for (const Waveform* pol : {&sig.pol_x, &sig.pol_y}) {
    const Spectrum s = estimate_psd(*pol, fs / 512.0);
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < s.freq_bins.size(); ++k) {
      if (std::abs(s.freq_bins[k]) <= signal_band_hz) continue;
      acc += s.psd[k];
      ++cnt;
    }
    if (cnt == 0)
      throw std::invalid_argument("measure_osnr_psd: spectrum fully occupied");
    floor_psd += acc / static_cast<double>(cnt);
  }
  const double noise_power = floor_psd * fs;
  const double sig_power = sig.power() - noise_power;
  if (sig_power <= 0.0)
    throw std::runtime_error("measure_osnr_psd: noise exceeds signal");
  return lin_to_db(sig_power / (floor_psd * NoiseRecord::kOsnrRefBw));
}

DualPolWaveform amplify_with_ase(const DualPolWaveform& sig,
                                 const AmpParams& p, GaussianSource& rng,
                                 NoiseRecord& record) {
  sig.validate("amplify_with_ase");
  if (p.gain_db < 0.0) throw std::invalid_argument("amplify_with_ase: gain < 0");
  const double gain = db_to_lin(p.gain_db);
  DualPolWaveform out = sig;
  const double amp = std::sqrt(gain);
  out.pol_x.scale(amp);
  out.pol_y.scale(amp);
  record.signal_power_mw *= gain;
  record.noise_psd_mw_hz *= gain;

  if (!p.ideal && gain > 1.0) {
    const double nu = sig.pol_x.center_freq;
    const double nf = db_to_lin(p.noise_figure_db);
    const double ase_w_hz = (gain - 1.0) * nf * kPlanck * nu / 2.0;  // per pol
    const double ase_mw_hz = ase_w_hz * 1e3;
    const double fs = sig.pol_x.sample_rate;
    for (Waveform* pol : {&out.pol_x, &out.pol_y}) {
      for (auto& s : pol->samples) {
        double re, im;
        rng.complex_pair(ase_mw_hz * fs, re, im);
        s += cdouble{re, im};
      }
    }
    record.noise_psd_mw_hz += 2.0 * ase_mw_hz;
  }
  return out;
}

}  // namespace olink
