#include "olink/rx_frontend.hpp"

#include <cmath>
#include <stdexcept>

#include "olink/signal_core.hpp"

namespace olink {

JonesMatrix JonesMatrix::rotation(double theta_rad) {
  JonesMatrix j;
  j.xx = std::cos(theta_rad);
  j.xy = -std::sin(theta_rad);
  j.yx = std::sin(theta_rad);
  j.yy = std::cos(theta_rad);
  return j;
}

JonesMatrix JonesMatrix::pol_swap() {
  JonesMatrix j;
  j.xx = 0.0;
  j.xy = 1.0;
  j.yx = 1.0;
  j.yy = 0.0;
  return j;
}

JonesMatrix JonesMatrix::random_unitary(GaussianSource& rng) {
  // Haar-ish: rotation angle plus independent phases on the branches.
  auto uni = [&] {
    return 0.5 + 0.5 * std::erf(rng() / std::sqrt(2.0));  // in (0,1)
  };
  const double theta = std::asin(std::sqrt(uni()));
  const double phi1 = 2.0 * M_PI * uni();
  const double phi2 = 2.0 * M_PI * uni();
  JonesMatrix j;
  j.xx = std::cos(theta) * std::exp(cdouble{0.0, phi1});
  j.xy = std::sin(theta) * std::exp(cdouble{0.0, phi2});
  j.yx = -std::sin(theta) * std::exp(cdouble{0.0, -phi2});
  j.yy = std::cos(theta) * std::exp(cdouble{0.0, -phi1});
  return j;
}

bool JonesMatrix::is_unitary(double tol) const {
  // rows of U U^dagger
  const cdouble r00 = xx * std::conj(xx) + xy * std::conj(xy);
  const cdouble r01 = xx * std::conj(yx) + xy * std::conj(yy);
  const cdouble r11 = yx * std::conj(yx) + yy * std::conj(yy);
  return std::abs(r00 - 1.0) < tol && std::abs(r11 - 1.0) < tol &&
         std::abs(r01) < tol;
}

DualPolWaveform optical_bandpass(const DualPolWaveform& sig, double bw_nm,
                                 bool super_gaussian) {
  sig.validate("optical_bandpass");
  const double lambda = kSpeedOfLight / sig.pol_x.center_freq;
  const double bw_hz = kSpeedOfLight * bw_nm * 1e-9 / (lambda * lambda);
  const double half_bw = bw_hz / 2.0;

  DualPolWaveform out = sig;
  for (Waveform* pol : {&out.pol_x, &out.pol_y}) {
    cvec X = fft(pol->samples);
    const std::size_t n = X.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double f = fft_bin_freq(k, n, pol->sample_rate);
      double h;
      if (super_gaussian) {
        // |H|^2 = 0.5 at the band edge
        h = std::exp(-0.5 * std::log(2.0) * std::pow(f / half_bw, 6));
      } else {
        h = (std::abs(f) <= half_bw) ? 1.0 : 0.0;
      }
      X[k] *= h;
    }
    pol->samples = ifft(X);
  }
  return out;
}

DualPolWaveform rotate_polarization(const DualPolWaveform& sig,
                                    const JonesMatrix& j,
                                    double extra_delay_ps) {
  sig.validate("rotate_polarization");
  if (!j.is_unitary())
    throw std::invalid_argument("rotate_polarization: non-unitary Jones matrix");
  DualPolWaveform out = sig;
  for (std::size_t i = 0; i < sig.pol_x.size(); ++i) {
    const cdouble ex = sig.pol_x.samples[i];
    const cdouble ey = sig.pol_y.samples[i];
    out.pol_x.samples[i] = j.xx * ex + j.xy * ey;
    out.pol_y.samples[i] = j.yx * ex + j.yy * ey;
  }
  if (extra_delay_ps != 0.0) {
    cvec Y = fft(out.pol_y.samples);
    const std::size_t n = Y.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double f = fft_bin_freq(k, n, out.pol_y.sample_rate);
      Y[k] *= std::exp(cdouble{0.0, -2.0 * M_PI * f * extra_delay_ps * 1e-12});
    }
    out.pol_y.samples = ifft(Y);
  }
  return out;
}

QuadStreams coherent_detect(const DualPolWaveform& sig, const LaserModel& lo,
                            GaussianSource& rng) {
  sig.validate("coherent_detect");
  const std::size_t n = sig.pol_x.size();
  const double fs = sig.pol_x.sample_rate;

  // Unit-amplitude LO; its power only scales the responsivity, which is
  // normalized away below.
  LaserModel lo_unit = lo;
  lo_unit.power_dbm = 0.0;
  const Waveform lo_field = laser_field(lo_unit, n, fs, rng);

  QuadStreams out;
  out.sample_rate = fs;
  out.xi.resize(n);
  out.xq.resize(n);
  out.yi.resize(n);
  out.yq.resize(n);

  double px = 0.0, py = 0.0;
  cvec bx(n), by(n);
  for (std::size_t i = 0; i < n; ++i) {
    bx[i] = sig.pol_x.samples[i] * std::conj(lo_field.samples[i]);
    by[i] = sig.pol_y.samples[i] * std::conj(lo_field.samples[i]);
    px += std::norm(bx[i]);
    py += std::norm(by[i]);
  }
  const double nx = (px > 0.0) ? std::sqrt(n / px) : 1.0;
  const double ny = (py > 0.0) ? std::sqrt(n / py) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.xi[i] = bx[i].real() * nx;
    out.xq[i] = bx[i].imag() * nx;
    out.yi[i] = by[i].real() * ny;
    out.yq[i] = by[i].imag() * ny;
  }
  return out;
}

cdouble bessel4_response(double f, double fc) {
  // Delay-normalized 4th-order Bessel polynomial, corner rescaled so that
  // |H| = -3 dB at fc.
  constexpr double w3db = 2.1139176;
  const cdouble s{0.0, (f / fc) * w3db};
  const cdouble s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  const cdouble den = s4 + 10.0 * s3 + 45.0 * s2 + 105.0 * s + 105.0;
  return 105.0 / den;
}

namespace {

std::vector<double> bessel_and_resample(const std::vector<double>& x,
                                        double fs_in, double bw, double fs_out) {
  Waveform w;
  w.sample_rate = fs_in;
  w.samples.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) w.samples[i] = x[i];

  if (std::isfinite(bw)) {
    cvec X = fft(w.samples);
    const std::size_t n = X.size();
    for (std::size_t k = 0; k < n; ++k)
      X[k] *= bessel4_response(fft_bin_freq(k, n, fs_in), bw);
    w.samples = ifft(X);
  }
  if (fs_out != fs_in) w = resample(w, fs_out);

  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w.samples[i].real();
  return out;
}

void clip_quantize(std::vector<double>& x, double clip_sigma, double enob,
                   GaussianSource& noise) {
  double ms = 0.0;
  for (double v : x) ms += v * v;
  const double rms = std::sqrt(ms / static_cast<double>(x.size()));
  if (rms <= 0.0) return;
  const double amp = clip_sigma * rms;
  const int bits = static_cast<int>(std::ceil(enob));
  const double delta_b = 2.0 * amp / std::pow(2.0, bits);
  const double delta_t = 2.0 * amp / std::pow(2.0, enob);
  const double extra_sd =
      std::sqrt(std::max(0.0, delta_t * delta_t - delta_b * delta_b) / 12.0);
  for (double& v : x) {
    double y = std::clamp(v, -amp, amp);
    double q = (std::floor(y / delta_b) + 0.5) * delta_b;
    q = std::clamp(q, -amp + delta_b / 2.0, amp - delta_b / 2.0);
    if (extra_sd > 0.0) q += extra_sd * noise();
    v = q;
  }
}

}  // namespace

QuadStreams adc_capture(const QuadStreams& streams, const AdcParams& p) {
  if (streams.sample_rate < p.sample_rate)
    throw std::invalid_argument("adc_capture: input rate below scope rate");
  QuadStreams out;
  out.sample_rate = p.sample_rate;
  GaussianSource noise(p.noise_seed);
  int ch = 0;
  for (const std::vector<double>* in :
       {&streams.xi, &streams.xq, &streams.yi, &streams.yq}) {
    std::vector<double> s = bessel_and_resample(*in, streams.sample_rate,
                                                p.analog_bw_hz, p.sample_rate);
    if (s.size() > p.capture_len) s.resize(p.capture_len);
    if (std::isfinite(p.enob)) {
      if (p.enob <= 1.0) throw std::invalid_argument("adc_capture: enob <= 1");
      clip_quantize(s, p.clip_sigma, p.enob, noise);
    }
    switch (ch++) {
      case 0: out.xi = std::move(s); break;
      case 1: out.xq = std::move(s); break;
      case 2: out.yi = std::move(s); break;
      case 3: out.yq = std::move(s); break;
    }
  }
  return out;
}

}  // namespace olink
