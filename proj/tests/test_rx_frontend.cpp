#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "olink/channel.hpp"
#include "olink/math_util.hpp"
#include "olink/rx_frontend.hpp"
#include "olink/signal_core.hpp"

using namespace olink;

namespace {

DualPolWaveform white_signal(std::size_t n, double fs, std::uint64_t seed,
                             double power_mw = 1.0) {
  GaussianSource rng(seed);
  DualPolWaveform d;
  d.pol_x.sample_rate = d.pol_y.sample_rate = fs;
  d.pol_x.samples.resize(n);
  d.pol_y.samples.resize(n);
  const double a = std::sqrt(power_mw / 4.0);
  for (std::size_t k = 0; k < n; ++k) {
    d.pol_x.samples[k] = {a * rng(), a * rng()};
    d.pol_y.samples[k] = {a * rng(), a * rng()};
  }
  return d;
}

DualPolWaveform bandlimited(std::size_t n, double fs, std::uint64_t seed,
                            double band_hz) {
  auto d = white_signal(n, fs, seed);
  for (Waveform* w : {&d.pol_x, &d.pol_y}) {
    auto X = fft(w->samples);
    for (std::size_t k = 0; k < X.size(); ++k)
      if (std::abs(fft_bin_freq(k, X.size(), fs)) > band_hz) X[k] = 0.0;
    w->samples = ifft(X);
  }
  return d;
}

}  // namespace

TEST_CASE("generated Jones matrices are unitary") {
  CHECK(JonesMatrix::identity().is_unitary());
  CHECK(JonesMatrix::rotation(0.3).is_unitary());
  CHECK(JonesMatrix::pol_swap().is_unitary());
  GaussianSource rng(61);
  for (int k = 0; k < 20; ++k)
    CHECK(JonesMatrix::random_unitary(rng).is_unitary());
}

TEST_CASE("rotation by 45 degrees mixes the tributaries equally") {
  auto sig = white_signal(1 << 12, 128e9, 62);
  for (auto& s : sig.pol_y.samples) s = 0.0;  // energy only in X
  const auto out =
      rotate_polarization(sig, JonesMatrix::rotation(M_PI / 4.0));
  CHECK(out.pol_x.power() == doctest::Approx(out.pol_y.power()).epsilon(1e-9));
  CHECK(out.pol_x.power() + out.pol_y.power() ==
        doctest::Approx(sig.pol_x.power()).epsilon(1e-9));
}

TEST_CASE("identity rotation is a no-op and power is always preserved") {
  auto sig = white_signal(1 << 10, 128e9, 63);
  const auto id = rotate_polarization(sig, JonesMatrix::identity());
  for (std::size_t k = 0; k < sig.pol_x.size(); ++k)
    CHECK(std::abs(id.pol_x.samples[k] - sig.pol_x.samples[k]) < 1e-12);
  GaussianSource rng(64);
  const auto out =
      rotate_polarization(sig, JonesMatrix::random_unitary(rng));
  CHECK(out.pol_x.power() + out.pol_y.power() ==
        doctest::Approx(sig.pol_x.power() + sig.pol_y.power()).epsilon(1e-9));
}

TEST_CASE("non-unitary matrices are rejected") {
  JonesMatrix j;
  j.xx = {2.0, 0.0};
  CHECK_FALSE(j.is_unitary());
  auto sig = white_signal(64, 128e9, 65);
  CHECK_THROWS(rotate_polarization(sig, j));
}

TEST_CASE("pol swap exchanges the tributaries") {
  auto sig = white_signal(256, 128e9, 66);
  const auto out = rotate_polarization(sig, JonesMatrix::pol_swap());
  for (std::size_t k = 0; k < sig.pol_x.size(); ++k) {
    CHECK(std::abs(std::abs(out.pol_x.samples[k]) -
                   std::abs(sig.pol_y.samples[k])) < 1e-12);
    CHECK(std::abs(std::abs(out.pol_y.samples[k]) -
                   std::abs(sig.pol_x.samples[k])) < 1e-12);
  }
}

TEST_CASE("optical bandpass: 1.4 nm is about 174.8 GHz at the carrier") {
  const double lambda = kSpeedOfLight / 193.4e12;
  const double df = kSpeedOfLight * 1.4e-9 / (lambda * lambda);
  CHECK(df / 1e9 == doctest::Approx(174.7).epsilon(0.005));
}

TEST_CASE("wide bandpass leaves an in-band signal untouched") {
  auto sig = bandlimited(1 << 12, 512e9, 67, 40e9);
  const auto out = optical_bandpass(sig, 1.4);
  const double ratio_db =
      lin_to_db(out.pol_x.power() / sig.pol_x.power());
  CHECK(std::abs(ratio_db) < 0.01);
}

TEST_CASE("bandpass trims white noise by the bandwidth ratio") {
  const double fs = 512e9;
  auto sig = white_signal(1 << 16, fs, 68);
  const auto out = optical_bandpass(sig, 1.4);
  const double lambda = kSpeedOfLight / 193.4e12;
  const double bw = kSpeedOfLight * 1.4e-9 / (lambda * lambda);
  const double expect = bw / fs;
  CHECK(out.pol_x.power() / sig.pol_x.power() ==
        doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("super-Gaussian bandpass is -3 dB at the band edge") {
  const double fs = 512e9;
  const std::size_t n = 1 << 14;
  const double lambda = kSpeedOfLight / 193.4e12;
  const double half_bw = 0.5 * kSpeedOfLight * 1.4e-9 / (lambda * lambda);
  DualPolWaveform tone;
  tone.pol_x.sample_rate = tone.pol_y.sample_rate = fs;
  tone.pol_x.samples.resize(n);
  tone.pol_y.samples.resize(n);
  // place the tone exactly on a bin near the band edge
  const double f_edge =
      std::round(half_bw * n / fs) * fs / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    tone.pol_x.samples[k] =
        std::exp(cdouble{0.0, 2.0 * M_PI * f_edge * k / fs});
    tone.pol_y.samples[k] = tone.pol_x.samples[k];
  }
  const auto out = optical_bandpass(tone, 1.4, /*super_gaussian=*/true);
  const double att_db = lin_to_db(out.pol_x.power() / tone.pol_x.power());
  CHECK(att_db == doctest::Approx(-3.0).epsilon(0.1));
}

TEST_CASE("noiseless homodyne returns the field quadratures") {
  auto sig = bandlimited(1 << 12, 128e9, 69, 35e9);
  LaserModel lo;
  lo.linewidth_hz = 0.0;
  lo.freq_offset_hz = 0.0;
  GaussianSource rng(70);
  const auto q = coherent_detect(sig, lo, rng);
  REQUIRE(q.xi.size() == sig.pol_x.size());
  CHECK(q.sample_rate == 128e9);
  // scaled copies: constant complex ratio between detected and true field
  // each polarization pair is normalized on its own
  const cdouble ref_x =
      cdouble{q.xi[5], q.xq[5]} / sig.pol_x.samples[5];
  const cdouble ref_y =
      cdouble{q.yi[5], q.yq[5]} / sig.pol_y.samples[5];
  for (std::size_t k = 0; k < sig.pol_x.size(); ++k) {
    CHECK(std::abs(cdouble{q.xi[k], q.xq[k]} - ref_x * sig.pol_x.samples[k]) <
          1e-9);
    CHECK(std::abs(cdouble{q.yi[k], q.yq[k]} - ref_y * sig.pol_y.samples[k]) <
          1e-9);
  }
  // unit RMS normalization per polarization pair
  double p = 0.0;
  for (std::size_t k = 0; k < q.xi.size(); ++k)
    p += q.xi[k] * q.xi[k] + q.xq[k] * q.xq[k];
  CHECK(p / static_cast<double>(q.xi.size()) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("homodyne is linear in the signal field") {
  auto sig = bandlimited(1 << 10, 128e9, 71, 35e9);
  LaserModel lo;
  lo.linewidth_hz = 0.0;
  auto scaled = sig;
  for (Waveform* w : {&scaled.pol_x, &scaled.pol_y})
    for (auto& s : w->samples) s *= 3.0;
  GaussianSource r1(72), r2(72);
  const auto a = coherent_detect(sig, lo, r1);
  const auto b = coherent_detect(scaled, lo, r2);
  // normalization removes the common scale entirely
  for (std::size_t k = 0; k < a.xi.size(); ++k)
    CHECK(a.xi[k] == doctest::Approx(b.xi[k]).epsilon(1e-9));
}

TEST_CASE("LO frequency offset rotates the constellation at the beat rate") {
  const double fs = 128e9;
  const std::size_t n = 1 << 10;
  DualPolWaveform cw;
  cw.pol_x.sample_rate = cw.pol_y.sample_rate = fs;
  cw.pol_x.samples.assign(n, cdouble{1.0, 0.0});
  cw.pol_y.samples.assign(n, cdouble{1.0, 0.0});
  LaserModel lo;
  lo.linewidth_hz = 0.0;
  lo.freq_offset_hz = 100e6;
  GaussianSource rng(73);
  const auto q = coherent_detect(cw, lo, rng);
  // phase slope of XI + jXQ
  double slope = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const cdouble z1{q.xi[k], q.xq[k]}, z0{q.xi[k - 1], q.xq[k - 1]};
    slope += std::arg(z1 * std::conj(z0));
  }
  slope /= static_cast<double>(n - 1);
  const double f_est = std::abs(slope) * fs / (2.0 * M_PI);
  CHECK(f_est == doctest::Approx(100e6).epsilon(1e-6));
}

TEST_CASE("bessel corner attenuation is -3 dB within 0.3 dB") {
  const double fc = 33e9;
  const double mag_db = 20.0 * std::log10(std::abs(bessel4_response(fc, fc)));
  CHECK(std::abs(mag_db - (-3.0)) < 0.3);
  // DC gain is unity, response rolls off monotonically
  CHECK(std::abs(bessel4_response(0.0, fc)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(bessel4_response(2.0 * fc, fc)) <
        std::abs(bessel4_response(fc, fc)));
}

TEST_CASE("transparent adc is a resampled pass-through") {
  auto sig = bandlimited(1 << 12, 128e9, 74, 30e9);
  LaserModel lo;
  lo.linewidth_hz = 0.0;
  GaussianSource rng(75);
  const auto q = coherent_detect(sig, lo, rng);
  AdcParams p;
  p.sample_rate = 128e9;
  p.analog_bw_hz = AdcParams::bw_off;
  p.enob = AdcParams::enob_off;
  const auto out = adc_capture(q, p);
  REQUIRE(out.xi.size() == q.xi.size());
  for (std::size_t k = 0; k < q.xi.size(); ++k)
    CHECK(out.xi[k] == doctest::Approx(q.xi[k]).epsilon(1e-9));
}

TEST_CASE("adc resamples 128 to 80 GS/s and limits the capture length") {
  auto sig = bandlimited(1 << 12, 128e9, 76, 30e9);
  LaserModel lo;
  lo.linewidth_hz = 0.0;
  GaussianSource rng(77);
  const auto q = coherent_detect(sig, lo, rng);
  AdcParams p;  // defaults: 80 GS/s, 33 GHz, enob 5.5
  const auto out = adc_capture(q, p);
  CHECK(out.sample_rate == 80e9);
  CHECK(out.xi.size() == (std::size_t{1} << 12) * 80 / 128);
  CHECK(out.xi.size() <= p.capture_len);
}

TEST_CASE("adc quantization noise is bounded by the enob model") {
  auto sig = bandlimited(1 << 13, 128e9, 78, 30e9);
  LaserModel lo;
  lo.linewidth_hz = 0.0;
  GaussianSource rng(79);
  const auto q = coherent_detect(sig, lo, rng);
  AdcParams clean;
  clean.sample_rate = 80e9;
  clean.analog_bw_hz = 33e9;
  clean.enob = AdcParams::enob_off;
  AdcParams quant = clean;
  quant.enob = 5.5;
  const auto a = adc_capture(q, clean);
  const auto b = adc_capture(q, quant);
  double sig_p = 0.0, err_p = 0.0;
  for (std::size_t k = 0; k < a.xi.size(); ++k) {
    sig_p += a.xi[k] * a.xi[k];
    const double e = b.xi[k] - a.xi[k];
    err_p += e * e;
  }
  const double sndr_db = 10.0 * std::log10(sig_p / err_p);
  // 5.5 bits over a +-3.3 sigma range: well above 20 dB, below the
  // 34.9 dB full-scale sine bound
  CHECK(sndr_db > 20.0);
  CHECK(sndr_db < 34.9);
}

TEST_CASE("default capture length is about one million samples") {
  CHECK(AdcParams{}.capture_len == std::size_t{1} << 20);
}
