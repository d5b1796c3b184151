#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "olink/math_util.hpp"
#include "olink/signal_core.hpp"

using namespace olink;

TEST_CASE("prbs5 has period 31") {
  const auto bits = generate_prbs(5, 0x1F, 31 * 4);
  for (std::size_t k = 0; k + 31 < bits.size(); ++k)
    CHECK(bits[k] == bits[k + 31]);
  // and no shorter period
  for (std::size_t p : {std::size_t{1}, std::size_t{7}}) {
    bool shorter = true;
    for (std::size_t k = 0; k + p < 31; ++k)
      if (bits[k] != bits[k + p]) { shorter = false; break; }
    CHECK_FALSE(shorter);
  }
}

TEST_CASE("prbs5 second period repeats the first") {
  const auto bits = generate_prbs(5, 0x11, 62);
  for (std::size_t k = 0; k < 31; ++k) CHECK(bits[k] == bits[k + 31]);
}

TEST_CASE("prbs5 period is balanced: 16 ones, 15 zeros") {
  const auto bits = generate_prbs(5, 0x1F, 31);
  const int ones = std::accumulate(bits.begin(), bits.end(), 0);
  CHECK(ones == 16);
}

TEST_CASE("prbs other orders are maximal length") {
  for (int order : {7, 9, 11, 15}) {
    const std::size_t period = (std::size_t{1} << order) - 1;
    const auto bits = generate_prbs(order, 1, 2 * period);
    for (std::size_t k = 0; k < period; ++k) {
      REQUIRE(bits[k] == bits[k + period]);
    }
    const int ones =
        std::accumulate(bits.begin(), bits.begin() + period, 0);
    CHECK(ones == static_cast<int>(period + 1) / 2);
  }
}

TEST_CASE("prbs rejects zero seed") {
  CHECK_THROWS(generate_prbs(5, 0, 10));
  CHECK_THROWS(generate_prbs(5, 0x20, 10));  // reduces to zero in-register
  CHECK_THROWS(generate_prbs(4, 1, 10));     // unsupported order
}

TEST_CASE("rrc taps are symmetric, unit energy") {
  const auto taps = design_rrc(0.1, 64, 2);
  REQUIRE(taps.size() == 64u * 2u + 1u);
  for (std::size_t k = 0; k < taps.size(); ++k)
    CHECK(taps[k] == doctest::Approx(taps[taps.size() - 1 - k]).epsilon(1e-12));
  double energy = 0.0;
  for (double t : taps) energy += t * t;
  CHECK(energy == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rrc cascaded with itself is ISI-free at symbol spacing") {
  const int sps = 2;
  const auto taps = design_rrc(0.1, 64, sps);
  const std::size_t n = taps.size();
  // full linear convolution
  std::vector<double> rc(2 * n - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rc[i + j] += taps[i] * taps[j];
  const std::size_t mid = n - 1;
  const double center = rc[mid];
  for (int k = 1; k <= 40; ++k) {
    CHECK(std::abs(rc[mid + k * sps]) < 1e-3 * center);
    CHECK(std::abs(rc[mid - k * sps]) < 1e-3 * center);
  }
}

TEST_CASE("rrc singularity handling near t = Ts/(4 beta)") {
  // rolloff 0.25, sps 4: t = 1/(4*0.25) = 1 symbol = sample offset 4.
  const auto taps = design_rrc(0.25, 16, 4);
  const std::size_t mid = (taps.size() - 1) / 2;
  const double beta = 0.25;
  const double a = M_PI / (4.0 * beta);
  const double expect = (beta / std::sqrt(2.0)) *
                        ((1.0 + 2.0 / M_PI) * std::sin(a) +
                         (1.0 - 2.0 / M_PI) * std::cos(a));
  // compare against the closed-form limit, up to the common normalization
  const double t0 = 1.0 - beta + 4.0 * beta / M_PI;  // unnormalized center
  CHECK(taps[mid + 4] / taps[mid] == doctest::Approx(expect / t0).epsilon(1e-6));
}

TEST_CASE("rrc rejects bad parameters") {
  CHECK_THROWS(design_rrc(0.0, 64, 2));
  CHECK_THROWS(design_rrc(1.5, 64, 2));
  CHECK_THROWS(design_rrc(0.1, 63, 2));  // odd span
  CHECK_THROWS(design_rrc(0.1, 64, 1));
}

namespace {

Waveform tone(double freq, double fs, std::size_t n, double amp = 1.0) {
  Waveform w;
  w.sample_rate = fs;
  w.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    w.samples[k] = amp * std::exp(cdouble{0.0, 2.0 * M_PI * freq * k / fs});
  return w;
}

}  // namespace

TEST_CASE("resample identity") {
  auto w = tone(1e9, 16e9, 1024);
  const auto out = resample(w, 16e9);
  REQUIRE(out.size() == w.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    CHECK(std::abs(out.samples[k] - w.samples[k]) < 1e-12);
}

TEST_CASE("resample round trip on a band-limited tone") {
  auto w = tone(1e9, 16e9, 4096);
  auto up = resample(w, 32e9);
  CHECK(up.size() == 8192);
  CHECK(up.sample_rate == 32e9);
  auto down = resample(up, 16e9);
  REQUIRE(down.size() == w.size());
  double max_err = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    max_err = std::max(max_err, std::abs(down.samples[k] - w.samples[k]));
  CHECK(max_err < 1e-6);
}

TEST_CASE("resample preserves tone frequency and power") {
  auto w = tone(3e9, 64e9, 4096, 2.0);
  auto out = resample(w, 96e9);
  CHECK(out.power() == doctest::Approx(w.power()).epsilon(1e-9));
  // instantaneous phase advance per second unchanged
  const cdouble r = out.samples[100] * std::conj(out.samples[99]);
  const double f_est = std::arg(r) / (2.0 * M_PI) * 96e9;
  CHECK(f_est == doctest::Approx(3e9).epsilon(1e-9));
}

TEST_CASE("resample is linear") {
  std::mt19937_64 eng(11);
  auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };
  Waveform w1, w2;
  w1.sample_rate = w2.sample_rate = 10e9;
  for (int k = 0; k < 500; ++k) {
    w1.samples.push_back({u01() - 0.5, u01() - 0.5});
    w2.samples.push_back({u01() - 0.5, u01() - 0.5});
  }
  Waveform sum = w1;
  for (int k = 0; k < 500; ++k)
    sum.samples[k] = 2.0 * w1.samples[k] + 3.0 * w2.samples[k];
  auto a = resample(w1, 25e9);
  auto b = resample(w2, 25e9);
  auto c = resample(sum, 25e9);
  for (std::size_t k = 0; k < c.size(); ++k)
    CHECK(std::abs(c.samples[k] - 2.0 * a.samples[k] - 3.0 * b.samples[k]) <
          1e-9);
}

TEST_CASE("welch psd of white noise is flat and Parseval-consistent") {
  GaussianSource rng(7);
  Waveform w;
  w.sample_rate = 50e9;
  w.samples.resize(1 << 19);
  const double power = 2.5;
  for (auto& s : w.samples) {
    double re, im;
    rng.complex_pair(power, re, im);
    s = {re, im};
  }
  const auto spec = estimate_psd(w, 500e6);
  // Parseval within 1%
  CHECK(spec.total_power() == doctest::Approx(w.power()).epsilon(0.01));
  // flat within 0.2 dB after averaging, away from edges
  const double expect = power / 50e9;
  for (std::size_t k = 0; k < spec.psd.size(); ++k) {
    const double dev = 10.0 * std::log10(spec.psd[k] / expect);
    CHECK(std::abs(dev) < 0.2);
  }
}

TEST_CASE("welch psd integrates a tone to its power") {
  auto w = tone(2e9, 40e9, 1 << 16, std::sqrt(3.0));
  const auto spec = estimate_psd(w, 100e6);
  CHECK(spec.total_power() == doctest::Approx(3.0).epsilon(0.01));
  // the peak bin is at +2 GHz
  std::size_t peak = 0;
  for (std::size_t k = 1; k < spec.psd.size(); ++k)
    if (spec.psd[k] > spec.psd[peak]) peak = k;
  CHECK(std::abs(spec.freq_bins[peak] - 2e9) < 2 * 100e6);
}

TEST_CASE("circular filter has zero net delay") {
  // center-tapped FIR applied circularly: an impulse stays in place
  std::vector<double> taps = {0.25, 0.5, 1.0, 0.5, 0.25};
  cvec x(64, cdouble{0.0, 0.0});
  x[10] = 1.0;
  const auto y = circular_filter(x, taps);
  REQUIRE(y.size() == x.size());
  CHECK(std::abs(y[10] - cdouble{1.0, 0.0}) < 1e-12);
  CHECK(std::abs(y[9] - cdouble{0.5, 0.0}) < 1e-12);
  CHECK(std::abs(y[11] - cdouble{0.5, 0.0}) < 1e-12);
  CHECK(std::abs(y[8] - cdouble{0.25, 0.0}) < 1e-12);
  CHECK(std::abs(y[12] - cdouble{0.25, 0.0}) < 1e-12);
}

TEST_CASE("gaussian source moments and determinism") {
  GaussianSource a(123), b(123);
  double mean = 0.0, var = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double v = a();
    mean += v;
    var += v * v;
    CHECK(v == b());
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("derive_seed produces distinct streams") {
  CHECK(derive_seed(1, 1) != derive_seed(1, 2));
  CHECK(derive_seed(1, 1) != derive_seed(2, 1));
  CHECK(derive_seed(1, 1) == derive_seed(1, 1));
}

TEST_CASE("erfc_inv round trip") {
  for (double y : {1e-12, 1e-6, 1e-3, 0.05, 0.5, 1.0, 1.5, 1.9, 1.999}) {
    const double x = erfc_inv(y);
    CHECK(std::erfc(x) == doctest::Approx(y).epsilon(1e-10));
  }
  CHECK(erfc_inv(1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("waveform file round trip") {
  DualPolWaveform w;
  w.pol_x.sample_rate = w.pol_y.sample_rate = 128e9;
  GaussianSource rng(5);
  for (int k = 0; k < 257; ++k) {
    w.pol_x.samples.push_back({rng(), rng()});
    w.pol_y.samples.push_back({rng(), rng()});
  }
  const std::string path = "wave_roundtrip_test.bin";
  save_waveform(path, w);
  const auto r = load_waveform(path);
  REQUIRE(r.pol_x.size() == w.pol_x.size());
  CHECK(r.pol_x.sample_rate == w.pol_x.sample_rate);
  for (std::size_t k = 0; k < w.pol_x.size(); ++k) {
    CHECK(r.pol_x.samples[k] == w.pol_x.samples[k]);
    CHECK(r.pol_y.samples[k] == w.pol_y.samples[k]);
  }
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}
