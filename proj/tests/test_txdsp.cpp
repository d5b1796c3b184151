#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "olink/eo_frontend.hpp"
#include "olink/math_util.hpp"
#include "olink/signal_core.hpp"
#include "olink/txdsp.hpp"

using namespace olink;

namespace {

std::vector<int> random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<int> bits(n);
  for (auto& b : bits) b = static_cast<int>(eng() & 1u);
  return bits;
}

}  // namespace

TEST_CASE("modformat levels have unit mean square") {
  for (int m : {2, 4, 8}) {
    const auto fmt = ModFormat::make(m);
    REQUIRE(static_cast<int>(fmt.levels.size()) == m);
    double ms = 0.0;
    for (double l : fmt.levels) ms += l * l;
    ms /= m;
    CHECK(ms == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < fmt.levels.size(); ++k)
      CHECK(fmt.levels[k] > fmt.levels[k - 1]);
  }
}

TEST_CASE("binary mapping is antipodal") {
  const auto fmt = ModFormat::make(2);
  const auto s = map_bits_to_ask({0, 1}, fmt);
  CHECK(s[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quaternary mapping follows the Gray table") {
  const auto fmt = ModFormat::make(4);
  const double n = std::sqrt(5.0);
  const auto s = map_bits_to_ask({0, 0, 0, 1, 1, 1, 1, 0}, fmt);
  CHECK(s[0] == doctest::Approx(-3.0 / n).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(-1.0 / n).epsilon(1e-12));
  CHECK(s[2] == doctest::Approx(1.0 / n).epsilon(1e-12));
  CHECK(s[3] == doctest::Approx(3.0 / n).epsilon(1e-12));
}

TEST_CASE("octal mapping outer levels") {
  const auto fmt = ModFormat::make(8);
  const double n = std::sqrt(21.0);
  const auto s = map_bits_to_ask({0, 0, 0, 1, 0, 0}, fmt);
  CHECK(s[0] == doctest::Approx(-7.0 / n).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(7.0 / n).epsilon(1e-12));
  CHECK(fmt.outer_level() == doctest::Approx(7.0 / n).epsilon(1e-12));
}

TEST_CASE("gray table: adjacent levels differ in exactly one bit") {
  for (int m : {2, 4, 8}) {
    const auto fmt = ModFormat::make(m);
    for (int i = 0; i + 1 < m; ++i) {
      const int diff = fmt.index_to_gray[i] ^ fmt.index_to_gray[i + 1];
      CHECK(diff != 0);
      CHECK((diff & (diff - 1)) == 0);  // power of two -> single bit
    }
    // and the table is a permutation of all patterns
    std::set<int> pats(fmt.index_to_gray.begin(), fmt.index_to_gray.end());
    CHECK(pats.size() == static_cast<std::size_t>(m));
  }
}

TEST_CASE("map round trip via nearest level at zero noise") {
  for (int m : {2, 4, 8}) {
    const auto fmt = ModFormat::make(m);
    std::vector<int> bits;
    for (int pat = 0; pat < m; ++pat)
      for (int b = fmt.bits_per_symbol - 1; b >= 0; --b)
        bits.push_back((pat >> b) & 1);
    const auto syms = map_bits_to_ask(bits, fmt);
    for (int pat = 0; pat < m; ++pat) {
      const int idx = nearest_level_index(syms[pat], fmt);
      CHECK(fmt.index_to_gray[idx] == pat);
    }
  }
}

TEST_CASE("map rejects indivisible bit count") {
  const auto fmt = ModFormat::make(4);
  CHECK_THROWS(map_bits_to_ask({0, 1, 0}, fmt));
  CHECK_THROWS(ModFormat::make(3));
}

TEST_CASE("nearest level midpoints break toward the lower level") {
  const auto fmt = ModFormat::make(4);
  const double mid = 0.5 * (fmt.levels[1] + fmt.levels[2]);
  CHECK(nearest_level_index(mid, fmt) == 1);
  CHECK(nearest_level_index(mid + 1e-9, fmt) == 2);
}

TEST_CASE("default frame layout: 34676 payload symbols") {
  const auto fmt = ModFormat::make(4);
  const auto bits = random_bits(34676 * 2, 3);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  CHECK(frame.payload_symbols.size() == 34676u);
  const HeaderConfig hdr;
  const std::size_t n_blocks = (34676 - 1) / hdr.block_period;
  const std::size_t expect_len =
      34676 + hdr.preamble_len + n_blocks * hdr.block_len;
  CHECK(frame.frame_len() == expect_len);
  CHECK(frame.header_map.size() == n_blocks + 1);
  CHECK(frame.header_map.front().first == 0u);
  CHECK(frame.header_map.front().second ==
        static_cast<std::size_t>(hdr.preamble_len));
}

TEST_CASE("headers are disjoint, in range, and cover the training sequence") {
  const auto fmt = ModFormat::make(8);
  const auto bits = random_bits(34676 * 3, 4);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  std::size_t total = 0, prev_end = 0;
  for (const auto& [off, len] : frame.header_map) {
    CHECK(off >= prev_end);
    CHECK(off + len <= frame.frame_len());
    prev_end = off + len;
    total += len;
  }
  CHECK(total == frame.training_symbols.size());
  CHECK(total + frame.payload_symbols.size() == frame.frame_len());
}

TEST_CASE("training symbols use only the outer levels") {
  const auto fmt = ModFormat::make(8);
  const auto bits = random_bits(34676 * 3, 5);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  const double outer = fmt.outer_level();
  for (const auto& [off, len] : frame.header_map)
    for (std::size_t i = 0; i < len; ++i)
      CHECK(std::abs(std::abs(frame.symbols[off + i]) - outer) < 1e-12);
  // header content is the PRBS mapped 0 -> -outer, 1 -> +outer
  const auto prbs = generate_prbs(5, 0x1F, frame.training_symbols.size());
  for (std::size_t k = 0; k < prbs.size(); ++k)
    CHECK(frame.training_symbols[k] ==
          doctest::Approx(prbs[k] ? outer : -outer).epsilon(1e-12));
}

TEST_CASE("frame construction is deterministic") {
  const auto fmt = ModFormat::make(4);
  const auto bits = random_bits(34676 * 2, 6);
  const auto a = build_frame(bits, fmt, HeaderConfig{});
  const auto b = build_frame(bits, fmt, HeaderConfig{});
  REQUIRE(a.frame_len() == b.frame_len());
  for (std::size_t k = 0; k < a.frame_len(); ++k)
    CHECK(a.symbols[k] == b.symbols[k]);
}

TEST_CASE("payload positions interleave correctly with headers") {
  const auto fmt = ModFormat::make(2);
  const auto bits = random_bits(34676, 7);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  const auto pos = frame.payload_positions();
  REQUIRE(pos.size() == frame.payload_symbols.size());
  for (std::size_t k = 0; k < pos.size(); ++k)
    CHECK(frame.symbols[pos[k]] == frame.payload_symbols[k]);
}

TEST_CASE("build_frame rejects a degenerate layout") {
  const auto fmt = ModFormat::make(2);
  HeaderConfig hdr;
  hdr.block_period = 0;
  CHECK_THROWS(build_frame(random_bits(64, 8), fmt, hdr));
}

TEST_CASE("shape_pulse impulse response equals the RRC taps") {
  const auto fmt = ModFormat::make(2);
  HeaderConfig hdr;
  hdr.preamble_len = 1;
  hdr.block_len = 0;
  hdr.block_period = 1 << 20;
  SymbolFrame frame = build_frame(std::vector<int>(63, 0), fmt, hdr);
  // overwrite with a single unit symbol
  std::fill(frame.symbols.begin(), frame.symbols.end(), 0.0);
  frame.symbols[10] = 1.0;
  const auto taps = design_rrc(0.1, 16, 2);
  const auto w = shape_pulse(frame, 2, taps);
  CHECK(w.sample_rate == 128e9);
  REQUIRE(w.size() == frame.frame_len() * 2);
  const int half = (static_cast<int>(taps.size()) - 1) / 2;
  for (int k = -half; k <= half; ++k) {
    const std::size_t idx = (20 + k + w.size()) % w.size();
    CHECK(w.samples[idx].real() ==
          doctest::Approx(taps[half + k]).epsilon(1e-12));
  }
}

TEST_CASE("shape -> matched filter -> symbol sample loopback") {
  const auto fmt = ModFormat::make(8);
  const auto bits = random_bits(34676 * 3, 9);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  // the 1e-3 bound needs a long filter span; residual error is truncation ISI
  const auto taps = design_rrc(0.1, 256, 2);
  auto w = shape_pulse(frame, 2, taps);
  w.samples = circular_filter(w.samples, taps);
  double max_err = 0.0;
  for (std::size_t k = 0; k < frame.frame_len(); ++k)
    max_err = std::max(max_err,
                       std::abs(w.samples[2 * k].real() - frame.symbols[k]));
  CHECK(max_err < 1e-3);
}

TEST_CASE("shaped spectrum is confined to the RRC band") {
  const auto fmt = ModFormat::make(4);
  const auto bits = random_bits(34676 * 2, 10);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  const auto taps = design_rrc(0.1, 64, 2);
  const auto w = shape_pulse(frame, 2, taps);
  const auto spec = estimate_psd(w, 250e6);
  double peak = 0.0;
  for (double p : spec.psd) peak = std::max(peak, p);
  // -20 dB occupied bandwidth is about 64 * 1.1 = 70.4 GHz
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < spec.psd.size(); ++k) {
    if (spec.psd[k] > 0.01 * peak) {
      lo = std::min(lo, spec.freq_bins[k]);
      hi = std::max(hi, spec.freq_bins[k]);
    }
  }
  CHECK((hi - lo) / 1e9 == doctest::Approx(70.4).epsilon(0.05));
}

TEST_CASE("predistort with an all-pass cascade is the identity") {
  const auto fmt = ModFormat::make(2);
  const auto frame = build_frame(random_bits(1024, 11), fmt, HeaderConfig{});
  const auto w = shape_pulse(frame, 2, design_rrc(0.1, 32, 2));
  const auto out = predistort(w, FreqResponse::all_pass(), 20.0);
  REQUIRE(out.size() == w.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    CHECK(std::abs(out.samples[k] - w.samples[k]) < 1e-9);
}

TEST_CASE("predistort boosts a probe tone by the cascade attenuation") {
  // cascade: -3 dB at 11 GHz anchor
  const auto cascade = FreqResponse::from_anchors(
      {{0.0, 0.0}, {11e9, -3.0}, {42e9, -12.0}});
  Waveform w;
  w.sample_rate = 84e9;
  w.samples.resize(8192);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double t = static_cast<double>(k) / w.sample_rate;
    w.samples[k] = std::exp(cdouble{0.0, 2.0 * M_PI * 11e9 * t});
  }
  const auto out = predistort(w, cascade, 20.0);
  const double gain_db = 10.0 * std::log10(out.power() / w.power());
  CHECK(std::abs(gain_db - 3.0) < 0.05);
}

TEST_CASE("predistorted-then-cascaded chip spectrum is flat within 1 dB") {
  const auto chip = chip_response_model();
  const auto fmt = ModFormat::make(8);
  const auto bits = random_bits(34676 * 3, 12);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  const auto shaped = shape_pulse(frame, 2, design_rrc(0.1, 64, 2));
  const auto pre = predistort(shaped, chip, 20.0);
  const auto post = apply_response(pre, chip);

  const auto ref = estimate_psd(shaped, 500e6);
  const auto got = estimate_psd(post, 500e6);
  REQUIRE(ref.psd.size() == got.psd.size());
  for (std::size_t k = 0; k < ref.psd.size(); ++k) {
    if (std::abs(ref.freq_bins[k]) > 35.2e9) continue;
    const double rip = 10.0 * std::log10(got.psd[k] / ref.psd[k]);
    CHECK(std::abs(rip) < 1.0);
  }
}

TEST_CASE("predistort rejects an in-band null without a boost cap") {
  const auto cascade = FreqResponse::from_anchors(
      {{0.0, 0.0}, {10e9, -400.0}});
  Waveform w;
  w.sample_rate = 84e9;
  w.samples.assign(1024, cdouble{1.0, 0.0});
  CHECK_THROWS(predistort(w, cascade,
                          std::numeric_limits<double>::infinity()));
}

TEST_CASE("dac transparent mode just resamples") {
  const auto fmt = ModFormat::make(4);
  const auto frame = build_frame(random_bits(2048 * 2, 13), fmt, HeaderConfig{});
  const auto w = shape_pulse(frame, 2, design_rrc(0.1, 32, 2));
  DacParams p;
  p.sample_rate = w.sample_rate;
  p.enob = DacParams::enob_off;
  p.include_zoh = false;
  const auto out = dac_convert(w, p);
  REQUIRE(out.size() == w.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    CHECK(std::abs(out.samples[k] - w.samples[k]) < 1e-12);
}

TEST_CASE("dac at 5 effective bits: SNDR in [26, 34] dB on a full-scale frame") {
  const auto fmt = ModFormat::make(8);
  const auto bits = random_bits(34676 * 3, 14);
  const auto frame = build_frame(bits, fmt, HeaderConfig{});
  // full-scale symbol-level waveform: the converter range spans the alphabet
  Waveform w;
  w.sample_rate = 64e9;
  w.samples.reserve(frame.frame_len());
  for (double s : frame.symbols) w.samples.push_back({s, 0.0});
  DacParams p;
  p.sample_rate = w.sample_rate;  // no resampling: compare sample-by-sample
  p.enob = 5.0;
  p.clip_sigma = fmt.outer_level() / std::sqrt(w.power());
  const auto out = dac_convert(w, p);
  double err = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    err += std::norm(out.samples[k] - w.samples[k]);
  err /= static_cast<double>(w.size());
  const double sndr_db = 10.0 * std::log10(w.power() / err);
  CHECK(sndr_db > 26.0);
  CHECK(sndr_db < 34.0);
}

TEST_CASE("dac zero input stays zero") {
  Waveform w;
  w.sample_rate = 84e9;
  w.samples.assign(512, cdouble{0.0, 0.0});
  DacParams p;
  p.sample_rate = 84e9;
  const auto out = dac_convert(w, p);
  for (const auto& s : out.samples) CHECK(std::abs(s) == 0.0);
}

TEST_CASE("dac conversion is deterministic in the noise seed") {
  const auto fmt = ModFormat::make(4);
  const auto frame = build_frame(random_bits(4096 * 2, 15), fmt, HeaderConfig{});
  const auto w = shape_pulse(frame, 2, design_rrc(0.1, 32, 2));
  DacParams p;
  p.enob = 5.0;
  p.noise_seed = 77;
  const auto a = dac_convert(w, p);
  const auto b = dac_convert(w, p);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK(a.samples[k] == b.samples[k]);
}

TEST_CASE("frame layout json round trips the header map") {
  const auto fmt = ModFormat::make(4);
  const auto frame = build_frame(random_bits(34676 * 2, 16), fmt, HeaderConfig{});
  const auto j = frame_layout_json(frame);
  CHECK(j.find("\"frame_len\"") != std::string::npos);
  CHECK(j.find("\"header_map\"") != std::string::npos);
  CHECK(j.find("\"payload_bits\"") != std::string::npos);
}
