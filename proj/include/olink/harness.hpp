#ifndef OLINK_HARNESS_HPP
#define OLINK_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "olink/channel.hpp"
#include "olink/eo_frontend.hpp"
#include "olink/rx_frontend.hpp"
#include "olink/rxdsp.hpp"
#include "olink/txdsp.hpp"

namespace olink {

struct DspConfig {
  MimoConfig mimo;
  BpsConfig bps;
  DdConfig dd;
  bool dd_enable = true;
  bool cd_compensation = false;  // enabled automatically for link runs
};

// Everything one experiment needs. Defaults reproduce the standard
// 64-GBd dual-polarization setup.
struct LinkConfig {
  int format_m = 8;
  double symbol_rate = 64e9;
  std::size_t payload_symbols = 34676;
  int sps = 2;
  double rolloff = 0.1;
  int rrc_span = 64;

  HeaderConfig header;
  DacParams dac;
  AdcParams adc;
  MzmParams mzm;
  LaserModel tx_laser;
  LaserModel lo;
  FiberParams fiber;
  AmpParams amp;
  DspConfig dsp;

  std::vector<std::pair<double, double>> chip_anchors = {
      {0.0, 0.0}, {11e9, -3.0}, {35e9, -6.0}};
  std::string chip_s21_csv;  // measured S21 takes precedence when set
  bool predistort_enabled = true;
  double predistort_max_boost_db = 20.0;

  int polmux_delay_symbols = 1094;
  double polmux_split_db = 3.0;
  double rx_filter_nm = 1.4;
  bool random_sop = true;       // seeded random unitary rotation per run
  double sop_angle_deg = 0.0;   // used when random_sop is false

  // Per-format maximum transmitter OSNR (dB) for m = 2, 4, 8.
  double max_tx_osnr_db[3] = {34.0, 32.5, 32.9};

  bool ideal_hardware = false;  // linear E/O, transparent converters, no PN

  std::vector<double> osnr_sweep_db;     // b2b
  std::vector<double> launch_sweep_dbm;  // link

  std::uint64_t seed = 1;
  std::size_t min_bits = 100000;
  std::size_t min_errors = 100;
  std::size_t max_bits = 10000000;

  double max_tx_osnr() const;
  FreqResponse chip_response() const;
  void validate() const;
};

LinkConfig config_from_json_file(const std::string& path);
std::string config_to_json(const LinkConfig& cfg);

struct MetricsRow {
  double sweep_value = 0.0;
  double osnr_db = 0.0;
  double launch_dbm = 0.0;
  double ber = 0.0;
  std::optional<double> q2_db;
  std::size_t bits_counted = 0;
  std::size_t errors = 0;
  std::uint64_t seed = 0;
  bool ber_below_resolution = false;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
  std::string config_hash;
  std::string tool_version = "olinksim 1.0";

  std::string to_csv() const;
};

// One transmitter realization: frame plus the launched dual-pol field.
struct TxOutput {
  SymbolFrame frame;
  DualPolWaveform signal;  // at the DSP rate (sps * symbol_rate)
};

struct RxResult {
  BerCount ber;
  cvec symbols_x, symbols_y;       // slicer-input symbols, payload + headers
  std::vector<double> phase_track;
  EqualizerState mimo_state;
};

TxOutput build_tx(const LinkConfig& cfg, std::uint64_t seed);

// Full offline receiver on a captured signal (band-pass, detection,
// digitization, resampling, optional CD compensation, matched filter,
// sync, 2x2 DA-MIMO, BPS, optional 4x4 DD, decision, BER).
RxResult run_rx(const LinkConfig& cfg, const DualPolWaveform& sig,
                const SymbolFrame& frame, std::uint64_t seed);

// One back-to-back point at a target OSNR (single seed realization).
RxResult run_b2b_point(const LinkConfig& cfg, double osnr_db,
                       std::uint64_t seed);

// One fiber point at a target launch power (single seed realization).
RxResult run_link_point(const LinkConfig& cfg, double launch_dbm,
                        std::uint64_t seed);

MetricsTable run_b2b_sweep(const LinkConfig& cfg);
MetricsTable run_link_sweep(const LinkConfig& cfg);

// AWGN reference: Q^2 from OSNR via
//   SNR = OSNR * 12.5 GHz / R_s (dual-polarization convention)
//   BER = 2(m-1)/(m log2 m) Q(sqrt(6 SNR / (m^2 - 1)))
double theory_q2(double osnr_db, const ModFormat& fmt, double symbol_rate);
// Inverse: OSNR (dB) at which the theory curve hits the given Q^2.
double theory_osnr_for_q2(double q2_db, const ModFormat& fmt,
                          double symbol_rate);

// OSNR penalty at a Q^2 threshold: measured crossing minus theory crossing.
double compute_penalty(const MetricsTable& measured, const ModFormat& fmt,
                       double symbol_rate, double threshold_q2_db = 6.25);

struct RateAccounting {
  double gross_gbps = 0.0;
  double net_gbps = 0.0;
};
RateAccounting rate_accounting(const ModFormat& fmt, double symbol_rate,
                               double overhead_pct);

// CSV + JSON summary emission; byte-stable for identical config and seeds.
void emit_reports(const MetricsTable& table, const LinkConfig& cfg,
                  const std::string& out_dir,
                  const RxResult* constellation = nullptr,
                  const Spectrum* tx_spectrum = nullptr);

}  // namespace olink

#endif
