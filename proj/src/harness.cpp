#include "olink/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace olink {

using nlohmann::json;

double LinkConfig::max_tx_osnr() const {
  switch (format_m) {
    case 2: return max_tx_osnr_db[0];
    case 4: return max_tx_osnr_db[1];
    default: return max_tx_osnr_db[2];
  }
}

FreqResponse LinkConfig::chip_response() const {
  if (!chip_s21_csv.empty()) return FreqResponse::from_s21_csv(chip_s21_csv);
  return FreqResponse::from_anchors(chip_anchors);
}

void LinkConfig::validate() const {
  ModFormat::make(format_m);  // throws on bad cardinality
  if (symbol_rate <= 0.0) throw std::invalid_argument("config: symbol_rate <= 0");
  if (payload_symbols == 0) throw std::invalid_argument("config: empty payload");
  if (sps < 2) throw std::invalid_argument("config: sps < 2");
  auto check_ascending = [](const std::vector<double>& v, const char* name) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] <= v[i - 1])
        throw std::invalid_argument(std::string("config: ") + name +
                                    " must ascend");
  };
  check_ascending(osnr_sweep_db, "osnr_sweep_db");
  check_ascending(launch_sweep_dbm, "launch_sweep_dbm");
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Numeric field that may carry the literal "off" (meaning: disabled, i.e.
// infinity) -- used for converter ENOB and analog bandwidth.
void get_or_off(const json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "off")
    out = std::numeric_limits<double>::infinity();
  else
    out = v.get<double>();
}

}  // namespace

LinkConfig config_from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  json j = json::parse(f);

  LinkConfig c;
  get_if(j, "format_m", c.format_m);
  get_if(j, "symbol_rate", c.symbol_rate);
  get_if(j, "payload_symbols", c.payload_symbols);
  get_if(j, "sps", c.sps);
  get_if(j, "rolloff", c.rolloff);
  get_if(j, "rrc_span", c.rrc_span);
  if (j.contains("header")) {
    const json& h = j["header"];
    get_if(h, "preamble_len", c.header.preamble_len);
    get_if(h, "block_len", c.header.block_len);
    get_if(h, "block_period", c.header.block_period);
    get_if(h, "prbs_order", c.header.prbs_order);
    get_if(h, "prbs_seed", c.header.prbs_seed);
  }
  if (j.contains("dac")) {
    const json& d = j["dac"];
    get_if(d, "sample_rate", c.dac.sample_rate);
    get_or_off(d, "enob", c.dac.enob);
    get_if(d, "clip_sigma", c.dac.clip_sigma);
    get_if(d, "include_zoh", c.dac.include_zoh);
  }
  if (j.contains("adc")) {
    const json& a = j["adc"];
    get_if(a, "sample_rate", c.adc.sample_rate);
    get_or_off(a, "analog_bw_hz", c.adc.analog_bw_hz);
    get_or_off(a, "enob", c.adc.enob);
    get_if(a, "clip_sigma", c.adc.clip_sigma);
    get_if(a, "capture_len", c.adc.capture_len);
  }
  if (j.contains("mzm")) {
    const json& m = j["mzm"];
    get_if(m, "v_pi", c.mzm.v_pi);
    get_if(m, "insertion_loss_db", c.mzm.insertion_loss_db);
    get_if(m, "chirp_alpha", c.mzm.chirp_alpha);
    get_if(m, "target_peak_v", c.mzm.target_peak_v);
    if (m.contains("bias"))
      c.mzm.bias = (m["bias"] == "quadrature") ? MzmBias::quadrature
                                               : MzmBias::null;
  }
  auto read_laser = [&](const char* key, LaserModel& l) {
    if (!j.contains(key)) return;
    const json& jl = j[key];
    get_if(jl, "center_freq", l.center_freq);
    get_if(jl, "power_dbm", l.power_dbm);
    get_if(jl, "linewidth_hz", l.linewidth_hz);
    get_if(jl, "freq_offset_hz", l.freq_offset_hz);
  };
  read_laser("tx_laser", c.tx_laser);
  read_laser("lo", c.lo);
  if (j.contains("fiber")) {
    const json& fj = j["fiber"];
    get_if(fj, "length_km", c.fiber.length_km);
    get_if(fj, "dispersion_D", c.fiber.dispersion_D);
    get_if(fj, "alpha_db_km", c.fiber.alpha_db_km);
    get_if(fj, "gamma", c.fiber.gamma);
    get_if(fj, "step_m", c.fiber.step_m);
    get_if(fj, "manakov_factor", c.fiber.manakov_factor);
  }
  if (j.contains("amp")) {
    const json& aj = j["amp"];
    get_if(aj, "gain_db", c.amp.gain_db);
    get_if(aj, "noise_figure_db", c.amp.noise_figure_db);
    get_if(aj, "ideal", c.amp.ideal);
  }
  if (j.contains("dsp")) {
    const json& dj = j["dsp"];
    if (dj.contains("mimo")) {
      const json& mj = dj["mimo"];
      get_if(mj, "num_taps", c.dsp.mimo.num_taps);
      get_if(mj, "mu_train", c.dsp.mimo.mu_train);
      get_if(mj, "epochs", c.dsp.mimo.epochs);
      get_if(mj, "track_payload", c.dsp.mimo.track_payload);
      get_if(mj, "mu_track", c.dsp.mimo.mu_track);
      get_if(mj, "train_mse_limit", c.dsp.mimo.train_mse_limit);
    }
    if (dj.contains("bps")) {
      get_if(dj["bps"], "num_phases", c.dsp.bps.num_phases);
      get_if(dj["bps"], "block_len", c.dsp.bps.block_len);
    }
    if (dj.contains("dd")) {
      get_if(dj["dd"], "num_taps", c.dsp.dd.num_taps);
      get_if(dj["dd"], "mu", c.dsp.dd.mu);
    }
    get_if(dj, "dd_enable", c.dsp.dd_enable);
    get_if(dj, "cd_compensation", c.dsp.cd_compensation);
  }
  if (j.contains("chip_anchors")) {
    c.chip_anchors.clear();
    for (const auto& a : j["chip_anchors"])
      c.chip_anchors.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
  }
  get_if(j, "chip_s21_csv", c.chip_s21_csv);
  get_if(j, "predistort_enabled", c.predistort_enabled);
  get_if(j, "predistort_max_boost_db", c.predistort_max_boost_db);
  get_if(j, "polmux_delay_symbols", c.polmux_delay_symbols);
  get_if(j, "polmux_split_db", c.polmux_split_db);
  get_if(j, "rx_filter_nm", c.rx_filter_nm);
  get_if(j, "random_sop", c.random_sop);
  get_if(j, "sop_angle_deg", c.sop_angle_deg);
  if (j.contains("max_tx_osnr_db")) {
    const auto& v = j["max_tx_osnr_db"];
    for (int i = 0; i < 3 && i < static_cast<int>(v.size()); ++i)
      c.max_tx_osnr_db[i] = v[i].get<double>();
  }
  get_if(j, "ideal_hardware", c.ideal_hardware);
  get_if(j, "osnr_sweep_db", c.osnr_sweep_db);
  get_if(j, "launch_sweep_dbm", c.launch_sweep_dbm);
  get_if(j, "seed", c.seed);
  get_if(j, "min_bits", c.min_bits);
  get_if(j, "min_errors", c.min_errors);
  get_if(j, "max_bits", c.max_bits);
  c.validate();
  return c;
}

std::string config_to_json(const LinkConfig& c) {
  json j;
  j["format_m"] = c.format_m;
  j["symbol_rate"] = c.symbol_rate;
  j["payload_symbols"] = c.payload_symbols;
  j["sps"] = c.sps;
  j["rolloff"] = c.rolloff;
  j["rrc_span"] = c.rrc_span;
  j["header"] = {{"preamble_len", c.header.preamble_len},
                 {"block_len", c.header.block_len},
                 {"block_period", c.header.block_period},
                 {"prbs_order", c.header.prbs_order},
                 {"prbs_seed", c.header.prbs_seed}};
  j["dac"] = {{"sample_rate", c.dac.sample_rate},
              {"enob", std::isfinite(c.dac.enob) ? json(c.dac.enob) : json("off")},
              {"clip_sigma", c.dac.clip_sigma},
              {"include_zoh", c.dac.include_zoh}};
  j["adc"] = {{"sample_rate", c.adc.sample_rate},
              {"analog_bw_hz", std::isfinite(c.adc.analog_bw_hz)
                                   ? json(c.adc.analog_bw_hz)
                                   : json("off")},
              {"enob", std::isfinite(c.adc.enob) ? json(c.adc.enob) : json("off")},
              {"clip_sigma", c.adc.clip_sigma},
              {"capture_len", c.adc.capture_len}};
  j["mzm"] = {{"v_pi", c.mzm.v_pi},
              {"bias", c.mzm.bias == MzmBias::null ? "null" : "quadrature"},
              {"insertion_loss_db", c.mzm.insertion_loss_db},
              {"chirp_alpha", c.mzm.chirp_alpha},
              {"target_peak_v", c.mzm.target_peak_v}};
  j["tx_laser"] = {{"center_freq", c.tx_laser.center_freq},
                   {"power_dbm", c.tx_laser.power_dbm},
                   {"linewidth_hz", c.tx_laser.linewidth_hz},
                   {"freq_offset_hz", c.tx_laser.freq_offset_hz}};
  j["lo"] = {{"center_freq", c.lo.center_freq},
             {"power_dbm", c.lo.power_dbm},
             {"linewidth_hz", c.lo.linewidth_hz},
             {"freq_offset_hz", c.lo.freq_offset_hz}};
  j["fiber"] = {{"length_km", c.fiber.length_km},
                {"dispersion_D", c.fiber.dispersion_D},
                {"alpha_db_km", c.fiber.alpha_db_km},
                {"gamma", c.fiber.gamma},
                {"step_m", c.fiber.step_m},
                {"manakov_factor", c.fiber.manakov_factor}};
  j["amp"] = {{"gain_db", c.amp.gain_db},
              {"noise_figure_db", c.amp.noise_figure_db},
              {"ideal", c.amp.ideal}};
  j["chip_anchors"] = json::array();
  for (const auto& [f, m] : c.chip_anchors)
    j["chip_anchors"].push_back({f, m});
  j["chip_s21_csv"] = c.chip_s21_csv;
  j["predistort_enabled"] = c.predistort_enabled;
  j["predistort_max_boost_db"] = c.predistort_max_boost_db;
  j["polmux_delay_symbols"] = c.polmux_delay_symbols;
  j["polmux_split_db"] = c.polmux_split_db;
  j["rx_filter_nm"] = c.rx_filter_nm;
  j["random_sop"] = c.random_sop;
  j["sop_angle_deg"] = c.sop_angle_deg;
  j["max_tx_osnr_db"] = {c.max_tx_osnr_db[0], c.max_tx_osnr_db[1],
                         c.max_tx_osnr_db[2]};
  j["ideal_hardware"] = c.ideal_hardware;
  j["osnr_sweep_db"] = c.osnr_sweep_db;
  j["launch_sweep_dbm"] = c.launch_sweep_dbm;
  j["seed"] = c.seed;
  j["min_bits"] = c.min_bits;
  j["min_errors"] = c.min_errors;
  j["max_bits"] = c.max_bits;
  j["dsp"] = {{"mimo",
               {{"num_taps", c.dsp.mimo.num_taps},
                {"mu_train", c.dsp.mimo.mu_train},
                {"epochs", c.dsp.mimo.epochs},
                {"track_payload", c.dsp.mimo.track_payload},
                {"mu_track", c.dsp.mimo.mu_track},
                {"train_mse_limit", c.dsp.mimo.train_mse_limit}}},
              {"bps",
               {{"num_phases", c.dsp.bps.num_phases},
                {"block_len", c.dsp.bps.block_len}}},
              {"dd", {{"num_taps", c.dsp.dd.num_taps}, {"mu", c.dsp.dd.mu}}},
              {"dd_enable", c.dsp.dd_enable},
              {"cd_compensation", c.dsp.cd_compensation}};
  return j.dump(2);
}

namespace {

std::string hash_string(const std::string& s) {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string MetricsTable::to_csv() const {
  std::string out =
      "sweep_value,osnr_db,launch_dbm,ber,q2_db,bits_counted,errors,seed,"
      "ber_below_resolution\n";
  for (const auto& r : rows) {
    out += fmt_double(r.sweep_value) + "," + fmt_double(r.osnr_db) + "," +
           fmt_double(r.launch_dbm) + "," + fmt_double(r.ber) + ",";
    if (r.q2_db) out += fmt_double(*r.q2_db);
    out += "," + std::to_string(r.bits_counted) + "," +
           std::to_string(r.errors) + "," + std::to_string(r.seed) + "," +
           (r.ber_below_resolution ? "1" : "0") + "\n";
  }
  return out;
}

double theory_q2(double osnr_db, const ModFormat& fmt, double symbol_rate) {
  const double snr =
      db_to_lin(osnr_db) * NoiseRecord::kOsnrRefBw / symbol_rate;
  const int m = fmt.m;
  const double coef =
      2.0 * (m - 1) / (m * std::log2(static_cast<double>(m)));
  const double ber = coef * qfunc(std::sqrt(6.0 * snr / (m * m - 1)));
  if (ber >= 0.5)
    throw std::domain_error("theory_q2: OSNR implies BER >= 0.5");
  return ber_to_q2(ber);
}

double theory_osnr_for_q2(double q2_db, const ModFormat& fmt,
                          double symbol_rate) {
  double lo = -10.0, hi = 60.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    double q;
    try {
      q = theory_q2(mid, fmt, symbol_rate);
    } catch (const std::domain_error&) {
      lo = mid;
      continue;
    }
    if (q < q2_db)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double compute_penalty(const MetricsTable& measured, const ModFormat& fmt,
                       double symbol_rate, double threshold_q2_db) {
  // Aggregate rows per sweep point (seeds pooled).
  std::map<double, std::pair<std::size_t, std::size_t>> agg;  // osnr -> (err, bits)
  for (const auto& r : measured.rows) {
    auto& [e, b] = agg[r.osnr_db];
    e += r.errors;
    b += r.bits_counted;
  }
  std::vector<std::pair<double, double>> curve;  // (osnr, q2)
  for (const auto& [osnr, eb] : agg) {
    const auto& [e, b] = eb;
    if (e == 0 || b == 0) continue;
    const double ber = static_cast<double>(e) / static_cast<double>(b);
    if (ber >= 0.5) continue;
    curve.emplace_back(osnr, ber_to_q2(ber));
  }
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto& [o1, q1] = curve[i];
    const auto& [o2, q2] = curve[i + 1];
    if ((q1 - threshold_q2_db) * (q2 - threshold_q2_db) <= 0.0 && q1 != q2) {
      const double t = (threshold_q2_db - q1) / (q2 - q1);
      const double osnr_meas = o1 + t * (o2 - o1);
      return osnr_meas - theory_osnr_for_q2(threshold_q2_db, fmt, symbol_rate);
    }
  }
  throw std::runtime_error("compute_penalty: threshold not bracketed by sweep");
}

RateAccounting rate_accounting(const ModFormat& fmt, double symbol_rate,
                               double overhead_pct) {
  if (overhead_pct < 0.0)
    throw std::invalid_argument("rate_accounting: negative overhead");
  RateAccounting r;
  r.gross_gbps = symbol_rate * fmt.bits_per_symbol * 2.0 / 1e9;
  r.net_gbps = r.gross_gbps / (1.0 + overhead_pct / 100.0);
  return r;
}

void emit_reports(const MetricsTable& table, const LinkConfig& cfg,
                  const std::string& out_dir, const RxResult* constellation,
                  const Spectrum* tx_spectrum) {
  if (table.rows.empty())
    throw std::invalid_argument("emit_reports: empty metrics table");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec && !fs::exists(out_dir))
    throw std::runtime_error("emit_reports: cannot create " + out_dir);

  auto write_file = [&](const std::string& name, const std::string& content) {
    const std::string path = out_dir + "/" + name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_reports: cannot write " + path);
    f << content;
  };

  write_file("sweep.csv", table.to_csv());

  const ModFormat fmt = ModFormat::make(cfg.format_m);
  json summary;
  summary["config_hash"] = table.config_hash;
  summary["tool_version"] = table.tool_version;
  const auto sd = rate_accounting(fmt, cfg.symbol_rate, 28.0);
  const auto hd = rate_accounting(fmt, cfg.symbol_rate, 12.0);
  summary["rates"] = {{"gross_gbps", sd.gross_gbps},
                      {"net_gbps_sdfec_28pct", sd.net_gbps},
                      {"net_gbps_hdfec_12pct", hd.net_gbps}};
  double best_q2 = -1e300;
  for (const auto& r : table.rows)
    if (r.q2_db) best_q2 = std::max(best_q2, *r.q2_db);
  if (best_q2 > -1e299) {
    summary["best_q2_db"] = best_q2;
    summary["margin_sdfec_db"] = best_q2 - 6.25;
    summary["margin_hdfec_db"] = best_q2 - 8.53;
  }
  try {
    summary["osnr_penalty_at_sdfec_db"] =
        compute_penalty(table, fmt, cfg.symbol_rate);
  } catch (const std::exception&) {
    // sweep does not bracket the threshold; leave the field out
  }
  // Reference values from the published experiment, metadata only.
  summary["reference"] = {{"optimum_launch_dbm", 7.4},
                          {"peak_q2_after_120km_db", 8.9},
                          {"sdfec_threshold_q2_db", 6.25},
                          {"hdfec_threshold_q2_db", 8.53}};
  write_file("summary.json", summary.dump(2) + "\n");

  if (constellation) {
    std::string csv = "pol,symbol_index,I,Q,decided_level\n";
    const auto dump_pol = [&](const char* pol, const cvec& syms) {
      for (std::size_t i = 0; i < syms.size(); ++i) {
        const int idx = nearest_level_index(syms[i].real(), fmt);
        csv += std::string(pol) + "," + std::to_string(i) + "," +
               fmt_double(syms[i].real()) + "," + fmt_double(syms[i].imag()) +
               "," + fmt_double(fmt.levels[idx]) + "\n";
      }
    };
    dump_pol("x", constellation->symbols_x);
    dump_pol("y", constellation->symbols_y);
    write_file("constellation.csv", csv);
  }
  if (tx_spectrum) {
    std::string csv = "freq_hz,psd_mw_per_hz,psd_db\n";
    for (std::size_t k = 0; k < tx_spectrum->freq_bins.size(); ++k) {
      const double p = tx_spectrum->psd[k];
      csv += fmt_double(tx_spectrum->freq_bins[k]) + "," + fmt_double(p) +
             "," + fmt_double(10.0 * std::log10(std::max(p, 1e-300))) + "\n";
    }
    write_file("tx_psd.csv", csv);
  }
}

std::string config_hash_for(const LinkConfig& cfg);
std::string config_hash_for(const LinkConfig& cfg) {
  return hash_string(config_to_json(cfg));
}

}  // namespace olink
