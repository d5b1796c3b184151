// Command-line front end: b2b / link sweeps, AWGN theory curves, penalty
// computation and report emission.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "olink/harness.hpp"
#include "olink/signal_core.hpp"

using namespace olink;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool ideal = false;
  std::string format;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--out", o.out_dir, "Output directory");
  sub->add_option("--seed", o.seed, "Master RNG seed")
      ->each([&o](const std::string&) { o.seed_set = true; });
  sub->add_flag("--ideal", o.ideal, "Disable all hardware impairments");
  sub->add_option("--format", o.format, "Modulation format")
      ->check(CLI::IsMember({"2ask", "4ask", "8ask"}));
}

LinkConfig make_config(const CommonOpts& o) {
  LinkConfig cfg;
  if (!o.config_path.empty()) cfg = config_from_json_file(o.config_path);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.ideal) cfg.ideal_hardware = true;
  if (!o.format.empty()) cfg.format_m = o.format[0] - '0';
  return cfg;
}

// Constellation/PSD artifacts come from one extra realization of the last
// sweep point.
void run_and_report(const LinkConfig& cfg, const MetricsTable& table,
                    bool link_mode, const std::string& out_dir) {
  const double last = link_mode ? cfg.launch_sweep_dbm.back()
                                : cfg.osnr_sweep_db.back();
  const std::uint64_t seed = derive_seed(cfg.seed, 1000);
  const RxResult r = link_mode ? run_link_point(cfg, last, seed)
                               : run_b2b_point(cfg, last, seed);
  const TxOutput tx = build_tx(cfg, seed);
  const Spectrum psd = estimate_psd(tx.signal.pol_x, 100e6);
  emit_reports(table, cfg, out_dir, &r, &psd);
}

int run_sweep_cmd(const CommonOpts& o, bool link_mode) {
  LinkConfig cfg = make_config(o);
  if (link_mode && cfg.launch_sweep_dbm.empty())
    cfg.launch_sweep_dbm = {-2, 0, 2, 4, 6, 8, 10, 12};
  if (!link_mode && cfg.osnr_sweep_db.empty())
    cfg.osnr_sweep_db = {10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32};
  const MetricsTable table =
      link_mode ? run_link_sweep(cfg) : run_b2b_sweep(cfg);
  run_and_report(cfg, table, link_mode, o.out_dir);
  std::cout << "wrote " << table.rows.size() << " rows to " << o.out_dir
            << "/sweep.csv\n";
  return 0;
}

int run_theory_cmd(const CommonOpts& o) {
  LinkConfig cfg = make_config(o);
  if (cfg.osnr_sweep_db.empty()) {
    for (double v = 8.0; v <= 34.0; v += 0.25) cfg.osnr_sweep_db.push_back(v);
  }
  const ModFormat fmt = ModFormat::make(cfg.format_m);
  std::filesystem::create_directories(o.out_dir);
  const std::string path = o.out_dir + "/theory.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "osnr_db,q2_db\n";
  for (double v : cfg.osnr_sweep_db) {
    char line[64];
    std::snprintf(line, sizeof line, "%.12g,%.12g\n", v,
                  theory_q2(v, fmt, cfg.symbol_rate));
    out << line;
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_penalty_cmd(const CommonOpts& o, double threshold) {
  LinkConfig cfg = make_config(o);
  if (cfg.osnr_sweep_db.empty())
    cfg.osnr_sweep_db = {8,  10, 12, 14, 16, 18, 20,
                         22, 24, 26, 28, 30, 32};
  const ModFormat fmt = ModFormat::make(cfg.format_m);
  const MetricsTable table = run_b2b_sweep(cfg);
  const double penalty =
      compute_penalty(table, fmt, cfg.symbol_rate, threshold);
  nlohmann::json j;
  j["format_m"] = cfg.format_m;
  j["threshold_q2_db"] = threshold;
  j["theory_osnr_db"] = theory_osnr_for_q2(threshold, fmt, cfg.symbol_rate);
  j["penalty_db"] = penalty;
  std::filesystem::create_directories(o.out_dir);
  std::ofstream(o.out_dir + "/penalty.json") << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_report_cmd(const CommonOpts& o) {
  LinkConfig cfg = make_config(o);
  const bool link_mode = !cfg.launch_sweep_dbm.empty();
  if (!link_mode && cfg.osnr_sweep_db.empty())
    throw std::runtime_error("report: config specifies no sweep");
  const MetricsTable table =
      link_mode ? run_link_sweep(cfg) : run_b2b_sweep(cfg);
  run_and_report(cfg, table, link_mode, o.out_dir);
  std::cout << "reports written to " << o.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"64-GBd dual-polarization bipolar ASK link simulator"};
  app.require_subcommand(1);

  CommonOpts o;
  double threshold = 6.25;

  CLI::App* b2b = app.add_subcommand("b2b", "Back-to-back OSNR sweep");
  CLI::App* link = app.add_subcommand("link", "Fiber launch-power sweep");
  CLI::App* theory = app.add_subcommand("theory", "AWGN theory curve");
  CLI::App* penalty =
      app.add_subcommand("penalty", "OSNR penalty at a Q^2 threshold");
  penalty->add_option("--threshold", threshold, "Q^2 threshold in dB");
  CLI::App* report = app.add_subcommand("report", "Run sweep and emit reports");
  for (CLI::App* sub : {b2b, link, theory, penalty, report})
    add_common(sub, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (b2b->parsed()) return run_sweep_cmd(o, false);
    if (link->parsed()) return run_sweep_cmd(o, true);
    if (theory->parsed()) return run_theory_cmd(o);
    if (penalty->parsed()) return run_penalty_cmd(o, threshold);
    if (report->parsed()) return run_report_cmd(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
