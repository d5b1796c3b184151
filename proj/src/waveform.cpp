#include "olink/waveform.hpp"

#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "olink/math_util.hpp"

namespace olink {

double Waveform::power() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

double Waveform::power_dbm() const { return mw_to_dbm(power()); }

void Waveform::scale(double factor) {
  for (auto& s : samples) s *= factor;
}

void Waveform::validate(const char* where) const {
  if (sample_rate <= 0.0)
    throw std::invalid_argument(std::string(where) + ": sample_rate <= 0");
  if (samples.empty())
    throw std::invalid_argument(std::string(where) + ": empty waveform");
}

double DualPolWaveform::power_dbm() const { return mw_to_dbm(power()); }

void DualPolWaveform::validate(const char* where) const {
  pol_x.validate(where);
  pol_y.validate(where);
  if (pol_x.sample_rate != pol_y.sample_rate ||
      pol_x.size() != pol_y.size())
    throw std::invalid_argument(std::string(where) +
                                ": polarization rate/length mismatch");
}

double Spectrum::total_power() const {
  double acc = 0.0;
  for (double p : psd) acc += p;
  return acc * bin_width;
}

namespace {
void write_pol(std::ofstream& f, const Waveform& w) {
  for (const auto& s : w.samples) {
    const double re = s.real(), im = s.imag();
    f.write(reinterpret_cast<const char*>(&re), sizeof(double));
    f.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
}
}  // namespace

void save_waveform(const std::string& path, const DualPolWaveform& w) {
  w.validate("save_waveform");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_waveform: cannot open " + path);
  write_pol(f, w.pol_x);
  write_pol(f, w.pol_y);
  nlohmann::json sidecar = {{"sample_rate", w.pol_x.sample_rate},
                            {"center_freq", w.pol_x.center_freq},
                            {"pols", 2},
                            {"samples_per_pol", w.pol_x.size()}};
  std::ofstream sf(path + ".json");
  if (!sf) throw std::runtime_error("save_waveform: cannot open " + path + ".json");
  sf << sidecar.dump(2) << "\n";
}

DualPolWaveform load_waveform(const std::string& path) {
  std::ifstream sf(path + ".json");
  if (!sf) throw std::runtime_error("load_waveform: missing sidecar for " + path);
  nlohmann::json sidecar = nlohmann::json::parse(sf);
  const std::size_t n = sidecar.at("samples_per_pol").get<std::size_t>();
  const int pols = sidecar.at("pols").get<int>();
  if (pols != 2) throw std::runtime_error("load_waveform: expected 2 pols");

  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_waveform: cannot open " + path);
  DualPolWaveform w;
  for (Waveform* pol : {&w.pol_x, &w.pol_y}) {
    pol->sample_rate = sidecar.at("sample_rate").get<double>();
    pol->center_freq = sidecar.at("center_freq").get<double>();
    pol->samples.resize(n);
    for (auto& s : pol->samples) {
      double re = 0.0, im = 0.0;
      f.read(reinterpret_cast<char*>(&re), sizeof(double));
      f.read(reinterpret_cast<char*>(&im), sizeof(double));
      s = {re, im};
    }
  }
  if (!f) throw std::runtime_error("load_waveform: truncated file " + path);
  return w;
}

}  // namespace olink
