#ifndef OLINK_MATH_UTIL_HPP
#define OLINK_MATH_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace olink {

constexpr double kSpeedOfLight = 299792458.0;  // m/s
constexpr double kPlanck = 6.62607015e-34;     // J*s

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Gaussian tail probability Q(x) = P(N(0,1) > x).
inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Inverse complementary error function, valid for y in (0, 2).
// Initial guess from the classic rational normal-quantile approximation,
// polished by Newton steps on erfc.
double erfc_inv(double y);

// Deterministic standard-normal draws from an explicit mt19937_64 engine.
// Box-Muller on raw 53-bit uniforms, so results do not depend on the
// standard library's distribution implementation.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : eng_(seed) {}
  explicit GaussianSource(std::mt19937_64 eng) : eng_(eng) {}

  double operator()();

  // Independent pair (re, im) scaled so that E[|z|^2] = variance.
  void complex_pair(double variance, double& re, double& im);

  std::mt19937_64& engine() { return eng_; }

 private:
  double uniform01();  // in (0, 1)
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable stream derivation: one master seed, many independent substreams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

}  // namespace olink

#endif
