#include "olink/modformat.hpp"

#include <cmath>
#include <stdexcept>

namespace olink {

ModFormat ModFormat::make(int m) {
  if (m != 2 && m != 4 && m != 8)
    throw std::invalid_argument("ModFormat: cardinality must be 2, 4 or 8");
  ModFormat f;
  f.m = m;
  f.bits_per_symbol = static_cast<int>(std::lround(std::log2(m)));
  // Mean square of {+-1, +-3, ..., +-(m-1)} is (m^2 - 1) / 3.
  const double norm = std::sqrt((m * m - 1) / 3.0);
  f.levels.resize(m);
  f.gray_to_index.resize(m);
  f.index_to_gray.resize(m);
  for (int i = 0; i < m; ++i) {
    f.levels[i] = (2 * i - (m - 1)) / norm;
    const int gray = i ^ (i >> 1);
    f.index_to_gray[i] = gray;
    f.gray_to_index[gray] = i;
  }
  return f;
}

std::vector<double> map_bits_to_ask(const std::vector<int>& bits,
                                    const ModFormat& fmt) {
  if (bits.size() % fmt.bits_per_symbol != 0)
    throw std::invalid_argument(
        "map_bits_to_ask: bit count not divisible by bits per symbol");
  std::vector<double> symbols(bits.size() / fmt.bits_per_symbol);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    int pattern = 0;
    for (int b = 0; b < fmt.bits_per_symbol; ++b)
      pattern = (pattern << 1) | (bits[s * fmt.bits_per_symbol + b] & 1);
    symbols[s] = fmt.levels[fmt.gray_to_index[pattern]];
  }
  return symbols;
}

int nearest_level_index(double value, const ModFormat& fmt) {
  // Thresholds sit midway between adjacent levels; a value exactly on a
  // threshold decides to the lower level.
  int idx = 0;
  for (int i = 0; i + 1 < fmt.m; ++i) {
    const double threshold = 0.5 * (fmt.levels[i] + fmt.levels[i + 1]);
    if (value > threshold) idx = i + 1;
  }
  return idx;
}

}  // namespace olink
