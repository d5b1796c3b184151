#ifndef OLINK_MODFORMAT_HPP
#define OLINK_MODFORMAT_HPP

#include <cstdint>
#include <vector>

namespace olink {

// Bipolar m-ASK alphabet, m in {2, 4, 8}. Levels are +-1, +-3, ...,
// +-(m-1) scaled to unit average power; the bit mapping is binary-reflected
// Gray code over ascending levels.
struct ModFormat {
  int m = 2;
  int bits_per_symbol = 1;
  std::vector<double> levels;       // ascending, unit mean square
  std::vector<int> gray_to_index;   // bit pattern (MSB-first value) -> level index
  std::vector<int> index_to_gray;   // level index -> bit pattern

  static ModFormat make(int m);

  double outer_level() const { return levels.back(); }
};

// Bits -> unit-power real symbols. Bit count must divide bits_per_symbol.
std::vector<double> map_bits_to_ask(const std::vector<int>& bits,
                                    const ModFormat& fmt);

// Nearest-level index for a real amplitude; midpoints break toward the
// lower level.
int nearest_level_index(double value, const ModFormat& fmt);

}  // namespace olink

#endif
