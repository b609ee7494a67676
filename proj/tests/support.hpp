#pragma once

#include <string>

#include "fcdram/engine.hpp"
#include "fcdram/harness.hpp"
#include "fcdram/rng.hpp"

namespace testing {

inline fcdram::TopologyConfig shape(std::uint32_t rows = 32, std::uint32_t cols = 16, std::uint32_t subarrays = 2) {
  fcdram::TopologyConfig c;
  c.num_subarrays = subarrays;
  c.rows_per_subarray = rows;
  c.columns = cols;
  return c;
}

inline fcdram::ChipProfile ideal_profile() { return fcdram::builtin_profile("ideal"); }

inline fcdram::Engine engine(const fcdram::ChipProfile& p = ideal_profile(), fcdram::TopologyConfig c = shape(),
                             std::uint64_t seed = 1) {
  return fcdram::make_engine(c, p, seed);
}

inline fcdram::Bits random_bits(std::size_t n, std::uint64_t seed) {
  fcdram::Bits b(n);
  fcdram::Rng rng(seed);
  rng.fill_bits(b);
  return b;
}

}  // namespace testing
