#include "fcdram/decoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "fcdram/error.hpp"

namespace fcdram {

namespace {

// Every address that matches `anchor` on bits [low, L).
std::vector<std::uint32_t> block(std::uint32_t anchor, std::uint32_t low) {
  const std::uint32_t size = 1U << low;
  const std::uint32_t base = anchor & ~(size - 1U);
  std::vector<std::uint32_t> rows(size);
  for (std::uint32_t i = 0; i < size; ++i) rows[i] = base + i;
  return rows;
}

}  // namespace

std::string ActivationSet::label() const {
  switch (pattern) {
    case ActivationPattern::Single: return "single";
    case ActivationPattern::None: return "none";
    default: return std::to_string(rows_f.size()) + ":" + std::to_string(rows_l.size());
  }
}

ActivationSet activation_sets(const BankTopology& topology, RowAddress r_f, RowAddress r_l,
                              const ChipProfile& profile) {
  topology.check(r_f);
  topology.check(r_l);
  if (r_f.subarray != r_l.subarray) topology.shared_amp(r_f.subarray, r_l.subarray);

  ActivationSet set;
  set.subarray_f = r_f.subarray;
  set.subarray_l = r_l.subarray;
  if (!profile.supports_sequential_neighbor_activation) {
    set.rows_l = {r_l.row};
    set.pattern = ActivationPattern::None;
    return set;
  }
  if (!profile.supports_simultaneous_neighbor_activation) {
    set.rows_f = {r_f.row};
    set.rows_l = {r_l.row};
    set.pattern = ActivationPattern::Single;
    return set;
  }

  const std::uint32_t a = r_f.row, b = r_l.row;
  const std::uint32_t z =
      std::min(static_cast<std::uint32_t>(std::countr_one(a ^ b)), profile.max_log2_n);
  set.rows_f = block(a, z);
  if (((a >> z) & 1U) != 0 && profile.supports_n2n_pattern) {
    set.rows_l = block(b, z + 1);
    set.pattern = ActivationPattern::N2N;
  } else {
    set.rows_l = block(b, z);
    set.pattern = ActivationPattern::NN;
  }
  return set;
}

std::map<std::string, double> pattern_coverage(const BankTopology& topology, std::uint32_t s_f, std::uint32_t s_l,
                                               const ChipProfile& profile) {
  if (s_f != s_l) topology.shared_amp(s_f, s_l);
  std::map<std::string, double> out;
  if (!profile.supports_sequential_neighbor_activation) {
    out["none"] = 1.0;
    return out;
  }
  if (!profile.supports_simultaneous_neighbor_activation) {
    out["single"] = 1.0;
    return out;
  }
  // Counting argument over d = a XOR b: trailing-ones(d) = j (j < m) fixes j+1
  // low bits of d, leaving 2^(2L-j-1) pairs; the cap m absorbs every pair with
  // at least m trailing ones, 2^(2L-m). Bit j of a is free, so each class splits
  // evenly between N:N and N:2N.
  const std::uint32_t L = topology.row_bits();
  const std::uint32_t m = profile.max_log2_n;
  const double total = std::ldexp(1.0, static_cast<int>(2 * L));
  for (std::uint32_t j = 0; j <= m; ++j) {
    const double count = std::ldexp(1.0, static_cast<int>(j < m ? 2 * L - j - 1 : 2 * L - m));
    const std::string nn = std::to_string(1U << j) + ":" + std::to_string(1U << j);
    if (profile.supports_n2n_pattern) {
      out[nn] += count / 2 / total;
      out[std::to_string(1U << j) + ":" + std::to_string(2U << j)] += count / 2 / total;
    } else {
      out[nn] += count / total;
    }
  }
  return out;
}

}  // namespace fcdram
