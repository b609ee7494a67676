#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fcdram/topology.hpp"
#include "fcdram/variation.hpp"

namespace fcdram {

enum class ActivationPattern { NN, N2N, Single, None };

struct ActivationSet {
  std::uint32_t subarray_f = 0;
  std::uint32_t subarray_l = 0;
  std::vector<std::uint32_t> rows_f;  // ascending
  std::vector<std::uint32_t> rows_l;  // ascending
  ActivationPattern pattern = ActivationPattern::None;

  // "nf:nl" for multi-row patterns, "single" or "none" otherwise.
  std::string label() const;
};

ActivationSet activation_sets(const BankTopology& topology, RowAddress r_f, RowAddress r_l,
                              const ChipProfile& profile);

// Fraction of all (r_f, r_l) in-subarray pairs per pattern label.
std::map<std::string, double> pattern_coverage(const BankTopology& topology, std::uint32_t s_f, std::uint32_t s_l,
                                               const ChipProfile& profile);

}  // namespace fcdram
