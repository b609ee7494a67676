#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fcdram {

struct TopologyConfig {
  std::uint32_t num_subarrays = 2;
  std::uint32_t rows_per_subarray = 512;
  std::uint32_t columns = 1024;
  bool scramble_rows = false;
  std::uint64_t scramble_seed = 0;
};

struct RowAddress {
  std::uint32_t subarray = 0;
  std::uint32_t row = 0;  // logical in-subarray address
  friend bool operator==(const RowAddress&, const RowAddress&) = default;
  friend auto operator<=>(const RowAddress&, const RowAddress&) = default;
};

enum class Region { Close, Middle, Far };
const char* to_string(Region region);

// Amp array a sits between subarray a-1 (its top terminal) and subarray a (its
// bottom terminal); arrays 0 and S are the bank edges. Each array serves one
// column parity, alternating per array, so the arrays above and below a
// subarray together cover every column exactly once.
class BankTopology {
 public:
  static BankTopology build(const TopologyConfig& config);

  const TopologyConfig& config() const { return config_; }
  std::uint32_t num_subarrays() const { return config_.num_subarrays; }
  std::uint32_t rows_per_subarray() const { return config_.rows_per_subarray; }
  std::uint32_t columns() const { return config_.columns; }
  std::uint32_t half_columns() const { return config_.columns / 2; }
  std::uint32_t row_bits() const { return row_bits_; }
  std::uint32_t num_amp_arrays() const { return config_.num_subarrays + 1; }

  std::uint32_t amp_above(std::uint32_t subarray) const { return subarray; }
  std::uint32_t amp_below(std::uint32_t subarray) const { return subarray + 1; }
  // Column parity (0 even, 1 odd) served by an amp array.
  std::uint32_t amp_parity(std::uint32_t amp) const { return (amp + 1) & 1U; }
  std::uint32_t amp_for(std::uint32_t subarray, std::uint32_t column) const;
  bool amp_serves(std::uint32_t amp, std::uint32_t subarray) const;

  std::uint32_t shared_amp(std::uint32_t s1, std::uint32_t s2) const;
  std::vector<std::uint32_t> shared_columns(std::uint32_t s1, std::uint32_t s2) const;
  std::vector<std::uint32_t> amp_columns(std::uint32_t amp) const;

  std::uint32_t physical_position(std::uint32_t row) const { return row_order_[row]; }
  std::uint32_t logical_row(std::uint32_t position) const { return inverse_order_[position]; }
  const std::vector<std::uint32_t>& row_order() const { return row_order_; }

  // In [0,1]: 0 for the row nearest the amp array, 1 for the farthest.
  double distance_factor(RowAddress row, std::uint32_t amp) const;
  Region region_of(RowAddress row, std::uint32_t amp) const;
  std::vector<std::uint32_t> physical_neighbors(std::uint32_t row) const;

  bool valid(RowAddress row) const {
    return row.subarray < num_subarrays() && row.row < rows_per_subarray();
  }
  void check(RowAddress row) const;
  std::uint64_t global_row(RowAddress row) const {
    return std::uint64_t{row.subarray} * rows_per_subarray() + row.row;
  }

 private:
  std::uint32_t distance_position(RowAddress row, std::uint32_t amp) const;

  TopologyConfig config_;
  std::uint32_t row_bits_ = 0;
  std::uint32_t close_rows_ = 0;
  std::uint32_t middle_rows_ = 0;
  std::vector<std::uint32_t> row_order_;
  std::vector<std::uint32_t> inverse_order_;
};

}  // namespace fcdram
