#include "fcdram/topology.hpp"

#include <bit>
#include <numeric>

#include "fcdram/error.hpp"
#include "fcdram/rng.hpp"

namespace fcdram {

const char* to_string(Region region) {
  switch (region) {
    case Region::Close: return "close";
    case Region::Middle: return "middle";
    case Region::Far: return "far";
  }
  return "?";
}

BankTopology BankTopology::build(const TopologyConfig& config) {
  const std::uint32_t rows = config.rows_per_subarray;
  if (rows < 8 || !std::has_single_bit(rows))
    throw Error(ErrorCode::InvalidConfig, "rows_per_subarray must be a power of two >= 8, got " + std::to_string(rows));
  if (config.num_subarrays < 2)
    throw Error(ErrorCode::InvalidConfig, "num_subarrays must be >= 2");
  if (config.columns < 2 || config.columns % 2 != 0)
    throw Error(ErrorCode::InvalidConfig, "columns must be even and >= 2, got " + std::to_string(config.columns));

  BankTopology t;
  t.config_ = config;
  t.row_bits_ = static_cast<std::uint32_t>(std::countr_zero(rows));
  const std::uint32_t third = rows / 3, rem = rows % 3;
  t.close_rows_ = third + (rem > 0 ? 1 : 0);
  t.middle_rows_ = third + (rem > 1 ? 1 : 0);

  t.row_order_.resize(rows);
  std::iota(t.row_order_.begin(), t.row_order_.end(), 0U);
  if (config.scramble_rows) {
    Rng rng = Rng::stream(config.scramble_seed, {0x5c7a3b1eULL});
    for (std::uint32_t i = rows - 1; i > 0; --i) std::swap(t.row_order_[i], t.row_order_[rng.below(i + 1)]);
  }
  t.inverse_order_.resize(rows);
  for (std::uint32_t r = 0; r < rows; ++r) t.inverse_order_[t.row_order_[r]] = r;
  return t;
}

std::uint32_t BankTopology::amp_for(std::uint32_t subarray, std::uint32_t column) const {
  const std::uint32_t above = amp_above(subarray);
  return amp_parity(above) == (column & 1U) ? above : amp_below(subarray);
}

bool BankTopology::amp_serves(std::uint32_t amp, std::uint32_t subarray) const {
  return subarray < num_subarrays() && (amp == subarray || amp == subarray + 1);
}

std::uint32_t BankTopology::shared_amp(std::uint32_t s1, std::uint32_t s2) const {
  if (s1 >= num_subarrays() || s2 >= num_subarrays())
    throw Error(ErrorCode::OutOfRange, "subarray out of range");
  if (s1 + 1 != s2 && s2 + 1 != s1)
    throw Error(ErrorCode::NotAdjacent,
                "subarrays " + std::to_string(s1) + " and " + std::to_string(s2) + " are not adjacent");
  return s1 > s2 ? s1 : s2;
}

std::vector<std::uint32_t> BankTopology::amp_columns(std::uint32_t amp) const {
  std::vector<std::uint32_t> cols;
  cols.reserve(half_columns());
  for (std::uint32_t c = amp_parity(amp); c < columns(); c += 2) cols.push_back(c);
  return cols;
}

std::vector<std::uint32_t> BankTopology::shared_columns(std::uint32_t s1, std::uint32_t s2) const {
  return amp_columns(shared_amp(s1, s2));
}

std::uint32_t BankTopology::distance_position(RowAddress row, std::uint32_t amp) const {
  check(row);
  if (!amp_serves(amp, row.subarray))
    throw Error(ErrorCode::InvalidArgument,
                "amp " + std::to_string(amp) + " does not serve subarray " + std::to_string(row.subarray));
  const std::uint32_t p = physical_position(row.row);
  // Physical position 0 sits next to the amp array below the subarray.
  return amp == amp_below(row.subarray) ? p : rows_per_subarray() - 1 - p;
}

double BankTopology::distance_factor(RowAddress row, std::uint32_t amp) const {
  return static_cast<double>(distance_position(row, amp)) / static_cast<double>(rows_per_subarray() - 1);
}

Region BankTopology::region_of(RowAddress row, std::uint32_t amp) const {
  const std::uint32_t d = distance_position(row, amp);
  if (d < close_rows_) return Region::Close;
  if (d < close_rows_ + middle_rows_) return Region::Middle;
  return Region::Far;
}

std::vector<std::uint32_t> BankTopology::physical_neighbors(std::uint32_t row) const {
  if (row >= rows_per_subarray()) throw Error(ErrorCode::OutOfRange, "row out of range");
  const std::uint32_t p = physical_position(row);
  std::vector<std::uint32_t> out;
  if (p > 0) out.push_back(logical_row(p - 1));
  if (p + 1 < rows_per_subarray()) out.push_back(logical_row(p + 1));
  return out;
}

void BankTopology::check(RowAddress row) const {
  if (!valid(row))
    throw Error(ErrorCode::OutOfRange,
                "row " + std::to_string(row.subarray) + ":" + std::to_string(row.row) + " out of range");
}

}  // namespace fcdram
