#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fcdram/decoder.hpp"
#include "fcdram/engine.hpp"
#include "fcdram/trace.hpp"

namespace fcdram {

enum class LogicKind { And, Or, Nand, Nor };
const char* to_string(LogicKind kind);
LogicKind parse_logic_kind(const std::string& name);
inline bool is_and_family(LogicKind k) { return k == LogicKind::And || k == LogicKind::Nand; }
inline bool is_inverted(LogicKind k) { return k == LogicKind::Nand || k == LogicKind::Nor; }

// How host data reaches rows before an op. Commands issues ACT/WR/PRE traces;
// Direct sets the cells to the values those traces leave behind.
enum class Staging { Commands, Direct };

struct OpTiming {
  double apa_gap = 1.5;  // first ACT to PRE in merged-sharing sequences, below t_latch
  double pre_gap = 1.5;  // PRE to second ACT, below t_decoder_reset
};

// Trace builders; none of these touch an engine.
CommandTrace write_trace(const ChipProfile& profile, RowAddress row, const Bits& bits);
CommandTrace rowclone_trace(const ChipProfile& profile, RowAddress src, RowAddress dst, const OpTiming& t = {});
CommandTrace not_trace(const ChipProfile& profile, RowAddress src, RowAddress dst, const OpTiming& t = {});
CommandTrace merged_trace(const ChipProfile& profile, RowAddress first, RowAddress second, const OpTiming& t = {});
CommandTrace frac_trace(const ChipProfile& profile, RowAddress first, RowAddress second, const OpTiming& t = {});

void stage_row(Engine& engine, RowAddress row, const Bits& bits, Staging staging, Rng& rng);

struct RowCloneResult {
  CommandTrace trace;
  ActivationSet activation;
};
RowCloneResult rowclone(Engine& engine, RowAddress src, RowAddress dst, Rng& rng);

struct FracPlan {
  RowAddress first, second;
  std::vector<std::uint32_t> rows;       // every row the activation connects, target included
  std::vector<std::uint32_t> high_rows;  // staged to 1; the rest are staged to 0
};
// Smallest even-sized same-subarray activation containing target, lowest
// addresses first, avoiding any row in `exclude`.
FracPlan plan_frac(const BankTopology& topology, const ChipProfile& profile, RowAddress target,
                   std::span<const std::uint32_t> exclude = {});

struct FracResult {
  CommandTrace trace;
  FracPlan plan;
};
FracResult frac_store_half(Engine& engine, RowAddress target, Rng& rng, Staging staging = Staging::Commands,
                           std::span<const std::uint32_t> exclude = {});

struct NotResult {
  CommandTrace trace;
  ActivationSet activation;
  std::vector<std::uint32_t> valid_columns;  // columns on the shared amp array
  std::vector<RowAddress> destinations;
};
NotResult not_op(Engine& engine, RowAddress src, RowAddress dst, Rng& rng);

struct NaryOpSpec {
  std::uint32_t n_inputs = 2;
  LogicKind kind = LogicKind::And;
  std::uint32_t reference_subarray = 0;
  std::uint32_t compute_subarray = 1;
  RowAddress r_ref, r_com;
  std::vector<std::uint32_t> reference_rows;
  std::vector<std::uint32_t> compute_rows;  // input i goes to compute_rows[i]
  FracPlan frac;                            // stores 0.5 in reference_rows.back()
};

// Checks the pair against the decoder and fills the row sets.
NaryOpSpec make_nary_spec(const BankTopology& topology, const ChipProfile& profile, std::uint32_t n,
                          LogicKind kind, RowAddress r_ref, RowAddress r_com);
// The `skip`-th valid pair in ascending (r_ref, r_com) order.
NaryOpSpec find_nary_spec(const BankTopology& topology, const ChipProfile& profile, std::uint32_t n,
                          LogicKind kind, std::uint32_t reference_subarray, std::uint32_t compute_subarray,
                          std::uint32_t skip = 0);

struct NaryResult {
  Bits result;      // compute-side latch; the requested kind on valid columns
  Bits complement;  // reference-side latch
  CommandTrace trace;
  std::vector<std::uint32_t> valid_columns;
  std::vector<double> v_ref, v_com;  // terminal voltages at sensing, per valid column
};
NaryResult nary_logic(Engine& engine, const NaryOpSpec& spec, std::span<const Bits> inputs, Rng& rng,
                      Staging staging = Staging::Commands);

struct MajorityResult {
  Bits result;
  CommandTrace trace;
  std::array<std::uint32_t, 4> group{};  // group[3] holds the 0.5 row
};
MajorityResult majority3(Engine& engine, std::uint32_t subarray, std::array<std::uint32_t, 3> rows, Rng& rng,
                         Staging staging = Staging::Commands);

}  // namespace fcdram
