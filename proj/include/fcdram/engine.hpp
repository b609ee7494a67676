#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "fcdram/kernels.hpp"
#include "fcdram/rng.hpp"
#include "fcdram/topology.hpp"
#include "fcdram/trace.hpp"
#include "fcdram/variation.hpp"

namespace fcdram {

enum class AmpPhaseKind { Precharged, Sharing, Latched };

struct AmpPhase {
  AmpPhaseKind kind = AmpPhaseKind::Precharged;
  double v_top = 0.5;
  double v_bot = 0.5;
};

struct WeightedCell {
  double voltage = 0.0;
  double weight = 1.0;
};

// Weighted mean of the connected cells, or `prior` when none are connected.
double charge_share(std::span<const WeightedCell> cells, double prior);

// Terminal voltages just before the most recent sensing of an amp array.
struct SensingRecord {
  std::vector<double> v_top;
  std::vector<double> v_bot;
  std::vector<double> latch_top;
  std::uint32_t rows = 0;
};

// One bank: cell voltages, amp phases and the set of connected rows. The
// topology, profile and variation sample are shared read-only; the state is
// owned by one thread at a time and copies are independent.
class Engine {
 public:
  Engine(std::shared_ptr<const BankTopology> topology, ChipProfile profile,
         std::shared_ptr<const VariationSample> sample, double temperature_c,
         const kernels::Table* table = nullptr);

  // Runs a complete trace; the bank must be idle before and is idle after.
  // Returns the RD results in order.
  std::vector<Bits> execute(const CommandTrace& trace, Rng& rng);
  // Runs commands without requiring the trace to close the bank, so RD/WR and
  // inspection can follow. Time continues from the previous step.
  std::vector<Bits> step(const CommandTrace& trace, Rng& rng);

  Bits read_row(RowAddress row) const;
  void write_row(RowAddress row, const Bits& bits);

  // Host-side state access used for initialization and readout.
  double cell(RowAddress row, std::uint32_t column) const;
  void set_cell(RowAddress row, std::uint32_t column, double voltage);
  void poke_row(RowAddress row, const Bits& bits);
  void fill_row(RowAddress row, double voltage);
  Bits peek_row(RowAddress row) const;
  // Cells of a row served by columns of one parity, ordered by column.
  std::span<const double> row_half(RowAddress row, std::uint32_t parity) const;
  std::span<double> row_half(RowAddress row, std::uint32_t parity);

  AmpPhase amp_phase(std::uint32_t amp, std::uint32_t column) const;
  const SensingRecord& last_sensing(std::uint32_t amp) const { return sensed_[amp]; }
  bool is_idle() const;
  bool is_connected(RowAddress row) const;

  const BankTopology& topology() const { return *topology_; }
  const ChipProfile& profile() const { return profile_; }
  const VariationSample& sample() const { return *sample_; }
  double temperature() const { return temperature_; }
  void set_temperature(double temperature_c);
  const kernels::Table& kernel_table() const { return *k_; }

 private:
  struct Link {
    std::uint32_t row = 0;
    double connect_time = 0.0;
    std::array<bool, 2> late{};        // connected after its amp had latched
    std::array<bool, 2> overdriven{};  // written through the row buffer
    std::array<std::vector<std::uint8_t>, 2> fail;
  };
  struct Amp {
    AmpPhaseKind kind = AmpPhaseKind::Precharged;
    double sense_at = 0.0;
    std::vector<double> top, bot;
    std::vector<double> shared_top, shared_bot;
  };

  std::vector<Bits> run(const CommandTrace& trace, Rng& rng);
  std::size_t half_index(std::uint32_t subarray, std::uint32_t row, std::uint32_t parity) const;
  std::uint32_t amp_of(std::uint32_t subarray, std::uint32_t parity) const;
  std::uint32_t rows_on(std::uint32_t amp) const;
  bool any_connected() const;
  void terminal(std::uint32_t amp, bool top_side, double* out) const;
  void connect(std::span<const RowAddress> rows, double t, Rng& rng);
  void sense(std::uint32_t amp, Rng& rng);
  void advance(double t, Rng& rng);
  void apply_precharge(double t);
  void act(RowAddress row, double t, Rng& rng);
  void check_latched(RowAddress row) const;

  std::shared_ptr<const BankTopology> topology_;
  ChipProfile profile_;
  std::shared_ptr<const VariationSample> sample_;
  double temperature_;
  double sigma_trial_;
  const kernels::Table* k_;
  std::uint32_t J_;

  std::vector<double> cells_;
  std::vector<double> weights_;  // capacitance weight with distance attenuation
  std::vector<Amp> amps_;
  std::vector<SensingRecord> sensed_;
  std::vector<std::vector<Link>> active_;

  double now_ = 0.0;
  bool pre_pending_ = false;
  double t_pre_ = 0.0;
  bool has_last_act_ = false;
  RowAddress last_act_{};

  std::unordered_map<std::uint64_t, std::vector<double>> fail_prob_;
  mutable std::vector<double> acc_wv_, acc_w_, buf_a_, buf_b_, scratch_;
};

}  // namespace fcdram
