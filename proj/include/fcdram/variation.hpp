#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fcdram/rng.hpp"
#include "fcdram/topology.hpp"

namespace fcdram {

struct TimingThresholds {
  double tras_nominal = 35.0;
  double trp_nominal = 13.5;
  double t_decoder_reset = 3.0;
  double t_latch = 8.0;
};

// Voltages are in VDD units.
struct NoiseParams {
  double sigma_amp_offset = 0.0;
  double sigma_trial = 0.0;
  double temp_coeff = 0.0;
  double sigma_cell_weight = 0.0;
  double coupling_kappa = 0.0;
  double drive_k0 = 31.0;
  double drive_slope = 0.15;
  double distance_beta = 0.0;
  // Relative spread of per-amp drive strength around 1.
  double sigma_drive = 0.1;
  // Scales the restore-failure logistic; 0 disables restore failures.
  double drive_failure_scale = 1.0;
  // Extra sensing noise that grows with the number of rows on an amp.
  double sigma_multirow = 0.0;
  // Fraction of a fractional (unsensed) cell value lost at precharge.
  double frac_leak = 0.0;
};

struct ChipProfile {
  std::string name = "custom";
  bool supports_simultaneous_neighbor_activation = true;
  bool supports_sequential_neighbor_activation = true;
  bool supports_n2n_pattern = true;
  std::uint32_t max_log2_n = 4;
  TimingThresholds timing;
  NoiseParams noise;
  std::uint64_t rowhammer_threshold = 10000;
  double hammer_flip_prob = 0.01;

  void validate() const;
  void validate(const BankTopology& topology) const;
};

ChipProfile builtin_profile(const std::string& name);
std::vector<std::string> builtin_profile_names();

// Amp-indexed arrays use [amp * half_columns + j] where column = 2*j + parity.
// Cell weights use [(subarray * rows + row) * columns + column].
struct VariationSample {
  std::uint32_t half_columns = 0;
  std::vector<double> amp_offset;
  std::vector<double> amp_drive;
  std::vector<double> cell_weight;

  double offset(std::uint32_t amp, std::uint32_t j) const { return amp_offset[amp * half_columns + j]; }
  double drive(std::uint32_t amp, std::uint32_t j) const { return amp_drive[amp * half_columns + j]; }
};

VariationSample sample_chip(const ChipProfile& profile, const BankTopology& topology, std::uint64_t seed);

double trial_noise_sigma(const NoiseParams& noise, double temperature_c);
double trial_noise(const NoiseParams& noise, double temperature_c, Rng& rng);
double restore_failure_prob(const NoiseParams& noise, double k_rows, double distance_factor, double amp_strength);

enum class NeighborBit { Zero, One, None };
double coupling_shift(const NoiseParams& noise, NeighborBit left, NeighborBit right);

struct BitFlip {
  RowAddress row;
  std::uint32_t column = 0;
  friend bool operator==(const BitFlip&, const BitFlip&) = default;
};

std::vector<BitFlip> hammer(const BankTopology& topology, const ChipProfile& profile, RowAddress aggressor,
                            std::uint64_t activation_count, Rng& rng);

}  // namespace fcdram
