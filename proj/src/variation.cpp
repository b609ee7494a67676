#include "fcdram/variation.hpp"

#include <cmath>

#include "fcdram/error.hpp"

namespace fcdram {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

}  // namespace

void ChipProfile::validate() const {
  require(!supports_simultaneous_neighbor_activation || supports_sequential_neighbor_activation,
          name + ": simultaneous activation requires sequential activation");
  require(timing.t_decoder_reset < timing.trp_nominal, name + ": t_decoder_reset must be below trp_nominal");
  require(timing.t_latch < timing.tras_nominal, name + ": t_latch must be below tras_nominal");
  require(timing.t_latch > 0 && timing.t_decoder_reset > 0, name + ": timing thresholds must be positive");
  const NoiseParams& n = noise;
  require(n.sigma_amp_offset >= 0 && n.sigma_trial >= 0 && n.sigma_cell_weight >= 0 && n.sigma_drive >= 0 &&
              n.sigma_multirow >= 0,
          name + ": sigmas must be non-negative");
  require(n.drive_k0 > 0, name + ": drive_k0 must be positive");
  require(n.drive_slope >= 0, name + ": drive_slope must be non-negative");
  require(n.distance_beta >= 0 && n.distance_beta < 1, name + ": distance_beta must be in [0,1)");
  require(n.drive_failure_scale >= 0 && n.drive_failure_scale <= 1, name + ": drive_failure_scale must be in [0,1]");
  require(n.frac_leak >= 0 && n.frac_leak < 1, name + ": frac_leak must be in [0,1)");
  require(hammer_flip_prob >= 0 && hammer_flip_prob <= 1, name + ": hammer_flip_prob must be in [0,1]");
}

void ChipProfile::validate(const BankTopology& topology) const {
  validate();
  require(max_log2_n < topology.row_bits(), name + ": max_log2_n must be below log2(rows_per_subarray)");
}

VariationSample sample_chip(const ChipProfile& profile, const BankTopology& topology, std::uint64_t seed) {
  profile.validate(topology);
  const NoiseParams& n = profile.noise;
  VariationSample s;
  s.half_columns = topology.half_columns();
  const std::size_t amps = std::size_t{topology.num_amp_arrays()} * s.half_columns;

  Rng offset_rng = Rng::stream(seed, {0x0ff5e7ULL});
  s.amp_offset.resize(amps);
  for (double& v : s.amp_offset) v = n.sigma_amp_offset == 0.0 ? 0.0 : offset_rng.normal(0.0, n.sigma_amp_offset);

  Rng drive_rng = Rng::stream(seed, {0xd21feULL});
  s.amp_drive.resize(amps);
  for (double& v : s.amp_drive) {
    if (n.sigma_drive == 0.0) {
      v = 1.0;
      continue;
    }
    do {
      v = drive_rng.normal(1.0, n.sigma_drive);
    } while (v <= 0.0);
  }

  Rng weight_rng = Rng::stream(seed, {0xce11ULL});
  s.cell_weight.resize(std::size_t{topology.num_subarrays()} * topology.rows_per_subarray() * topology.columns());
  for (double& v : s.cell_weight) {
    if (n.sigma_cell_weight == 0.0) {
      v = 1.0;
      continue;
    }
    do {
      v = weight_rng.normal(1.0, n.sigma_cell_weight);
    } while (v <= 0.0 || v >= 2.0);
  }
  return s;
}

double trial_noise_sigma(const NoiseParams& noise, double temperature_c) {
  if (!(temperature_c >= 20.0 && temperature_c <= 110.0))
    throw Error(ErrorCode::OutOfRange, "temperature must be in [20, 110] C");
  return noise.sigma_trial * (1.0 + noise.temp_coeff * (temperature_c - 50.0));
}

double trial_noise(const NoiseParams& noise, double temperature_c, Rng& rng) {
  const double sigma = trial_noise_sigma(noise, temperature_c);
  return sigma == 0.0 ? 0.0 : sigma * rng.normal();
}

double restore_failure_prob(const NoiseParams& noise, double k_rows, double distance_factor, double amp_strength) {
  if (k_rows < 1) throw Error(ErrorCode::InvalidArgument, "k_rows must be >= 1");
  const double mid = noise.drive_k0 * amp_strength * (1.0 - noise.distance_beta * distance_factor);
  const double p = noise.drive_failure_scale / (1.0 + std::exp(-noise.drive_slope * (k_rows - mid)));
  return std::min(p, std::nextafter(1.0, 0.0));
}

double coupling_shift(const NoiseParams& noise, NeighborBit left, NeighborBit right) {
  auto value = [](NeighborBit b) { return b == NeighborBit::One ? 1.0 : b == NeighborBit::Zero ? 0.0 : 0.5; };
  return noise.coupling_kappa * ((value(left) + value(right)) - 1.0);
}

std::vector<BitFlip> hammer(const BankTopology& topology, const ChipProfile& profile, RowAddress aggressor,
                            std::uint64_t activation_count, Rng& rng) {
  topology.check(aggressor);
  std::vector<BitFlip> flips;
  if (activation_count < profile.rowhammer_threshold || profile.hammer_flip_prob <= 0.0) return flips;
  for (std::uint32_t victim : topology.physical_neighbors(aggressor.row)) {
    for (std::uint32_t c = 0; c < topology.columns(); ++c) {
      if (rng.uniform() < profile.hammer_flip_prob) flips.push_back({{aggressor.subarray, victim}, c});
    }
  }
  return flips;
}

}  // namespace fcdram
