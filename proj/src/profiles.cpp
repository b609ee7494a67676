#include "fcdram/error.hpp"
#include "fcdram/variation.hpp"

namespace fcdram {

namespace {

NoiseParams ideal_noise() {
  NoiseParams n;
  n.sigma_drive = 0.0;
  n.drive_failure_scale = 0.0;
  return n;
}

// Tuned so the default seed lands inside the characterization corridor.
NoiseParams default_noise() {
  NoiseParams n;
  n.sigma_amp_offset = 0.05;
  n.sigma_trial = 0.04;
  n.temp_coeff = 0.004;
  n.sigma_cell_weight = 0.05;
  n.coupling_kappa = 0.02;
  n.drive_k0 = 31.0;
  n.drive_slope = 0.15;
  n.distance_beta = 0.2;
  n.sigma_drive = 0.1;
  n.drive_failure_scale = 1.0;
  n.sigma_multirow = 0.24;
  n.frac_leak = 0.10;
  return n;
}

ChipProfile make(const std::string& name, bool simultaneous, bool sequential, NoiseParams noise) {
  ChipProfile p;
  p.name = name;
  p.supports_simultaneous_neighbor_activation = simultaneous;
  p.supports_sequential_neighbor_activation = sequential;
  p.supports_n2n_pattern = simultaneous;
  p.noise = noise;
  return p;
}

}  // namespace

std::vector<std::string> builtin_profile_names() { return {"ideal", "vendorA-like", "vendorB-like", "vendorC-like"}; }

ChipProfile builtin_profile(const std::string& name) {
  if (name == "ideal") return make(name, true, true, ideal_noise());
  if (name == "vendorA-like") return make(name, true, true, default_noise());
  if (name == "vendorB-like") return make(name, false, true, default_noise());
  if (name == "vendorC-like") return make(name, false, false, default_noise());
  throw Error(ErrorCode::InvalidConfig, "unknown profile '" + name + "'");
}

}  // namespace fcdram
