#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fcdram/harness.hpp"

namespace fcdram {

// Parsed configuration file. Every field is optional; unknown keys are errors.
struct RunConfig {
  ExperimentSpec experiment;
  std::optional<std::uint64_t> seed;
};

// JSON text, e.g.
//   {"seed": 7, "profile": {"base": "vendorA-like", "noise": {"sigma_trial": 0.05}},
//    "topology": {"rows_per_subarray": 64}, "experiment": {"kind": "logic_sweep"}}
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::string profile_to_json(const ChipProfile& profile);

}  // namespace fcdram
