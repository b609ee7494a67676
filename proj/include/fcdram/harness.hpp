#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fcdram/engine.hpp"
#include "fcdram/pudops.hpp"
#include "fcdram/topology.hpp"
#include "fcdram/variation.hpp"

namespace fcdram {

inline constexpr std::uint64_t kDefaultSeed = 20240624;

enum class ExperimentKind {
  NotSweep,
  LogicSweep,
  Logic1Count,
  RegionHeatmap,
  TemperatureSweep,
  PatternCompare,
  Coverage,
  RevengSubarrays,
  RevengRoworder,
};
const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

enum class DataPattern { All1s0s, Random };
const char* to_string(DataPattern p);
DataPattern parse_data_pattern(const std::string& name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::LogicSweep;
  ChipProfile profile = builtin_profile("vendorA-like");
  TopologyConfig topology;
  std::uint64_t seed = kDefaultSeed;
  std::uint32_t trials = 10000;
  std::vector<double> temperatures{50.0};
  // Destination-row counts for NOT, input counts for logic. Empty selects the
  // kind's default.
  std::vector<std::uint32_t> n_values;
  std::vector<DataPattern> data_patterns{DataPattern::Random};
  // And selects the AND/NAND pair, Or the OR/NOR pair.
  std::vector<LogicKind> logic_kinds{LogicKind::And, LogicKind::Or};
  std::uint32_t min_cells = 4096;
  bool not_filter = true;
  std::uint32_t filter_trials = 100;
  double filter_threshold = 0.9;
  std::uint32_t first_subarray = 0;   // NOT source / logic reference
  std::uint32_t second_subarray = 1;  // NOT destination / logic compute
  std::uint32_t workers = 1;
  std::string output;

  void validate() const;
};

struct CellRecord {
  std::string kind;
  std::uint32_t n = 0;
  double temperature = 0.0;
  std::string pattern;
  Region region_f = Region::Close;
  Region region_l = Region::Close;
  std::uint64_t cell_id = 0;
  std::uint32_t successes = 0;
  std::uint32_t trials = 0;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
};

struct GroupSummary {
  std::string kind;
  std::uint32_t n = 0;
  double temperature = 0.0;
  std::string pattern;
  std::size_t cells = 0;
  double mean = 0.0, min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Box statistics: quartiles are medians of the lower and upper halves, whiskers
// are min and max.
GroupSummary summarize(std::vector<double> rates);

struct SuccessRateReport {
  ExperimentKind kind = ExperimentKind::LogicSweep;
  std::string profile;
  std::vector<CellRecord> cells;  // sorted by grouping keys
  std::vector<std::string> unsupported;  // reasons for operations the profile cannot run

  std::vector<GroupSummary> groups() const;
  // Mean and median over cells matching every non-empty filter.
  GroupSummary select(const std::string& kind, std::uint32_t n = 0, const std::string& pattern = "",
                      double temperature = -1.0) const;
};

struct CoverageReport {
  std::vector<std::pair<std::string, double>> fractions;  // sorted by pattern size
};

struct RevengReport {
  std::string value_column;  // "subarray" or "physical_position"
  std::vector<std::pair<std::uint64_t, std::uint64_t>> rows;
};

using Report = std::variant<SuccessRateReport, CoverageReport, RevengReport>;

Report run_experiment(const ExperimentSpec& spec);

std::string to_csv(const Report& report);
void write_csv(const Report& report, const std::string& path);

// Engine for one simulated chip; the variation sample is keyed by the seed.
Engine make_engine(const TopologyConfig& topology, const ChipProfile& profile, std::uint64_t seed,
                   double temperature_c = 50.0);

// Groups of global row indices, each sorted, ordered by first row.
std::vector<std::vector<std::uint64_t>> infer_subarray_map(Engine& engine, Rng& rng);
// Logical in-subarray rows in physical order from one edge.
std::vector<std::uint32_t> infer_row_order(Engine& engine, std::uint32_t subarray, Rng& rng,
                                           std::uint32_t episodes = 3);

}  // namespace fcdram
