#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fcdram/error.hpp"
#include "support.hpp"

using namespace fcdram;

namespace {

ExperimentSpec small_spec(ExperimentKind kind, const std::string& profile) {
  ExperimentSpec s;
  s.kind = kind;
  s.profile = builtin_profile(profile);
  s.topology = testing::shape(64, 256);
  s.trials = 50;
  s.min_cells = 256;
  s.filter_trials = 20;
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("box statistics") {
  const GroupSummary g = summarize({5, 1, 4, 2, 3});
  CHECK(g.cells == 5);
  CHECK(g.min == 1);
  CHECK(g.max == 5);
  CHECK(g.median == 3);
  CHECK(g.q1 == 1.5);
  CHECK(g.q3 == 4.5);
  CHECK(g.mean == 3);
  const GroupSummary e = summarize({0.25, 0.5, 0.75, 1.0});
  CHECK(e.median == 0.625);
  CHECK(e.q1 == 0.375);
  CHECK(e.q3 == 0.875);
  const GroupSummary one = summarize({0.7});
  CHECK(one.q1 == 0.7);
  CHECK(one.q3 == 0.7);
  CHECK(summarize({}).cells == 0);
}

TEST_CASE("ideal logic sweep is perfect") {
  ExperimentSpec s;
  s.kind = ExperimentKind::LogicSweep;
  s.profile = builtin_profile("ideal");
  s.n_values = {16};
  s.trials = 100;
  const auto report = std::get<SuccessRateReport>(run_experiment(s));
  CHECK(report.unsupported.empty());
  CHECK(report.cells.size() >= 4 * 4096);
  for (const CellRecord& c : report.cells) {
    CHECK(c.successes == 100);
    CHECK(c.trials == 100);
  }
  for (const auto& g : report.groups()) CHECK(g.mean == 1.0);
}

TEST_CASE("ideal NOT sweep is perfect") {
  ExperimentSpec s = small_spec(ExperimentKind::NotSweep, "ideal");
  s.data_patterns = {DataPattern::Random, DataPattern::All1s0s};
  const auto report = std::get<SuccessRateReport>(run_experiment(s));
  std::vector<std::string> labels;
  for (const auto& g : report.groups()) {
    CHECK(g.mean == 1.0);
    labels.push_back(g.pattern);
  }
  CHECK(std::count(labels.begin(), labels.end(), "random/16:32") == 1);
  CHECK(std::count(labels.begin(), labels.end(), "all1s0s/1:1") == 1);
  CHECK(labels.size() == 20);
  CHECK(report.select("not", 32).cells >= 256);
}

TEST_CASE("capability classes in experiments") {
  ExperimentSpec c = small_spec(ExperimentKind::NotSweep, "vendorC-like");
  auto r = std::get<SuccessRateReport>(run_experiment(c));
  CHECK(r.cells.empty());
  REQUIRE(r.unsupported.size() == 1);
  CHECK(r.unsupported[0].find("no neighbor activation") != std::string::npos);

  c.kind = ExperimentKind::LogicSweep;
  r = std::get<SuccessRateReport>(run_experiment(c));
  CHECK(r.cells.empty());
  CHECK_FALSE(r.unsupported.empty());

  ExperimentSpec b = small_spec(ExperimentKind::LogicSweep, "vendorB-like");
  r = std::get<SuccessRateReport>(run_experiment(b));
  CHECK(r.cells.empty());
  CHECK_FALSE(r.unsupported.empty());

  b.kind = ExperimentKind::NotSweep;
  b.profile.noise = builtin_profile("ideal").noise;
  r = std::get<SuccessRateReport>(run_experiment(b));
  CHECK(r.unsupported.empty());
  const auto groups = r.groups();
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].pattern == "random/single");
  CHECK(groups[0].mean == 1.0);
}

TEST_CASE("coin-flip sensing gives half success") {
  ExperimentSpec s = small_spec(ExperimentKind::LogicSweep, "vendorA-like");
  s.profile.noise.sigma_trial = 10;
  s.n_values = {2};
  s.not_filter = false;
  s.trials = 100;
  s.min_cells = 1024;
  const auto r = std::get<SuccessRateReport>(run_experiment(s));
  for (const char* kind : {"and", "or", "nand", "nor"}) {
    const GroupSummary g = r.select(kind);
    CHECK(g.cells * 100 >= 100000);
    CHECK(std::abs(g.mean - 0.5) <= 0.02);
  }
}

TEST_CASE("all-ones inputs are the weak case for AND") {
  ExperimentSpec s = small_spec(ExperimentKind::Logic1Count, "vendorA-like");
  s.topology = {};
  s.logic_kinds = {LogicKind::And};
  s.trials = 400;
  s.min_cells = 4096;
  const auto r = std::get<SuccessRateReport>(run_experiment(s));
  const double k0 = r.select("and", 16, "random/ones=0").mean;
  const double k16 = r.select("and", 16, "random/ones=16").mean;
  CHECK(r.select("and", 16, "random/ones=16").cells > 0);
  CHECK(k16 < k0);
}

TEST_CASE("worker count does not change results") {
  ExperimentSpec s = small_spec(ExperimentKind::TemperatureSweep, "vendorA-like");
  s.temperatures = {50, 95};
  s.n_values = {1, 2};
  s.trials = 600;
  s.workers = 1;
  const std::string one = to_csv(run_experiment(s));
  s.workers = 8;
  const std::string eight = to_csv(run_experiment(s));
  CHECK(one == eight);
  CHECK(one.size() > 1000);

  s.seed += 1;
  CHECK(to_csv(run_experiment(s)) != one);
}

TEST_CASE("csv schemas") {
  ExperimentSpec s = small_spec(ExperimentKind::NotSweep, "ideal");
  s.n_values = {1};
  s.trials = 3;
  const std::string text = to_csv(run_experiment(s));
  CHECK(first_line(text) == "kind,n,temperature,pattern,region_f,region_l,cell_id,success_rate");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.rfind("not,1,50,random/1:1,", 0) == 0);
  CHECK(line.substr(line.size() - 9) == ",1.000000");

  s.kind = ExperimentKind::Coverage;
  const std::string cov = to_csv(run_experiment(s));
  CHECK(first_line(cov) == "pattern,fraction");
  CHECK(cov.find("\n1:1,0.250000\n") != std::string::npos);

  s.kind = ExperimentKind::RevengSubarrays;
  CHECK(first_line(to_csv(run_experiment(s))) == "row,subarray");
  s.kind = ExperimentKind::RevengRoworder;
  CHECK(first_line(to_csv(run_experiment(s))) == "row,physical_position");
}

TEST_CASE("csv output") {
  ExperimentSpec s = small_spec(ExperimentKind::Coverage, "vendorA-like");
  const Report r = run_experiment(s);
  const std::string path = "harness_cov_test.csv";
  write_csv(r, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == to_csv(r));
  std::remove(path.c_str());
  CHECK(code_of([&] { write_csv(r, "/nonexistent-dir/x.csv"); }) == ErrorCode::Io);
}

TEST_CASE("cells are sorted by grouping keys") {
  ExperimentSpec s = small_spec(ExperimentKind::RegionHeatmap, "vendorA-like");
  s.n_values = {2};
  s.trials = 20;
  const auto r = std::get<SuccessRateReport>(run_experiment(s));
  auto key = [](const CellRecord& c) {
    return std::make_tuple(c.kind, c.n, c.temperature, c.pattern, c.region_f, c.region_l, c.cell_id);
  };
  for (std::size_t i = 1; i < r.cells.size(); ++i) CHECK(key(r.cells[i - 1]) < key(r.cells[i]));
  bool has_not = false, has_and = false;
  for (const auto& c : r.cells) {
    has_not |= c.kind == "not";
    has_and |= c.kind == "and";
  }
  CHECK(has_not);
  CHECK(has_and);
}

TEST_CASE("spec validation") {
  ExperimentSpec s;
  CHECK_NOTHROW(s.validate());
  s.trials = 0;
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidConfig);
  s = {};
  s.temperatures = {15};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidConfig);
  s = {};
  s.n_values = {3};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidConfig);
  s = {};
  s.second_subarray = 0;
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { parse_experiment_kind("not"); }) == ErrorCode::InvalidConfig);
  CHECK(parse_experiment_kind("logic1_count") == ExperimentKind::Logic1Count);
}

TEST_CASE("subarray boundaries are recovered") {
  for (const char* profile : {"ideal", "vendorA-like"}) {
    for (bool scramble : {false, true}) {
      CAPTURE(profile);
      CAPTURE(scramble);
      TopologyConfig tc = testing::shape(64, 1024);
      tc.scramble_rows = scramble;
      tc.scramble_seed = 77;
      Engine e = make_engine(tc, builtin_profile(profile), 3);
      Rng rng(4);
      const auto groups = infer_subarray_map(e, rng);
      REQUIRE(groups.size() == 2);
      for (std::uint64_t g = 0; g < 2; ++g) {
        REQUIRE(groups[g].size() == 64);
        for (std::uint64_t i = 0; i < 64; ++i) CHECK(groups[g][i] == g * 64 + i);
      }
    }
  }
  Engine c = make_engine(testing::shape(64, 64), builtin_profile("vendorC-like"), 3);
  Rng rng(5);
  CHECK(code_of([&] { infer_subarray_map(c, rng); }) == ErrorCode::CapabilityUnsupported);
}

TEST_CASE("row order is recovered up to reversal") {
  for (const char* profile : {"ideal", "vendorA-like"}) {
    for (bool scramble : {false, true}) {
      TopologyConfig tc = testing::shape(64, 1024);
      tc.scramble_rows = scramble;
      tc.scramble_seed = 78;
      Engine e = make_engine(tc, builtin_profile(profile), 3);
      Rng rng(6);
      std::vector<std::uint32_t> truth(64);
      for (std::uint32_t p = 0; p < 64; ++p) truth[p] = e.topology().logical_row(p);
      for (std::uint32_t s = 0; s < 2; ++s) {
        auto got = infer_row_order(e, s, rng);
        if (got.front() != truth.front()) std::reverse(got.begin(), got.end());
        CHECK(got == truth);
      }
    }
  }
  ChipProfile quiet = builtin_profile("ideal");
  quiet.hammer_flip_prob = 0;
  Engine e = make_engine(testing::shape(64, 64), quiet, 3);
  Rng rng(7);
  CHECK(code_of([&] { infer_row_order(e, 0, rng); }) == ErrorCode::AmbiguousOrder);
}
