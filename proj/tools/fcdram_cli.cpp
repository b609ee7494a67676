#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fcdram/config.hpp"
#include "fcdram/error.hpp"
#include "fcdram/harness.hpp"
#include "fcdram/pudops.hpp"

using namespace fcdram;

namespace {

struct Common {
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> trials;
  std::optional<std::uint32_t> workers;
  std::string out;
  std::string config;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--profile", c.profile, "built-in profile name");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--trials", c.trials, "trials per cell");
  app->add_option("--out", c.out, "output directory for CSV files");
  app->add_option("--workers", c.workers, "worker threads");
  app->add_option("--config", c.config, "JSON configuration file");
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::CapabilityUnsupported: return 3;
    case ErrorCode::Io: return 4;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfRange:
    case ErrorCode::NotAdjacent:
    case ErrorCode::PatternMismatch:
    case ErrorCode::MalformedTrace: return 2;
    default: return 1;
  }
}

std::uint64_t parse_seed(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad seed in ") + what + ": '" + text + "'");
  }
}

ExperimentSpec resolve(const Common& c) {
  RunConfig rc;
  if (!c.config.empty()) rc = load_config(c.config);
  ExperimentSpec spec = rc.experiment;
  if (!c.profile.empty()) spec.profile = builtin_profile(c.profile);
  // Seed precedence: flag, then FCDRAM_SEED, then the config file, then the default.
  spec.seed = kDefaultSeed;
  if (rc.seed) spec.seed = *rc.seed;
  if (const char* env = std::getenv("FCDRAM_SEED"); env != nullptr && *env != '\0') spec.seed = parse_seed(env, "FCDRAM_SEED");
  if (c.seed) spec.seed = *c.seed;
  if (c.trials) spec.trials = *c.trials;
  if (c.workers) spec.workers = *c.workers;
  return spec;
}

void print_summary(const ExperimentSpec& spec, const Report& report) {
  std::printf("experiment %s  profile %s  seed %llu\n", to_string(spec.kind), spec.profile.name.c_str(),
              static_cast<unsigned long long>(spec.seed));
  if (const auto* s = std::get_if<SuccessRateReport>(&report)) {
    for (const auto& reason : s->unsupported) std::printf("unsupported: %s\n", reason.c_str());
    const auto groups = s->groups();
    std::printf("%-5s %4s %6s %-20s %7s %9s %9s\n", "kind", "n", "temp", "pattern", "cells", "mean", "median");
    for (const auto& g : groups)
      std::printf("%-5s %4u %6g %-20s %7zu %9.6f %9.6f\n", g.kind.c_str(), g.n, g.temperature, g.pattern.c_str(),
                  g.cells, g.mean, g.median);
    if (groups.empty()) std::printf("no cells characterized, mean %.6f\n", 0.0);
  } else if (const auto* c = std::get_if<CoverageReport>(&report)) {
    for (const auto& [label, f] : c->fractions) std::printf("%-8s %.6f\n", label.c_str(), f);
  } else {
    const auto& r = std::get<RevengReport>(report);
    std::printf("%zu rows mapped (%s)\n", r.rows.size(), r.value_column.c_str());
  }
}

int run(ExperimentSpec spec, const Common& c) {
  const Report report = run_experiment(spec);
  std::string path = spec.output;
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    path = (std::filesystem::path(c.out) / (std::string(to_string(spec.kind)) + ".csv")).string();
  }
  if (!path.empty()) write_csv(report, path);
  print_summary(spec, report);
  if (const auto* s = std::get_if<SuccessRateReport>(&report); s != nullptr && s->cells.empty() && !s->unsupported.empty())
    return 3;
  return 0;
}

RowAddress parse_row(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "row must be <subarray>:<row>");
  try {
    return {static_cast<std::uint32_t>(std::stoul(text.substr(0, colon))),
            static_cast<std::uint32_t>(std::stoul(text.substr(colon + 1)))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "row must be <subarray>:<row>");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analog-behavioral simulator of processing-using-DRAM"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::uint32_t> n_values;
  std::vector<double> temperatures;
  std::vector<std::string> patterns;
  std::vector<std::string> kinds;
  std::string sweep_kind = "logic_sweep";
  std::string reveng_what = "subarrays";
  std::string op = "not";
  std::string src_text = "0:0", dst_text = "1:0";
  bool json_out = false;

  auto add_sweep_opts = [&](CLI::App* sub) {
    sub->add_option("--n", n_values, "input counts (logic) or destination counts (not)")->delimiter(',');
    sub->add_option("--temperature", temperatures, "temperatures in C")->delimiter(',');
    sub->add_option("--pattern", patterns, "data patterns: random, all1s0s")->delimiter(',');
  };

  CLI::App* coverage = app.add_subcommand("coverage", "activation-pattern coverage of a subarray pair");
  add_common(coverage, common);
  CLI::App* not_cmd = app.add_subcommand("not", "NOT success rate by destination-row count");
  add_common(not_cmd, common);
  add_sweep_opts(not_cmd);
  CLI::App* logic = app.add_subcommand("logic", "many-input AND/NAND/OR/NOR success rate");
  add_common(logic, common);
  add_sweep_opts(logic);
  logic->add_option("--kinds", kinds, "logic families: and, or")->delimiter(',');
  CLI::App* sweep = app.add_subcommand("sweep", "run any experiment kind");
  add_common(sweep, common);
  add_sweep_opts(sweep);
  sweep->add_option("--kind", sweep_kind, "experiment kind");
  CLI::App* reveng = app.add_subcommand("reveng", "reverse engineer subarray boundaries or row order");
  add_common(reveng, common);
  reveng->add_option("--what", reveng_what, "subarrays or roworder")->check(CLI::IsMember({"subarrays", "roworder"}));
  CLI::App* dry = app.add_subcommand("dry-trace", "print an operation's command trace without running it");
  add_common(dry, common);
  dry->add_option("--op", op, "not, rowclone, frac, logic, maj3")
      ->check(CLI::IsMember({"not", "rowclone", "frac", "logic", "maj3"}));
  dry->add_option("--n", n_values, "input count for logic");
  dry->add_option("--src", src_text, "first row, <subarray>:<row>");
  dry->add_option("--dst", dst_text, "second row, <subarray>:<row>");
  CLI::App* profiles = app.add_subcommand("profiles", "list built-in chip profiles");
  profiles->add_flag("--json", json_out, "print every parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (profiles->parsed()) {
      for (const auto& name : builtin_profile_names()) {
        if (json_out) std::printf("%s\n", profile_to_json(builtin_profile(name)).c_str());
        else std::printf("%s\n", name.c_str());
      }
      return 0;
    }

    ExperimentSpec spec = resolve(common);
    if (!n_values.empty()) spec.n_values = n_values;
    if (!temperatures.empty()) spec.temperatures = temperatures;
    if (!patterns.empty()) {
      spec.data_patterns.clear();
      for (const auto& p : patterns) spec.data_patterns.push_back(parse_data_pattern(p));
    }
    if (!kinds.empty()) {
      spec.logic_kinds.clear();
      for (const auto& k : kinds)
        spec.logic_kinds.push_back(is_and_family(parse_logic_kind(k)) ? LogicKind::And : LogicKind::Or);
    }

    if (coverage->parsed()) spec.kind = ExperimentKind::Coverage;
    else if (not_cmd->parsed()) spec.kind = ExperimentKind::NotSweep;
    else if (logic->parsed()) spec.kind = ExperimentKind::LogicSweep;
    else if (sweep->parsed()) spec.kind = parse_experiment_kind(sweep_kind);
    else if (reveng->parsed())
      spec.kind = reveng_what == "subarrays" ? ExperimentKind::RevengSubarrays : ExperimentKind::RevengRoworder;

    if (dry->parsed()) {
      const BankTopology topo = BankTopology::build(spec.topology);
      spec.profile.validate(topo);
      const RowAddress src = parse_row(src_text), dst = parse_row(dst_text);
      topo.check(src);
      topo.check(dst);
      CommandTrace trace;
      if (op == "not") {
        topo.shared_amp(src.subarray, dst.subarray);
        trace = not_trace(spec.profile, src, dst);
      } else if (op == "rowclone") {
        trace = rowclone_trace(spec.profile, src, {src.subarray, dst.row});
      } else if (op == "frac") {
        const FracPlan plan = plan_frac(topo, spec.profile, src);
        trace = frac_trace(spec.profile, plan.first, plan.second);
      } else if (op == "maj3") {
        const FracPlan plan = plan_frac(topo, spec.profile, src);
        trace = merged_trace(spec.profile, plan.first, plan.second);
      } else {
        const std::uint32_t n = n_values.empty() ? 2 : n_values.front();
        const NaryOpSpec s = find_nary_spec(topo, spec.profile, n, LogicKind::And, src.subarray, dst.subarray);
        trace = merged_trace(spec.profile, s.r_ref, s.r_com);
      }
      std::fputs(trace.to_text().c_str(), stdout);
      return 0;
    }
    return run(spec, common);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error (io-failure): %s\n", e.what());
    return 4;
  }
}
