#include "fcdram/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fcdram/error.hpp"

namespace fcdram {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) bad("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(where + "." + key + " has the wrong type");
  }
}

void read_unsigned(const json& j, const char* key, std::uint32_t& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_unsigned()) bad(where + "." + key + " must be a non-negative integer");
  out = j.at(key).get<std::uint32_t>();
}

ChipProfile parse_profile(const json& j) {
  if (j.is_string()) return builtin_profile(j.get<std::string>());
  only_keys(j, "profile",
            {"base", "name", "capabilities", "max_log2_n", "timing", "noise", "rowhammer_threshold", "hammer_flip_prob"});
  std::string base = "vendorA-like";
  read(j, "base", base, "profile");
  ChipProfile p = builtin_profile(base);
  read(j, "name", p.name, "profile");
  if (j.contains("capabilities")) {
    const json& c = j.at("capabilities");
    only_keys(c, "profile.capabilities", {"simultaneous", "sequential", "n2n"});
    read(c, "simultaneous", p.supports_simultaneous_neighbor_activation, "profile.capabilities");
    read(c, "sequential", p.supports_sequential_neighbor_activation, "profile.capabilities");
    read(c, "n2n", p.supports_n2n_pattern, "profile.capabilities");
  }
  read_unsigned(j, "max_log2_n", p.max_log2_n, "profile");
  if (j.contains("timing")) {
    const json& t = j.at("timing");
    only_keys(t, "profile.timing", {"tras_nominal", "trp_nominal", "t_decoder_reset", "t_latch"});
    read(t, "tras_nominal", p.timing.tras_nominal, "profile.timing");
    read(t, "trp_nominal", p.timing.trp_nominal, "profile.timing");
    read(t, "t_decoder_reset", p.timing.t_decoder_reset, "profile.timing");
    read(t, "t_latch", p.timing.t_latch, "profile.timing");
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    const std::string w = "profile.noise";
    only_keys(n, w,
              {"sigma_amp_offset", "sigma_trial", "temp_coeff", "sigma_cell_weight", "coupling_kappa", "drive_k0",
               "drive_slope", "distance_beta", "sigma_drive", "drive_failure_scale", "sigma_multirow", "frac_leak"});
    NoiseParams& np = p.noise;
    read(n, "sigma_amp_offset", np.sigma_amp_offset, w);
    read(n, "sigma_trial", np.sigma_trial, w);
    read(n, "temp_coeff", np.temp_coeff, w);
    read(n, "sigma_cell_weight", np.sigma_cell_weight, w);
    read(n, "coupling_kappa", np.coupling_kappa, w);
    read(n, "drive_k0", np.drive_k0, w);
    read(n, "drive_slope", np.drive_slope, w);
    read(n, "distance_beta", np.distance_beta, w);
    read(n, "sigma_drive", np.sigma_drive, w);
    read(n, "drive_failure_scale", np.drive_failure_scale, w);
    read(n, "sigma_multirow", np.sigma_multirow, w);
    read(n, "frac_leak", np.frac_leak, w);
  }
  read(j, "rowhammer_threshold", p.rowhammer_threshold, "profile");
  read(j, "hammer_flip_prob", p.hammer_flip_prob, "profile");
  p.validate();
  return p;
}

void parse_topology(const json& j, TopologyConfig& t) {
  only_keys(j, "topology", {"num_subarrays", "rows_per_subarray", "columns", "scramble_rows", "scramble_seed"});
  read_unsigned(j, "num_subarrays", t.num_subarrays, "topology");
  read_unsigned(j, "rows_per_subarray", t.rows_per_subarray, "topology");
  read_unsigned(j, "columns", t.columns, "topology");
  read(j, "scramble_rows", t.scramble_rows, "topology");
  read(j, "scramble_seed", t.scramble_seed, "topology");
}

void parse_experiment(const json& j, ExperimentSpec& e) {
  const std::string w = "experiment";
  only_keys(j, w,
            {"kind", "trials", "temperatures", "n_values", "data_pattern", "data_patterns", "logic_kinds", "min_cells",
             "not_filter", "filter_trials", "filter_threshold", "first_subarray", "second_subarray"});
  if (j.contains("kind")) {
    std::string k;
    read(j, "kind", k, w);
    e.kind = parse_experiment_kind(k);
  }
  read_unsigned(j, "trials", e.trials, w);
  read(j, "temperatures", e.temperatures, w);
  read(j, "n_values", e.n_values, w);
  if (j.contains("data_pattern") && j.contains("data_patterns")) bad("give data_pattern or data_patterns, not both");
  if (j.contains("data_pattern")) {
    std::string d;
    read(j, "data_pattern", d, w);
    e.data_patterns = {parse_data_pattern(d)};
  }
  if (j.contains("data_patterns")) {
    std::vector<std::string> ds;
    read(j, "data_patterns", ds, w);
    e.data_patterns.clear();
    for (const auto& d : ds) e.data_patterns.push_back(parse_data_pattern(d));
  }
  if (j.contains("logic_kinds")) {
    std::vector<std::string> ks;
    read(j, "logic_kinds", ks, w);
    e.logic_kinds.clear();
    for (const auto& k : ks) {
      const LogicKind kind = parse_logic_kind(k);
      e.logic_kinds.push_back(is_and_family(kind) ? LogicKind::And : LogicKind::Or);
    }
  }
  read_unsigned(j, "min_cells", e.min_cells, w);
  read(j, "not_filter", e.not_filter, w);
  read_unsigned(j, "filter_trials", e.filter_trials, w);
  read(j, "filter_threshold", e.filter_threshold, w);
  read_unsigned(j, "first_subarray", e.first_subarray, w);
  read_unsigned(j, "second_subarray", e.second_subarray, w);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"seed", "workers", "output", "profile", "topology", "experiment"});
  RunConfig rc;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) bad("seed must be a non-negative integer");
    rc.seed = j.at("seed").get<std::uint64_t>();
  }
  read_unsigned(j, "workers", rc.experiment.workers, "config");
  read(j, "output", rc.experiment.output, "config");
  if (j.contains("profile")) rc.experiment.profile = parse_profile(j.at("profile"));
  if (j.contains("topology")) parse_topology(j.at("topology"), rc.experiment.topology);
  if (j.contains("experiment")) parse_experiment(j.at("experiment"), rc.experiment);
  rc.experiment.validate();
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string profile_to_json(const ChipProfile& p) {
  const NoiseParams& n = p.noise;
  json j = {
      {"name", p.name},
      {"capabilities",
       {{"simultaneous", p.supports_simultaneous_neighbor_activation},
        {"sequential", p.supports_sequential_neighbor_activation},
        {"n2n", p.supports_n2n_pattern}}},
      {"max_log2_n", p.max_log2_n},
      {"timing",
       {{"tras_nominal", p.timing.tras_nominal},
        {"trp_nominal", p.timing.trp_nominal},
        {"t_decoder_reset", p.timing.t_decoder_reset},
        {"t_latch", p.timing.t_latch}}},
      {"noise",
       {{"sigma_amp_offset", n.sigma_amp_offset},
        {"sigma_trial", n.sigma_trial},
        {"temp_coeff", n.temp_coeff},
        {"sigma_cell_weight", n.sigma_cell_weight},
        {"coupling_kappa", n.coupling_kappa},
        {"drive_k0", n.drive_k0},
        {"drive_slope", n.drive_slope},
        {"distance_beta", n.distance_beta},
        {"sigma_drive", n.sigma_drive},
        {"drive_failure_scale", n.drive_failure_scale},
        {"sigma_multirow", n.sigma_multirow},
        {"frac_leak", n.frac_leak}}},
      {"rowhammer_threshold", p.rowhammer_threshold},
      {"hammer_flip_prob", p.hammer_flip_prob},
  };
  return j.dump(2);
}

}  // namespace fcdram
