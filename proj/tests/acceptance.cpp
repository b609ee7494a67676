// One PASS/FAIL line per acceptance criterion.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fcdram/decoder.hpp"
#include "fcdram/error.hpp"
#include "fcdram/harness.hpp"
#include "fcdram/pudops.hpp"

using namespace fcdram;

namespace {

int failures = 0;

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && first_.empty()) first_ = what;
    ok_ = ok_ && ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  void report(const std::string& name, double seconds) {
    if (!ok_) ++failures;
    std::printf("%s %s (%.1fs)", ok_ ? "PASS" : "FAIL", name.c_str(), seconds);
    if (!notes_.empty()) std::printf(" %s", notes_.c_str());
    if (!ok_) std::printf(" first failure: %s", first_.c_str());
    std::printf("\n");
    std::fflush(stdout);
  }

 private:
  bool ok_ = true;
  std::string first_, notes_;
};

template <class Fn>
void criterion(const std::string& name, Fn&& fn) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.report(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
  return buf;
}

TopologyConfig shape(std::uint32_t rows, std::uint32_t cols) {
  TopologyConfig c;
  c.num_subarrays = 2;
  c.rows_per_subarray = rows;
  c.columns = cols;
  return c;
}

ChipProfile quiet(ChipProfile p) {
  const ChipProfile ideal = builtin_profile("ideal");
  p.noise = ideal.noise;
  p.hammer_flip_prob = ideal.hammer_flip_prob;
  return p;
}

bool expected(LogicKind k, std::uint32_t ones, std::uint32_t n) {
  switch (k) {
    case LogicKind::And: return ones == n;
    case LogicKind::Nand: return ones != n;
    case LogicKind::Or: return ones > 0;
    case LogicKind::Nor: return ones == 0;
  }
  return false;
}

const std::vector<LogicKind> kAllKinds{LogicKind::And, LogicKind::Nand, LogicKind::Or, LogicKind::Nor};

void truth_tables(Check& c) {
  const std::uint32_t cols = 2048;
  for (std::uint32_t n : {2U, 4U, 8U, 16U}) {
    for (LogicKind k : kAllKinds) {
      Engine e = make_engine(shape(64, cols), builtin_profile("ideal"), 1);
      Rng rng(n * 10 + static_cast<int>(k));
      const NaryOpSpec spec = find_nary_spec(e.topology(), e.profile(), n, k, 0, 1, 1);
      std::uint64_t seen = 0;
      std::uint64_t combo = 0;
      while (combo < (1ULL << n)) {
        std::vector<Bits> in(n, Bits(cols, 0));
        std::vector<std::uint64_t> at(cols, ~0ULL);
        for (std::uint32_t col : e.topology().shared_columns(0, 1)) {
          if (combo >= (1ULL << n)) break;
          at[col] = combo;
          for (std::uint32_t i = 0; i < n; ++i) in[i][col] = (combo >> i) & 1U;
          ++combo;
        }
        const NaryResult r = nary_logic(e, spec, in, rng);
        for (std::uint32_t col : r.valid_columns) {
          if (at[col] == ~0ULL) continue;
          const auto ones = static_cast<std::uint32_t>(std::popcount(at[col]));
          const bool want = expected(k, ones, n);
          if ((r.result[col] != 0) != want) {
            c.expect(false, std::string(to_string(k)) + " n=" + std::to_string(n) + " combo " + std::to_string(at[col]));
          }
          ++seen;
        }
      }
      c.expect(seen == (1ULL << n), "combinations checked for n=" + std::to_string(n));
    }
  }
  c.note("AND/NAND/OR/NOR n=2,4,8,16 exhaustive");

  Engine e = make_engine(shape(64, 64), builtin_profile("ideal"), 1);
  Rng rng(3);
  const std::array<std::uint32_t, 3> rows{5, 22, 40};
  Bits in[3] = {Bits(64), Bits(64), Bits(64)};
  for (std::uint32_t col = 0; col < 64; ++col)
    for (int i = 0; i < 3; ++i) in[i][col] = ((col % 8) >> i) & 1U;
  for (int i = 0; i < 3; ++i) e.poke_row({0, rows[i]}, in[i]);
  const MajorityResult m = majority3(e, 0, rows, rng);
  for (std::uint32_t col = 0; col < 64; ++col)
    c.expect(m.result[col] == (in[0][col] + in[1][col] + in[2][col] >= 2 ? 1 : 0), "MAJ3 column " + std::to_string(col));

  std::uint32_t not_checks = 0;
  for (std::uint32_t trial = 0; trial < 64; ++trial) {
    Engine ne = make_engine(shape(64, 256), builtin_profile("ideal"), trial);
    Rng nr(100 + trial);
    Bits src(256);
    nr.fill_bits(src);
    const RowAddress s{trial % 2, static_cast<std::uint32_t>(nr.below(64))}, d{1 - trial % 2, static_cast<std::uint32_t>(nr.below(64))};
    ne.poke_row(s, src);
    const NotResult r = not_op(ne, s, d, nr);
    for (const RowAddress& dst : r.destinations)
      for (std::uint32_t col : r.valid_columns) {
        c.expect(ne.cell(dst, col) == 1.0 - src[col], "NOT complement");
        ++not_checks;
      }
  }
  c.note("MAJ3 8 combos, NOT " + std::to_string(not_checks) + " cells");
}

void margins(Check& c) {
  double worst_err = 0.0;
  for (std::uint32_t n : {2U, 4U, 8U, 16U}) {
    const std::uint32_t cols = 2 * (n + 1);
    Engine e = make_engine(shape(64, cols), builtin_profile("ideal"), 1);
    Rng rng(n);
    for (LogicKind k : {LogicKind::And, LogicKind::Or}) {
      const NaryOpSpec spec = find_nary_spec(e.topology(), e.profile(), n, k, 0, 1);
      std::vector<Bits> in(n, Bits(cols, 0));
      for (std::uint32_t j = 0; j <= n; ++j)
        for (std::uint32_t i = 0; i < j; ++i) in[i][2 * j] = 1;
      const NaryResult r = nary_logic(e, spec, in, rng);
      const double ref = k == LogicKind::And ? (n - 0.5) / n : 0.5 / n;
      double worst = 1.0;
      for (std::uint32_t j = 0; j <= n; ++j) {
        worst_err = std::max(worst_err, std::abs(r.v_ref[j] - ref));
        worst = std::min(worst, std::abs(r.v_com[j] - r.v_ref[j]));
      }
      c.expect(r.v_ref.size() == n + 1, "valid column count");
      if (k == LogicKind::And) {
        worst_err = std::max(worst_err, std::abs(worst - 0.5 / n));
        c.expect(std::abs(worst - 0.5 / n) <= 1e-12, "worst AND margin n=" + std::to_string(n));
      }
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max error %.3g", worst_err);
  c.note(buf);
  c.expect(worst_err <= 1e-12, "reference terminal voltage");
}

void coverage(Check& c) {
  TopologyConfig tc = shape(64, 8);
  const BankTopology t = BankTopology::build(tc);
  for (bool n2n : {true, false}) {
    ChipProfile p = builtin_profile("vendorA-like");
    p.supports_n2n_pattern = n2n;
    std::map<std::string, std::uint64_t> counts;
    for (std::uint32_t a = 0; a < 64; ++a)
      for (std::uint32_t b = 0; b < 64; ++b) {
        const ActivationSet s = activation_sets(t, {0, a}, {1, b}, p);
        ++counts[std::to_string(s.rows_f.size()) + ":" + std::to_string(s.rows_l.size())];
      }
    std::map<std::string, double> brute;
    for (const auto& [k, v] : counts) brute[k] = static_cast<double>(v) / 4096.0;
    const auto analytic = pattern_coverage(t, 0, 1, p);
    c.expect(analytic == brute, n2n ? "analytic != brute force" : "analytic != brute force without N:2N");
    double sum = 0;
    for (const auto& [k, v] : analytic) {
      sum += v;
      const auto colon = k.find(':');
      if (!n2n) c.expect(k.substr(0, colon) == k.substr(colon + 1), "N:2N bucket " + k);
    }
    c.expect(std::abs(sum - 1.0) <= 1e-12, "coverage sum");
    c.note(std::string(n2n ? "with" : "without") + " N:2N " + std::to_string(analytic.size()) + " buckets");
  }
}

ExperimentSpec default_spec(ExperimentKind kind, std::uint32_t workers) {
  ExperimentSpec s;
  s.kind = kind;
  s.workers = workers;
  return s;
}

struct CorridorRuns {
  SuccessRateReport not_sweep, logic, pattern, temperature, ones;
};

void corridor(Check& c, const CorridorRuns& r) {
  const GroupSummary one = r.not_sweep.select("not", 1);
  const GroupSummary many = r.not_sweep.select("not", 32);
  c.expect(one.cells >= 4096 && many.cells >= 4096, "NOT cell count");
  c.expect(one.mean >= 0.96 && one.mean <= 1.0, "NOT 1 destination " + pct(one.mean));
  c.expect(many.mean >= 0.02 && many.mean <= 0.15, "NOT 32 destinations " + pct(many.mean));
  c.note("NOT1 " + pct(one.mean) + " NOT32 " + pct(many.mean));
  for (LogicKind k : kAllKinds) {
    const GroupSummary g = r.logic.select(to_string(k), 16);
    c.expect(g.cells >= 4096, std::string(to_string(k)) + " cell count");
    c.expect(g.mean >= 0.90 && g.mean <= 0.99, std::string(to_string(k)) + "16 " + pct(g.mean));
    c.note(std::string(to_string(k)) + "16 " + pct(g.mean));
  }
}

void orderings(Check& c, const CorridorRuns& r) {
  // Destination rows.
  double prev_mean = 2.0, prev_median = 2.0;
  for (std::uint32_t d : {1U, 2U, 4U, 8U, 16U, 32U}) {
    const GroupSummary g = r.not_sweep.select("not", d);
    c.expect(g.cells > 0, "no NOT cells at " + std::to_string(d));
    c.expect(g.mean <= prev_mean && g.median <= prev_median, "NOT success rises at " + std::to_string(d) + " destinations");
    prev_mean = g.mean;
    prev_median = g.median;
  }
  // N:2N against N:N with the same destination count.
  double worst_n2n = 1.0;
  for (std::uint32_t d : {2U, 4U, 8U, 16U}) {
    const std::string nn = std::to_string(d) + ":" + std::to_string(d);
    const std::string n2n = std::to_string(d / 2) + ":" + std::to_string(d);
    const GroupSummary a = r.not_sweep.select("not", d, "random/" + n2n);
    const GroupSummary b = r.not_sweep.select("not", d, "random/" + nn);
    c.expect(a.cells > 0 && b.cells > 0, "missing " + nn + " or " + n2n);
    c.expect(a.mean >= b.mean, n2n + " below " + nn);
    worst_n2n = std::min(worst_n2n, a.mean - b.mean);
  }
  c.note("min N:2N-N:N " + pct(worst_n2n));
  // Input count, kind pairs.
  double worst_gap = 0.0;
  for (LogicKind k : kAllKinds) {
    const std::string name = to_string(k);
    c.expect(r.logic.select(name, 16).mean >= r.logic.select(name, 2).mean, name + " 16 inputs below 2 inputs");
  }
  for (std::uint32_t n : {2U, 4U, 8U, 16U}) {
    const double a = r.logic.select("and", n).mean, na = r.logic.select("nand", n).mean;
    const double o = r.logic.select("or", n).mean, no = r.logic.select("nor", n).mean;
    c.expect(o >= a, "OR below AND at n=" + std::to_string(n));
    c.expect(no >= na, "NOR below NAND at n=" + std::to_string(n));
    worst_gap = std::max({worst_gap, std::abs(a - na), std::abs(o - no)});
  }
  c.expect(worst_gap <= 0.02, "complement gap " + pct(worst_gap));
  c.note("max complement gap " + pct(worst_gap));
  // Data pattern: means over the whole run, gap bound on every group too.
  const double rnd_all = r.pattern.select("", 0, "random").mean;
  const double fixed_all = r.pattern.select("", 0, "all1s0s").mean;
  c.expect(rnd_all <= fixed_all, "random above all1s0s");
  double worst_pattern = fixed_all - rnd_all, lowest_pattern = 1.0;
  for (LogicKind k : kAllKinds) {
    for (std::uint32_t n : {2U, 4U, 8U, 16U}) {
      const std::string name = to_string(k);
      const double d = r.pattern.select(name, n, "all1s0s").mean - r.pattern.select(name, n, "random").mean;
      worst_pattern = std::max(worst_pattern, std::abs(d));
      lowest_pattern = std::min(lowest_pattern, d);
    }
  }
  c.expect(worst_pattern <= 0.04, "pattern gap " + pct(worst_pattern));
  c.note("all1s0s-random " + pct(fixed_all - rnd_all) + " (groups " + pct(lowest_pattern) + " to " + pct(worst_pattern) + ")");
  // Temperature.
  double worst_temp = 0.0;
  std::map<std::tuple<std::string, std::uint32_t, std::string>, std::map<double, double>> by_group;
  for (const GroupSummary& g : r.temperature.groups()) by_group[{g.kind, g.n, g.pattern}][g.temperature] = g.mean;
  for (const auto& [key, temps] : by_group) {
    c.expect(temps.count(50.0) && temps.count(95.0), "temperature group incomplete");
    if (temps.count(50.0) && temps.count(95.0)) worst_temp = std::max(worst_temp, std::abs(temps.at(95.0) - temps.at(50.0)));
  }
  c.expect(!by_group.empty() && worst_temp <= 0.03, "temperature change " + pct(worst_temp));
  c.note("max 50-95C change " + pct(worst_temp));
  // Ones count for 16-input AND.
  auto ones = [&](int k) { return r.ones.select("and", 16, "random/ones=" + std::to_string(k)); };
  const double low = std::min(ones(0).mean, ones(1).mean);
  const double high = std::max(ones(15).mean, ones(16).mean);
  c.expect(ones(0).cells > 0 && ones(16).cells > 0, "ones-count groups missing");
  c.expect(high < low, "logic1 count k=15,16 not below k=0,1");
  c.note("AND16 k0 " + pct(ones(0).mean) + " k16 " + pct(ones(16).mean));
}

void reverse_engineering(Check& c) {
  for (const char* profile : {"ideal", "vendorA-like"}) {
    for (bool scramble : {false, true}) {
      const std::string tag = std::string(profile) + (scramble ? " scrambled" : "");
      TopologyConfig tc = shape(64, 1024);
      tc.scramble_rows = scramble;
      tc.scramble_seed = 1234;
      Engine e = make_engine(tc, builtin_profile(profile), kDefaultSeed);
      Rng rng(kDefaultSeed);
      const auto groups = infer_subarray_map(e, rng);
      bool ok = groups.size() == 2;
      for (std::uint64_t g = 0; ok && g < 2; ++g) {
        ok = groups[g].size() == 64;
        for (std::uint64_t i = 0; ok && i < 64; ++i) ok = groups[g][i] == g * 64 + i;
      }
      c.expect(ok, "subarray map " + tag);
      std::vector<std::uint32_t> truth(64);
      for (std::uint32_t p = 0; p < 64; ++p) truth[p] = e.topology().logical_row(p);
      for (std::uint32_t s = 0; s < 2; ++s) {
        std::vector<std::uint32_t> got = infer_row_order(e, s, rng);
        std::vector<std::uint32_t> rev(got.rbegin(), got.rend());
        c.expect(got == truth || rev == truth, "row order " + tag + " subarray " + std::to_string(s));
      }
    }
  }
  c.note("ideal and vendorA-like, plain and scrambled");
}

void capability(Check& c) {
  const ChipProfile b = quiet(builtin_profile("vendorB-like"));
  Engine e = make_engine(shape(64, 256), b, 1);
  Rng rng(2);
  std::uint32_t cells = 0;
  for (std::uint32_t i = 0; i < 32; ++i) {
    Bits src(256);
    rng.fill_bits(src);
    const RowAddress s{0, static_cast<std::uint32_t>(rng.below(64))}, d{1, static_cast<std::uint32_t>(rng.below(64))};
    e.poke_row(s, src);
    const NotResult r = not_op(e, s, d, rng);
    c.expect(r.destinations.size() == 1, "vendorB NOT destination count");
    for (std::uint32_t col : r.valid_columns) {
      c.expect(e.cell(r.destinations[0], col) == 1.0 - src[col], "vendorB NOT complement");
      ++cells;
    }
  }
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& err) {
      return std::string(to_string(err.code()));
    }
    return std::string("none");
  };
  const std::string unsupported = to_string(ErrorCode::CapabilityUnsupported);
  const ChipProfile a = builtin_profile("vendorA-like");
  const NaryOpSpec spec = find_nary_spec(e.topology(), a, 2, LogicKind::And, 0, 1);
  c.expect(code([&] { nary_logic(e, spec, std::vector<Bits>(2, Bits(256)), rng); }) == unsupported, "vendorB nary_logic");
  c.expect(code([&] { find_nary_spec(e.topology(), b, 2, LogicKind::And, 0, 1); }) == unsupported, "vendorB find_nary_spec");
  c.note("vendorB NOT " + std::to_string(cells) + " cells exact, logic unsupported");

  const ChipProfile vc = builtin_profile("vendorC-like");
  Engine ce = make_engine(shape(64, 256), vc, 1);
  c.expect(code([&] { not_op(ce, {0, 3}, {1, 3}, rng); }) == unsupported, "vendorC not_op");
  c.expect(code([&] { nary_logic(ce, spec, std::vector<Bits>(2, Bits(256)), rng); }) == unsupported, "vendorC nary_logic");
  c.expect(code([&] { infer_subarray_map(ce, rng); }) == unsupported, "vendorC reveng");
  for (ExperimentKind k : {ExperimentKind::NotSweep, ExperimentKind::LogicSweep}) {
    ExperimentSpec s = default_spec(k, 1);
    s.profile = vc;
    s.topology = shape(64, 64);
    s.trials = 10;
    const auto r = std::get<SuccessRateReport>(run_experiment(s));
    c.expect(r.cells.empty() && !r.unsupported.empty(), std::string("vendorC ") + to_string(k));
    c.expect(r.select("").mean == 0.0, "vendorC mean");
  }
  ExperimentSpec s = default_spec(ExperimentKind::Coverage, 1);
  s.profile = vc;
  const auto cov = std::get<CoverageReport>(run_experiment(s));
  c.expect(cov.fractions.size() == 1 && cov.fractions[0].first == "none", "vendorC coverage");
  c.note("vendorC unsupported everywhere");
}

void determinism(Check& c) {
  std::size_t bytes = 0;
  for (ExperimentKind k : {ExperimentKind::NotSweep, ExperimentKind::LogicSweep, ExperimentKind::RegionHeatmap,
                           ExperimentKind::Logic1Count, ExperimentKind::Coverage, ExperimentKind::RevengRoworder}) {
    ExperimentSpec s = default_spec(k, 1);
    s.topology = shape(64, 256);
    s.trials = 300;
    s.min_cells = 512;
    const std::string one = to_csv(run_experiment(s));
    const std::string again = to_csv(run_experiment(s));
    s.workers = 8;
    const std::string eight = to_csv(run_experiment(s));
    c.expect(one == again && one == eight, std::string("csv differs for ") + to_string(k));
    bytes += one.size();
  }
  c.note(std::to_string(bytes) + " csv bytes compared");
}

}  // namespace

int main() {
  criterion("zero-noise truth tables", truth_tables);
  criterion("analytic margins", margins);
  criterion("coverage oracle", coverage);

  const std::uint32_t workers = std::max(1U, std::thread::hardware_concurrency());
  CorridorRuns runs;
  bool ran = false;
  std::string run_error;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    runs.not_sweep = std::get<SuccessRateReport>(run_experiment(default_spec(ExperimentKind::NotSweep, workers)));
    runs.logic = std::get<SuccessRateReport>(run_experiment(default_spec(ExperimentKind::LogicSweep, workers)));
    ExperimentSpec pattern = default_spec(ExperimentKind::PatternCompare, workers);
    runs.pattern = std::get<SuccessRateReport>(run_experiment(pattern));
    ExperimentSpec temp = default_spec(ExperimentKind::TemperatureSweep, workers);
    temp.temperatures = {50, 95};
    runs.temperature = std::get<SuccessRateReport>(run_experiment(temp));
    ExperimentSpec ones = default_spec(ExperimentKind::Logic1Count, workers);
    ones.logic_kinds = {LogicKind::And};
    runs.ones = std::get<SuccessRateReport>(run_experiment(ones));
    ran = true;
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  const double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("note: vendorA-like sweeps at 10000 trials took %.1fs\n", sweep_s);
  criterion("corridor on vendorA-like", [&](Check& c) {
    c.expect(ran, run_error);
    if (ran) corridor(c, runs);
  });
  criterion("directional orderings", [&](Check& c) {
    c.expect(ran, run_error);
    if (ran) orderings(c, runs);
  });

  criterion("reverse engineering", reverse_engineering);
  criterion("capability matrix", capability);
  criterion("determinism across worker counts", determinism);

  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
