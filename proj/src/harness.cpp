#include "fcdram/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "fcdram/decoder.hpp"
#include "fcdram/error.hpp"

namespace fcdram {

namespace {

enum : std::uint64_t {
  kChipTag = 0xc41f,
  kNotNoise = 0x4e07,
  kNotData = 0x4e08,
  kLogicNoise = 0x1061c,
  kLogicData = 0x1061d,
  kPairTag = 0x9a12,
  kAnchorTag = 0xa4c4,
  kFilterTag = 0xf117,
};

constexpr std::uint32_t kTrialBlock = 250;

struct JudgedRow {
  RowAddress row;
  std::string kind;
  Region region_f = Region::Close;
  Region region_l = Region::Close;
};

// One op configuration on one address pair; its trials are split into blocks
// that workers run independently.
struct Job {
  std::uint32_t n = 0;
  double temperature = 50.0;
  std::string pattern;
  std::uint32_t pair = 0;
  std::uint32_t parity = 0;  // columns judged: those served by the shared amp
  std::vector<JudgedRow> rows;
  std::vector<std::uint8_t> keep;  // rows.size() * J; empty keeps every cell
  std::function<void(Engine&, std::uint32_t trial, std::uint32_t* counts)> run;
};

std::uint64_t temperature_key(double t) { return std::bit_cast<std::uint64_t>(t); }

// Runs every job for `trials` trials and returns per-job success counts laid
// out as rows.size() * J.
std::vector<std::vector<std::uint32_t>> run_jobs(const std::vector<Job>& jobs, const Engine& proto,
                                                 std::uint32_t trials, std::uint32_t workers) {
  const std::uint32_t J = proto.topology().half_columns();
  std::vector<std::vector<std::uint32_t>> totals(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) totals[i].assign(jobs[i].rows.size() * J, 0);
  std::vector<std::mutex> locks(jobs.size());

  struct Unit {
    std::size_t job;
    std::uint32_t begin, end;
  };
  std::vector<Unit> units;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    for (std::uint32_t b = 0; b < trials; b += kTrialBlock) units.push_back({i, b, std::min(trials, b + kTrialBlock)});

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    std::vector<std::pair<std::uint64_t, Engine>> engines;
    std::vector<std::uint32_t> local;
    try {
      for (;;) {
        const std::size_t u = next.fetch_add(1);
        if (u >= units.size()) return;
        const Job& job = jobs[units[u].job];
        const std::uint64_t key = temperature_key(job.temperature);
        auto it = std::find_if(engines.begin(), engines.end(), [&](const auto& e) { return e.first == key; });
        if (it == engines.end()) {
          engines.emplace_back(key, proto);
          engines.back().second.set_temperature(job.temperature);
          it = engines.end() - 1;
        }
        local.assign(job.rows.size() * J, 0);
        for (std::uint32_t t = units[u].begin; t < units[u].end; ++t) job.run(it->second, t, local.data());
        std::lock_guard<std::mutex> g(locks[units[u].job]);
        auto& dst = totals[units[u].job];
        for (std::size_t k = 0; k < local.size(); ++k) dst[k] += local[k];
      }
    } catch (...) {
      std::lock_guard<std::mutex> g(failure_lock);
      if (!failure) failure = std::current_exception();
      next.store(units.size());
    }
  };

  const std::uint32_t n = std::max<std::uint32_t>(1, std::min<std::uint32_t>(workers, units.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return totals;
}

void emit(SuccessRateReport& report, const std::vector<Job>& jobs, const std::vector<std::vector<std::uint32_t>>& counts,
          const BankTopology& topo, std::uint32_t trials) {
  const std::uint32_t J = topo.half_columns();
  const std::uint64_t per_pair = std::uint64_t{topo.num_subarrays()} * topo.rows_per_subarray() * topo.columns();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    for (std::size_t r = 0; r < job.rows.size(); ++r) {
      const JudgedRow& jr = job.rows[r];
      for (std::uint32_t j = 0; j < J; ++j) {
        if (!job.keep.empty() && !job.keep[r * J + j]) continue;
        CellRecord rec;
        rec.kind = jr.kind;
        rec.n = job.n;
        rec.temperature = job.temperature;
        rec.pattern = job.pattern;
        rec.region_f = jr.region_f;
        rec.region_l = jr.region_l;
        rec.cell_id = job.pair * per_pair + topo.global_row(jr.row) * topo.columns() + (2 * j + job.parity);
        rec.successes = counts[i][r * J + j];
        rec.trials = trials;
        report.cells.push_back(std::move(rec));
      }
    }
  }
}

void fill_data(Bits& bits, DataPattern pattern, std::uint8_t constant, Rng& rng) {
  if (pattern == DataPattern::Random) rng.fill_bits(bits);
  else std::fill(bits.begin(), bits.end(), constant);
}

Bits half_of(const Bits& bits, std::uint32_t parity) {
  Bits out(bits.size() / 2);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = bits[2 * j + parity];
  return out;
}

// ---------------------------------------------------------------- NOT sweep

struct NotPattern {
  std::uint32_t z = 0;
  bool n2n = false;
  bool single = false;
  std::uint32_t destinations() const { return single ? 1U : (n2n ? 2U : 1U) << z; }
};

std::vector<NotPattern> not_patterns(const ChipProfile& p, const std::vector<std::uint32_t>& wanted) {
  std::vector<NotPattern> out;
  auto want = [&](std::uint32_t d) { return wanted.empty() || std::find(wanted.begin(), wanted.end(), d) != wanted.end(); };
  if (!p.supports_simultaneous_neighbor_activation) {
    if (want(1)) out.push_back({0, false, true});
    return out;
  }
  for (std::uint32_t z = 0; z <= p.max_log2_n; ++z) {
    if (want(1U << z)) out.push_back({z, false, false});
    if (p.supports_n2n_pattern && want(2U << z)) out.push_back({z, true, false});
  }
  return out;
}

// Destination blocks for every pattern of one anchor nest inside one aligned
// span, and the source row keeps the anchor's random high bits, so groups with
// different destination counts are compared on matched rows.
std::pair<std::uint32_t, std::uint32_t> not_pair(const ChipProfile& p, const NotPattern& pat, std::uint32_t base,
                                                 std::uint32_t high) {
  if (pat.single) return {base ^ high, base};
  const std::uint32_t low = (1U << pat.z) - 1U;
  const std::uint32_t b = pat.n2n ? base | (1U << pat.z) : base;
  (void)p;
  return {b ^ (low | high), b};
}

void add_not_jobs(std::vector<Job>& jobs, const ExperimentSpec& spec, const BankTopology& topo, double temperature,
                  DataPattern data) {
  const ChipProfile& p = spec.profile;
  const std::vector<NotPattern> patterns = not_patterns(p, spec.n_values);
  if (patterns.empty()) return;
  const std::uint32_t R = topo.rows_per_subarray(), J = topo.half_columns();
  const std::uint32_t sf = spec.first_subarray, sl = spec.second_subarray;
  const std::uint32_t shared = topo.shared_amp(sf, sl);
  const std::uint32_t parity = topo.amp_parity(shared);

  std::uint32_t min_dest = ~0U;
  for (const auto& pat : patterns) min_dest = std::min(min_dest, pat.destinations());
  const std::uint32_t anchors = std::max<std::uint32_t>(1, (spec.min_cells + J * min_dest - 1) / (J * min_dest));
  const std::uint32_t span = std::min<std::uint32_t>(R, 2U << p.max_log2_n);
  const std::uint32_t spans = R / span;
  Rng anchor_rng = Rng::stream(spec.seed, {kAnchorTag});
  std::vector<std::uint32_t> order(spans);
  for (std::uint32_t i = 0; i < spans; ++i) order[i] = i;
  for (std::uint32_t i = spans - 1; i > 0; --i) std::swap(order[i], order[anchor_rng.below(i + 1)]);
  const std::uint32_t high_mask = (R - 1U) & ~(span - 1U);

  for (std::uint32_t anchor = 0; anchor < anchors; ++anchor) {
    const std::uint32_t base = order[anchor % spans] * span;
    const std::uint32_t high = static_cast<std::uint32_t>(anchor_rng.next()) & high_mask;
    for (const NotPattern& pat : patterns) {
      const auto [a, b] = not_pair(p, pat, base, high);
      const RowAddress src{sf, a}, dst{sl, b};
      const ActivationSet set = activation_sets(topo, src, dst, p);
      if (set.rows_l.size() != pat.destinations())
        throw Error(ErrorCode::PatternMismatch, "internal: NOT pair does not give the requested pattern");

      Job job;
      job.n = pat.destinations();
      job.temperature = temperature;
      job.pattern = std::string(to_string(data)) + "/" + set.label();
      job.pair = anchor;
      job.parity = parity;
      const Region rf = topo.region_of(src, shared);
      for (std::uint32_t r : set.rows_l) job.rows.push_back({{sl, r}, "not", rf, topo.region_of({sl, r}, shared)});

      std::vector<RowAddress> extras;
      for (std::uint32_t r : set.rows_f)
        if (r != a) extras.push_back({sf, r});
      const CommandTrace trace = not_trace(p, src, dst);
      const std::uint64_t seed = spec.seed;
      const std::vector<JudgedRow> rows = job.rows;
      job.run = [=](Engine& e, std::uint32_t trial, std::uint32_t* counts) {
        const std::uint32_t C = e.topology().columns();
        Rng data_rng = Rng::stream(seed, {kNotData, anchor, trial});
        Rng noise = Rng::stream(seed, {kNotNoise, anchor, trial});
        Bits src_bits(C), other(C);
        fill_data(src_bits, data, trial % 2 == 0 ? 1 : 0, data_rng);
        e.poke_row(src, src_bits);
        for (const RowAddress& x : extras) {
          fill_data(other, data, trial % 2 == 0 ? 0 : 1, data_rng);
          e.poke_row(x, other);
        }
        // Destinations start out holding the source data, so a cell the amp
        // failed to drive is counted wrong.
        for (const JudgedRow& jr : rows) e.poke_row(jr.row, src_bits);
        e.execute(trace, noise);
        Bits expected = half_of(src_bits, parity);
        for (auto& bit : expected) bit ^= 1U;
        for (std::size_t r = 0; r < rows.size(); ++r)
          e.kernel_table().tally(counts + r * J, e.row_half(rows[r].row, parity).data(), expected.data(), J);
      };
      jobs.push_back(std::move(job));
    }
  }
}

// -------------------------------------------------------------- logic sweep

struct LogicPair {
  NaryOpSpec and_spec, or_spec;
  std::vector<std::uint8_t> keep;  // (reference rows + compute rows) * J, in job row order
};

NaryOpSpec with_kind(NaryOpSpec s, LogicKind k) {
  s.kind = k;
  return s;
}

// Draws N:N address pairs for one input count, preferring distinct compute
// blocks while they last. The sequence depends only on (seed, n).
class PairSampler {
 public:
  PairSampler(const ExperimentSpec& spec, const BankTopology& topo, std::uint32_t n)
      : spec_(spec), topo_(topo), n_(n), z_(static_cast<std::uint32_t>(std::countr_zero(n))),
        rng_(Rng::stream(spec.seed, {kPairTag, n})) {}

  NaryOpSpec next() {
    const ChipProfile& p = spec_.profile;
    const std::uint32_t R = topo_.rows_per_subarray();
    // N:N needs trailing-ones(a ^ b) == z (or >= z at the cap) and bit z of a clear.
    const std::uint32_t a = static_cast<std::uint32_t>(rng_.below(R)) & ~(1U << z_);
    std::uint32_t b = a ^ draw_d();
    for (std::uint32_t tries = 0; tries < 64; ++tries) {
      if (std::find(used_.begin(), used_.end(), b >> z_) == used_.end()) break;
      b = a ^ draw_d();
    }
    used_.push_back(b >> z_);
    return make_nary_spec(topo_, p, n_, LogicKind::And, {spec_.first_subarray, a}, {spec_.second_subarray, b});
  }

 private:
  std::uint32_t draw_d() {
    std::uint32_t d = static_cast<std::uint32_t>(rng_.below(topo_.rows_per_subarray())) | ((1U << z_) - 1U);
    if (z_ < spec_.profile.max_log2_n) d &= ~(1U << z_);
    return d;
  }

  const ExperimentSpec& spec_;
  const BankTopology& topo_;
  std::uint32_t n_, z_;
  Rng rng_;
  std::vector<std::uint32_t> used_;
};

// Cells that pass a one-destination NOT check at least `threshold` of the time.
std::vector<std::uint8_t> not_filter(const ExperimentSpec& spec, const Engine& proto, const NaryOpSpec& pair,
                                     std::uint32_t pair_index) {
  const BankTopology& topo = proto.topology();
  const std::uint32_t J = topo.half_columns();
  const std::uint32_t parity = topo.amp_parity(topo.shared_amp(pair.reference_subarray, pair.compute_subarray));
  std::vector<RowAddress> rows;
  for (std::uint32_t r : pair.compute_rows) rows.push_back({pair.compute_subarray, r});
  for (std::uint32_t r : pair.reference_rows) rows.push_back({pair.reference_subarray, r});

  std::vector<Job> jobs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowAddress dst = rows[i];
    const RowAddress src{dst.subarray == pair.compute_subarray ? pair.reference_subarray : pair.compute_subarray,
                         dst.row ^ 2U};
    const ActivationSet set = activation_sets(topo, src, dst, spec.profile);
    Job job;
    job.temperature = spec.temperatures.front();
    job.parity = parity;
    job.rows.push_back({dst, "not"});
    const CommandTrace trace = not_trace(spec.profile, src, dst);
    const std::uint64_t seed = spec.seed;
    const std::uint32_t n = pair.n_inputs;
    const std::vector<std::uint32_t> dests = set.rows_l;
    job.run = [=](Engine& e, std::uint32_t trial, std::uint32_t* counts) {
      Rng data_rng = Rng::stream(seed, {kFilterTag, n, pair_index, i, trial, 0});
      Rng noise = Rng::stream(seed, {kFilterTag, n, pair_index, i, trial, 1});
      Bits bits(e.topology().columns());
      data_rng.fill_bits(bits);
      e.poke_row(src, bits);
      for (std::uint32_t r : dests) e.poke_row({dst.subarray, r}, bits);
      e.execute(trace, noise);
      Bits expected = half_of(bits, parity);
      for (auto& bit : expected) bit ^= 1U;
      e.kernel_table().tally(counts, e.row_half(dst, parity).data(), expected.data(), J);
    };
    jobs.push_back(std::move(job));
  }
  const auto counts = run_jobs(jobs, proto, spec.filter_trials, spec.workers);
  std::vector<std::uint8_t> keep;
  for (const auto& c : counts)
    for (std::uint32_t v : c) keep.push_back(v > spec.filter_threshold * spec.filter_trials ? 1 : 0);
  return keep;
}

enum class InputMode { Random, All1s0s, Ones };

void make_inputs(std::vector<Bits>& inputs, InputMode mode, std::uint32_t ones, std::uint32_t trial,
                 std::uint32_t trials, Rng& rng) {
  const std::uint32_t n = static_cast<std::uint32_t>(inputs.size());
  const std::size_t C = inputs.front().size();
  switch (mode) {
    case InputMode::Random:
      for (Bits& b : inputs) rng.fill_bits(b);
      break;
    case InputMode::All1s0s: {
      // Enumerate every row-wise combination when the trials allow it.
      const bool enumerate = n < 32 && (std::uint64_t{1} << n) <= trials;
      const std::uint64_t combo = enumerate ? trial % (std::uint64_t{1} << n) : rng.next();
      for (std::uint32_t i = 0; i < n; ++i) std::fill(inputs[i].begin(), inputs[i].end(), (combo >> i) & 1U);
      break;
    }
    case InputMode::Ones: {
      std::vector<std::uint32_t> idx(n);
      for (std::size_t c = 0; c < C; ++c) {
        for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
        for (std::uint32_t i = 0; i < ones; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
        for (std::uint32_t i = 0; i < n; ++i) inputs[i][c] = 0;
        for (std::uint32_t i = 0; i < ones; ++i) inputs[idx[i]][c] = 1;
      }
      break;
    }
  }
}

void add_logic_job(std::vector<Job>& jobs, const ExperimentSpec& spec, const BankTopology& topo,
                   const NaryOpSpec& pair_spec, const std::vector<std::uint8_t>& keep, std::uint32_t pair_index,
                   LogicKind family, double temperature, InputMode mode, std::uint32_t ones, std::string pattern) {
  const std::uint32_t J = topo.half_columns();
  const std::uint32_t shared = topo.shared_amp(pair_spec.reference_subarray, pair_spec.compute_subarray);
  const std::uint32_t parity = topo.amp_parity(shared);
  const NaryOpSpec op = with_kind(pair_spec, family);
  const bool and_family = is_and_family(family);
  const Region rf = topo.region_of(op.r_ref, shared);

  Job job;
  job.n = op.n_inputs;
  job.temperature = temperature;
  job.pattern = std::move(pattern);
  job.pair = pair_index;
  job.parity = parity;
  job.keep = keep;
  for (std::uint32_t r : op.compute_rows)
    job.rows.push_back({{op.compute_subarray, r}, and_family ? "and" : "or", rf, topo.region_of({op.compute_subarray, r}, shared)});
  for (std::uint32_t r : op.reference_rows)
    job.rows.push_back({{op.reference_subarray, r}, and_family ? "nand" : "nor", rf, topo.region_of({op.reference_subarray, r}, shared)});

  const std::uint64_t seed = spec.seed;
  const std::uint32_t trials = spec.trials;
  const std::vector<JudgedRow> rows = job.rows;
  const std::uint32_t n = op.n_inputs;
  job.run = [=](Engine& e, std::uint32_t trial, std::uint32_t* counts) {
    const std::uint32_t C = e.topology().columns();
    Rng data_rng = Rng::stream(seed, {kLogicData, n, pair_index, trial, static_cast<std::uint64_t>(mode), ones});
    Rng noise = Rng::stream(seed, {kLogicNoise, n, pair_index, trial});
    std::vector<Bits> inputs(n, Bits(C));
    make_inputs(inputs, mode, ones, trial, trials, data_rng);
    nary_logic(e, op, inputs, noise, Staging::Direct);
    Bits result(J), inverted(J);
    for (std::uint32_t j = 0; j < J; ++j) {
      const std::uint32_t col = 2 * j + parity;
      bool v = and_family;
      for (std::uint32_t i = 0; i < n; ++i) v = and_family ? (v && inputs[i][col]) : (v || inputs[i][col]);
      result[j] = v ? 1 : 0;
      inverted[j] = v ? 0 : 1;
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Bits& expected = r < n ? result : inverted;
      e.kernel_table().tally(counts + r * J, e.row_half(rows[r].row, parity).data(), expected.data(), J);
    }
  };
  jobs.push_back(std::move(job));
}

struct LogicPlan {
  std::vector<DataPattern> patterns;
  bool ones_sweep = false;
};

void add_logic_jobs(std::vector<Job>& jobs, const ExperimentSpec& spec, const Engine& proto,
                    const std::vector<double>& temperatures, const LogicPlan& plan, std::vector<std::uint32_t> n_values) {
  const BankTopology& topo = proto.topology();
  const std::uint32_t J = topo.half_columns();
  for (std::uint32_t n : n_values) {
    // Pairs are added until both the compute and the reference side keep
    // min_cells cells after filtering.
    PairSampler sampler(spec, topo, n);
    std::vector<NaryOpSpec> pairs;
    std::vector<std::vector<std::uint8_t>> keeps;
    std::uint64_t kept_com = 0, kept_ref = 0;
    const std::uint32_t max_pairs = 4 * ((spec.min_cells + n * J - 1) / (n * J)) + 16;
    while ((kept_com < spec.min_cells || kept_ref < spec.min_cells) && pairs.size() < max_pairs) {
      pairs.push_back(sampler.next());
      const std::uint32_t pi = static_cast<std::uint32_t>(pairs.size() - 1);
      std::vector<std::uint8_t> keep;
      if (spec.not_filter) keep = not_filter(spec, proto, pairs.back(), pi);
      // Filter rows come compute first, matching the job row order.
      const std::size_t split = std::size_t{n} * J;
      if (keep.empty()) {
        kept_com += split;
        kept_ref += split;
      } else {
        kept_com += std::count(keep.begin(), keep.begin() + split, 1);
        kept_ref += std::count(keep.begin() + split, keep.end(), 1);
      }
      keeps.push_back(std::move(keep));
    }
    for (std::uint32_t pi = 0; pi < pairs.size(); ++pi) {
      const std::vector<std::uint8_t>& keep = keeps[pi];
      for (LogicKind family : spec.logic_kinds) {
        for (double temp : temperatures) {
          if (plan.ones_sweep) {
            for (std::uint32_t k = 0; k <= n; ++k)
              add_logic_job(jobs, spec, topo, pairs[pi], keep, pi, family, temp, InputMode::Ones, k,
                            "random/ones=" + std::to_string(k));
          } else {
            for (DataPattern dp : plan.patterns)
              add_logic_job(jobs, spec, topo, pairs[pi], keep, pi, family, temp,
                            dp == DataPattern::Random ? InputMode::Random : InputMode::All1s0s, 0, to_string(dp));
          }
        }
      }
    }
  }
}

bool cell_less(const CellRecord& a, const CellRecord& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.n != b.n) return a.n < b.n;
  if (a.temperature != b.temperature) return a.temperature < b.temperature;
  if (a.pattern != b.pattern) return a.pattern < b.pattern;
  if (a.region_f != b.region_f) return a.region_f < b.region_f;
  if (a.region_l != b.region_l) return a.region_l < b.region_l;
  return a.cell_id < b.cell_id;
}

SuccessRateReport run_success(const ExperimentSpec& spec) {
  SuccessRateReport report;
  report.kind = spec.kind;
  report.profile = spec.profile.name;
  const BankTopology topo = BankTopology::build(spec.topology);
  const Engine proto = make_engine(spec.topology, spec.profile, spec.seed, spec.temperatures.front());

  const bool want_not = spec.kind == ExperimentKind::NotSweep || spec.kind == ExperimentKind::RegionHeatmap ||
                        spec.kind == ExperimentKind::TemperatureSweep;
  const bool want_logic = !(spec.kind == ExperimentKind::NotSweep);
  std::vector<double> temps = spec.temperatures;
  if (spec.kind == ExperimentKind::TemperatureSweep && temps.size() == 1) temps = {50, 60, 70, 80, 95};

  std::vector<Job> jobs;
  if (want_not) {
    if (!spec.profile.supports_sequential_neighbor_activation) {
      report.unsupported.push_back("not: no neighbor activation");
    } else {
      for (double t : temps)
        for (DataPattern dp : spec.data_patterns) add_not_jobs(jobs, spec, topo, t, dp);
    }
  }
  if (want_logic) {
    if (!spec.profile.supports_sequential_neighbor_activation) {
      report.unsupported.push_back("logic: no neighbor activation");
    } else if (!spec.profile.supports_simultaneous_neighbor_activation) {
      report.unsupported.push_back("logic: no simultaneous multi-row activation");
    } else {
      LogicPlan plan;
      plan.patterns = spec.data_patterns;
      if (spec.kind == ExperimentKind::PatternCompare) plan.patterns = {DataPattern::All1s0s, DataPattern::Random};
      plan.ones_sweep = spec.kind == ExperimentKind::Logic1Count;
      std::vector<std::uint32_t> ns = spec.n_values;
      if (ns.empty()) ns = plan.ones_sweep ? std::vector<std::uint32_t>{16} : std::vector<std::uint32_t>{2, 4, 8, 16};
      std::vector<std::uint32_t> usable;
      for (std::uint32_t n : ns) {
        if (n < 2) {
          // One destination is meaningful for NOT only.
          if (!want_not) report.unsupported.push_back("logic: needs at least 2 inputs");
        } else if (n > (1U << spec.profile.max_log2_n))
          report.unsupported.push_back("logic: " + std::to_string(n) + " inputs exceed the activation limit");
        else
          usable.push_back(n);
      }
      add_logic_jobs(jobs, spec, proto, temps, plan, usable);
    }
  }

  const auto counts = run_jobs(jobs, proto, spec.trials, spec.workers);
  emit(report, jobs, counts, topo, spec.trials);
  std::sort(report.cells.begin(), report.cells.end(), cell_less);
  return report;
}

CoverageReport run_coverage(const ExperimentSpec& spec) {
  const BankTopology topo = BankTopology::build(spec.topology);
  spec.profile.validate(topo);
  const auto map = pattern_coverage(topo, spec.first_subarray, spec.second_subarray, spec.profile);
  CoverageReport report;
  for (const auto& kv : map) report.fractions.push_back(kv);
  auto key = [](const std::string& label) {
    const std::size_t colon = label.find(':');
    if (colon == std::string::npos) return std::pair<long, long>{1L << 40, label == "single" ? 0 : 1};
    return std::pair<long, long>{std::stol(label.substr(0, colon)), std::stol(label.substr(colon + 1))};
  };
  std::sort(report.fractions.begin(), report.fractions.end(),
            [&](const auto& a, const auto& b) { return key(a.first) < key(b.first); });
  return report;
}

RevengReport run_reveng(const ExperimentSpec& spec) {
  Engine engine = make_engine(spec.topology, spec.profile, spec.seed, spec.temperatures.front());
  Rng rng = Rng::stream(spec.seed, {0x4e7e});
  RevengReport report;
  const BankTopology& topo = engine.topology();
  if (spec.kind == ExperimentKind::RevengSubarrays) {
    report.value_column = "subarray";
    const auto groups = infer_subarray_map(engine, rng);
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::uint64_t row : groups[g]) report.rows.emplace_back(row, g);
  } else {
    report.value_column = "physical_position";
    for (std::uint32_t s = 0; s < topo.num_subarrays(); ++s) {
      const auto order = infer_row_order(engine, s, rng);
      for (std::uint32_t p = 0; p < order.size(); ++p) report.rows.emplace_back(topo.global_row({s, order[p]}), p);
    }
  }
  std::sort(report.rows.begin(), report.rows.end());
  return report;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::NotSweep: return "not_sweep";
    case ExperimentKind::LogicSweep: return "logic_sweep";
    case ExperimentKind::Logic1Count: return "logic1_count";
    case ExperimentKind::RegionHeatmap: return "region_heatmap";
    case ExperimentKind::TemperatureSweep: return "temperature_sweep";
    case ExperimentKind::PatternCompare: return "pattern_compare";
    case ExperimentKind::Coverage: return "coverage";
    case ExperimentKind::RevengSubarrays: return "reveng_subarrays";
    case ExperimentKind::RevengRoworder: return "reveng_roworder";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (ExperimentKind k : {ExperimentKind::NotSweep, ExperimentKind::LogicSweep, ExperimentKind::Logic1Count,
                           ExperimentKind::RegionHeatmap, ExperimentKind::TemperatureSweep,
                           ExperimentKind::PatternCompare, ExperimentKind::Coverage, ExperimentKind::RevengSubarrays,
                           ExperimentKind::RevengRoworder})
    if (name == to_string(k)) return k;
  throw Error(ErrorCode::InvalidConfig, "unknown experiment kind '" + name + "'");
}

const char* to_string(DataPattern p) { return p == DataPattern::Random ? "random" : "all1s0s"; }

DataPattern parse_data_pattern(const std::string& name) {
  if (name == "random") return DataPattern::Random;
  if (name == "all1s0s") return DataPattern::All1s0s;
  throw Error(ErrorCode::InvalidConfig, "unknown data pattern '" + name + "'");
}

void ExperimentSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (trials < 1) fail("trials must be >= 1");
  if (workers < 1) fail("workers must be >= 1");
  if (temperatures.empty()) fail("at least one temperature is required");
  for (double t : temperatures)
    if (!(t >= 20.0 && t <= 110.0)) fail("temperature must be in [20, 110] C");
  for (std::uint32_t n : n_values)
    if (n == 0 || !std::has_single_bit(n)) fail("n values must be powers of two");
  if (data_patterns.empty()) fail("at least one data pattern is required");
  if (logic_kinds.empty()) fail("at least one logic kind is required");
  if (min_cells < 1) fail("min_cells must be >= 1");
  if (filter_trials < 1) fail("filter_trials must be >= 1");
  if (!(filter_threshold >= 0.0 && filter_threshold <= 1.0)) fail("filter_threshold must be in [0,1]");
  const BankTopology topo = BankTopology::build(topology);
  profile.validate(topo);
  if (first_subarray >= topo.num_subarrays() || second_subarray >= topo.num_subarrays())
    fail("subarray index out of range");
  if (first_subarray + 1 != second_subarray && second_subarray + 1 != first_subarray)
    fail("the two subarrays must be adjacent");
}

Engine make_engine(const TopologyConfig& topology, const ChipProfile& profile, std::uint64_t seed,
                   double temperature_c) {
  auto topo = std::make_shared<const BankTopology>(BankTopology::build(topology));
  const std::uint64_t chip_seed = Rng::stream(seed, {kChipTag}).next();
  auto sample = std::make_shared<const VariationSample>(sample_chip(profile, *topo, chip_seed));
  return Engine(topo, profile, sample, temperature_c);
}

Report run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ExperimentKind::Coverage: return run_coverage(spec);
    case ExperimentKind::RevengSubarrays:
    case ExperimentKind::RevengRoworder: return run_reveng(spec);
    default: return run_success(spec);
  }
}

}  // namespace fcdram
