#include "fcdram/pudops.hpp"

#include <algorithm>
#include <bit>

#include "fcdram/error.hpp"

namespace fcdram {

const char* to_string(LogicKind kind) {
  switch (kind) {
    case LogicKind::And: return "and";
    case LogicKind::Or: return "or";
    case LogicKind::Nand: return "nand";
    case LogicKind::Nor: return "nor";
  }
  return "?";
}

LogicKind parse_logic_kind(const std::string& name) {
  if (name == "and") return LogicKind::And;
  if (name == "or") return LogicKind::Or;
  if (name == "nand") return LogicKind::Nand;
  if (name == "nor") return LogicKind::Nor;
  throw Error(ErrorCode::InvalidConfig, "unknown logic kind '" + name + "'");
}

namespace {

void require_sequential(const ChipProfile& p) {
  if (!p.supports_sequential_neighbor_activation)
    throw Error(ErrorCode::CapabilityUnsupported, p.name + ": no neighbor activation");
}

void require_simultaneous(const ChipProfile& p) {
  require_sequential(p);
  if (!p.supports_simultaneous_neighbor_activation)
    throw Error(ErrorCode::CapabilityUnsupported, p.name + ": no simultaneous multi-row activation");
}

// Closed-form activation set sizes for a same-subarray or neighbour pair,
// mirroring activation_sets without allocating.
struct Blocks {
  std::uint32_t base_f, size_f, base_l, size_l;
};

Blocks blocks_for(const ChipProfile& p, std::uint32_t a, std::uint32_t b) {
  const std::uint32_t z = std::min(static_cast<std::uint32_t>(std::countr_one(a ^ b)), p.max_log2_n);
  const bool n2n = ((a >> z) & 1U) != 0 && p.supports_n2n_pattern;
  const std::uint32_t zl = n2n ? z + 1 : z;
  return {a & ~((1U << z) - 1U), 1U << z, b & ~((1U << zl) - 1U), 1U << zl};
}

std::vector<std::uint32_t> block_union(const Blocks& b) {
  std::vector<std::uint32_t> rows;
  for (std::uint32_t i = 0; i < b.size_f; ++i) rows.push_back(b.base_f + i);
  for (std::uint32_t i = 0; i < b.size_l; ++i) rows.push_back(b.base_l + i);
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

bool contains(std::span<const std::uint32_t> rows, std::uint32_t r) {
  return std::find(rows.begin(), rows.end(), r) != rows.end();
}

std::vector<std::uint32_t> shared_columns_of(const BankTopology& t, std::uint32_t s1, std::uint32_t s2) {
  return t.shared_columns(s1, s2);
}

}  // namespace

CommandTrace write_trace(const ChipProfile& profile, RowAddress row, const Bits& bits) {
  const TimingThresholds& tm = profile.timing;
  CommandTrace t;
  t.add(Command::act(row)).add(Command::wr(bits, tm.t_latch)).add(Command::pre(tm.tras_nominal - tm.t_latch));
  return t;
}

CommandTrace not_trace(const ChipProfile& profile, RowAddress src, RowAddress dst, const OpTiming& t) {
  const TimingThresholds& tm = profile.timing;
  CommandTrace trace;
  trace.add(Command::act(src))
      .add(Command::pre(tm.tras_nominal))
      .add(Command::act(dst, t.pre_gap))
      .add(Command::idle(tm.tras_nominal))
      .add(Command::pre());
  return trace;
}

CommandTrace rowclone_trace(const ChipProfile& profile, RowAddress src, RowAddress dst, const OpTiming& t) {
  return not_trace(profile, src, dst, t);
}

CommandTrace merged_trace(const ChipProfile& profile, RowAddress first, RowAddress second, const OpTiming& t) {
  CommandTrace trace;
  trace.add(Command::act(first))
      .add(Command::pre(t.apa_gap))
      .add(Command::act(second, t.pre_gap))
      .add(Command::idle(profile.timing.tras_nominal))
      .add(Command::pre());
  return trace;
}

CommandTrace frac_trace(const ChipProfile&, RowAddress first, RowAddress second, const OpTiming& t) {
  CommandTrace trace;
  trace.add(Command::act(first)).add(Command::pre(t.apa_gap)).add(Command::act(second, t.pre_gap)).add(Command::pre(t.apa_gap));
  return trace;
}

void stage_row(Engine& engine, RowAddress row, const Bits& bits, Staging staging, Rng& rng) {
  if (staging == Staging::Direct) engine.poke_row(row, bits);
  else engine.execute(write_trace(engine.profile(), row, bits), rng);
}

RowCloneResult rowclone(Engine& engine, RowAddress src, RowAddress dst, Rng& rng) {
  const BankTopology& topo = engine.topology();
  topo.check(src);
  topo.check(dst);
  require_sequential(engine.profile());
  if (src.subarray != dst.subarray)
    throw Error(ErrorCode::InvalidArgument, "RowClone needs source and destination in the same subarray");
  RowCloneResult r;
  r.activation = activation_sets(topo, src, dst, engine.profile());
  r.trace = rowclone_trace(engine.profile(), src, dst);
  engine.execute(r.trace, rng);
  return r;
}

FracPlan plan_frac(const BankTopology& topology, const ChipProfile& profile, RowAddress target,
                   std::span<const std::uint32_t> exclude) {
  topology.check(target);
  require_simultaneous(profile);
  const std::uint32_t R = topology.rows_per_subarray();
  bool found = false;
  Blocks best{};
  std::uint32_t best_size = 0, best_a = 0, best_b = 0;
  for (std::uint32_t a = 0; a < R; ++a) {
    for (std::uint32_t b = 0; b < R; ++b) {
      const Blocks bl = blocks_for(profile, a, b);
      const bool in_f = target.row >= bl.base_f && target.row < bl.base_f + bl.size_f;
      const bool in_l = target.row >= bl.base_l && target.row < bl.base_l + bl.size_l;
      if (!in_f && !in_l) continue;
      const bool disjoint = bl.base_f + bl.size_f <= bl.base_l || bl.base_l + bl.size_l <= bl.base_f;
      const std::uint32_t size = disjoint ? bl.size_f + bl.size_l : std::max(bl.size_f, bl.size_l);
      if (size % 2 != 0 || (found && size >= best_size)) continue;
      const auto rows = block_union(bl);
      if (std::any_of(rows.begin(), rows.end(), [&](std::uint32_t r) { return r != target.row && contains(exclude, r); }))
        continue;
      found = true;
      best = bl;
      best_size = size;
      best_a = a;
      best_b = b;
    }
  }
  if (!found) throw Error(ErrorCode::CapabilityUnsupported, "no activation set can hold a fractional value here");
  FracPlan plan;
  plan.first = {target.subarray, best_a};
  plan.second = {target.subarray, best_b};
  plan.rows = block_union(best);
  plan.high_rows.push_back(target.row);
  for (std::uint32_t r : plan.rows) {
    if (plan.high_rows.size() == plan.rows.size() / 2) break;
    if (r != target.row) plan.high_rows.push_back(r);
  }
  return plan;
}

namespace {

FracResult run_frac(Engine& engine, const FracPlan& plan, std::uint32_t subarray, Rng& rng, Staging staging) {
  const std::uint32_t C = engine.topology().columns();
  const Bits ones(C, 1), zeros(C, 0);
  FracResult res;
  res.plan = plan;
  for (std::uint32_t r : plan.rows) {
    const bool high = contains(plan.high_rows, r);
    if (staging == Staging::Commands) res.trace.append(write_trace(engine.profile(), {subarray, r}, high ? ones : zeros));
    stage_row(engine, {subarray, r}, high ? ones : zeros, staging, rng);
  }
  const CommandTrace core = frac_trace(engine.profile(), plan.first, plan.second);
  engine.execute(core, rng);
  res.trace.append(core);
  return res;
}

}  // namespace

FracResult frac_store_half(Engine& engine, RowAddress target, Rng& rng, Staging staging,
                           std::span<const std::uint32_t> exclude) {
  const FracPlan plan = plan_frac(engine.topology(), engine.profile(), target, exclude);
  return run_frac(engine, plan, target.subarray, rng, staging);
}

NotResult not_op(Engine& engine, RowAddress src, RowAddress dst, Rng& rng) {
  const BankTopology& topo = engine.topology();
  topo.check(src);
  topo.check(dst);
  require_sequential(engine.profile());
  NotResult r;
  r.valid_columns = shared_columns_of(topo, src.subarray, dst.subarray);
  r.activation = activation_sets(topo, src, dst, engine.profile());
  for (std::uint32_t row : r.activation.rows_l) r.destinations.push_back({dst.subarray, row});
  r.trace = not_trace(engine.profile(), src, dst);
  engine.execute(r.trace, rng);
  return r;
}

NaryOpSpec make_nary_spec(const BankTopology& topology, const ChipProfile& profile, std::uint32_t n,
                          LogicKind kind, RowAddress r_ref, RowAddress r_com) {
  require_simultaneous(profile);
  if (n < 2 || !std::has_single_bit(n))
    throw Error(ErrorCode::InvalidArgument, "input count must be a power of two >= 2");
  if (n > (1U << profile.max_log2_n))
    throw Error(ErrorCode::CapabilityUnsupported,
                profile.name + ": at most " + std::to_string(1U << profile.max_log2_n) + " rows per subarray");
  const ActivationSet set = activation_sets(topology, r_ref, r_com, profile);
  if (r_ref.subarray == r_com.subarray || set.pattern != ActivationPattern::NN || set.rows_f.size() != n)
    throw Error(ErrorCode::PatternMismatch,
                "pair activates " + set.label() + ", need " + std::to_string(n) + ":" + std::to_string(n));
  NaryOpSpec spec;
  spec.n_inputs = n;
  spec.kind = kind;
  spec.reference_subarray = r_ref.subarray;
  spec.compute_subarray = r_com.subarray;
  spec.r_ref = r_ref;
  spec.r_com = r_com;
  spec.reference_rows = set.rows_f;
  spec.compute_rows = set.rows_l;
  spec.frac = plan_frac(topology, profile, {r_ref.subarray, spec.reference_rows.back()});
  return spec;
}

NaryOpSpec find_nary_spec(const BankTopology& topology, const ChipProfile& profile, std::uint32_t n,
                          LogicKind kind, std::uint32_t reference_subarray, std::uint32_t compute_subarray,
                          std::uint32_t skip) {
  require_simultaneous(profile);
  topology.shared_amp(reference_subarray, compute_subarray);
  if (n < 2 || !std::has_single_bit(n) || n > (1U << profile.max_log2_n))
    throw Error(ErrorCode::CapabilityUnsupported, profile.name + ": cannot activate " + std::to_string(n) + " rows");
  const std::uint32_t R = topology.rows_per_subarray();
  for (std::uint32_t a = 0; a < R; ++a) {
    for (std::uint32_t b = 0; b < R; ++b) {
      const Blocks bl = blocks_for(profile, a, b);
      if (bl.size_f != n || bl.size_l != n) continue;
      if (skip-- == 0)
        return make_nary_spec(topology, profile, n, kind, {reference_subarray, a}, {compute_subarray, b});
    }
  }
  throw Error(ErrorCode::PatternMismatch, "no address pair yields " + std::to_string(n) + ":" + std::to_string(n));
}

NaryResult nary_logic(Engine& engine, const NaryOpSpec& spec, std::span<const Bits> inputs, Rng& rng,
                      Staging staging) {
  const BankTopology& topo = engine.topology();
  const ChipProfile& profile = engine.profile();
  require_simultaneous(profile);
  if (spec.n_inputs > (1U << profile.max_log2_n))
    throw Error(ErrorCode::CapabilityUnsupported,
                profile.name + ": at most " + std::to_string(1U << profile.max_log2_n) + " rows per subarray");
  const ActivationSet set = activation_sets(topo, spec.r_ref, spec.r_com, profile);
  if (set.pattern != ActivationPattern::NN || set.rows_f.size() != spec.n_inputs ||
      set.rows_f != spec.reference_rows || set.rows_l != spec.compute_rows ||
      spec.reference_subarray != spec.r_ref.subarray || spec.compute_subarray != spec.r_com.subarray ||
      spec.r_ref.subarray == spec.r_com.subarray)
    throw Error(ErrorCode::PatternMismatch, "row sets do not match the decoder (" + set.label() + ")");
  if (inputs.size() != spec.n_inputs) throw Error(ErrorCode::InvalidArgument, "wrong number of inputs");
  const std::uint32_t C = topo.columns();
  for (const Bits& in : inputs)
    if (in.size() != C) throw Error(ErrorCode::InvalidArgument, "input width does not match the row");

  // Staging noise is overdriven by the writes, so it gets its own stream and
  // both staging modes leave `rng` in the same position.
  Rng stage_rng(rng.next());
  NaryResult res;
  const std::uint32_t ref = spec.reference_subarray, com = spec.compute_subarray;
  const FracPlan frac =
      spec.frac.rows.empty() ? plan_frac(topo, profile, {ref, spec.reference_rows.back()}) : spec.frac;
  res.trace = run_frac(engine, frac, ref, stage_rng, staging).trace;

  const Bits fill(C, is_and_family(spec.kind) ? 1 : 0);
  for (std::size_t i = 0; i + 1 < spec.reference_rows.size(); ++i) {
    if (staging == Staging::Commands) res.trace.append(write_trace(profile, {ref, spec.reference_rows[i]}, fill));
    stage_row(engine, {ref, spec.reference_rows[i]}, fill, staging, stage_rng);
  }
  for (std::size_t i = 0; i < spec.compute_rows.size(); ++i) {
    if (staging == Staging::Commands) res.trace.append(write_trace(profile, {com, spec.compute_rows[i]}, inputs[i]));
    stage_row(engine, {com, spec.compute_rows[i]}, inputs[i], staging, stage_rng);
  }

  const CommandTrace core = merged_trace(profile, spec.r_ref, spec.r_com);
  engine.execute(core, rng);
  res.trace.append(core);

  const std::uint32_t amp = topo.shared_amp(ref, com);
  const bool com_on_top = com + 1 == amp;
  const SensingRecord& rec = engine.last_sensing(amp);
  res.valid_columns = topo.amp_columns(amp);
  Bits com_bits = engine.peek_row({com, spec.compute_rows.front()});
  Bits ref_bits = engine.peek_row({ref, spec.reference_rows.front()});
  for (std::uint32_t j = 0; j < res.valid_columns.size(); ++j) {
    const std::uint8_t top = rec.latch_top[j] > 0.5 ? 1 : 0;
    const std::uint32_t col = res.valid_columns[j];
    com_bits[col] = com_on_top ? top : 1 - top;
    ref_bits[col] = 1 - com_bits[col];
    res.v_com.push_back(com_on_top ? rec.v_top[j] : rec.v_bot[j]);
    res.v_ref.push_back(com_on_top ? rec.v_bot[j] : rec.v_top[j]);
  }
  if (is_inverted(spec.kind)) {
    res.result = std::move(ref_bits);
    res.complement = std::move(com_bits);
  } else {
    res.result = std::move(com_bits);
    res.complement = std::move(ref_bits);
  }
  return res;
}

MajorityResult majority3(Engine& engine, std::uint32_t subarray, std::array<std::uint32_t, 3> rows, Rng& rng,
                         Staging staging) {
  const BankTopology& topo = engine.topology();
  const ChipProfile& profile = engine.profile();
  require_simultaneous(profile);
  for (std::uint32_t r : rows) topo.check({subarray, r});

  const std::uint32_t R = topo.rows_per_subarray();
  MajorityResult res;
  bool found = false;
  RowAddress first{}, second{};
  for (std::uint32_t a = 0; a < R && !found; ++a) {
    for (std::uint32_t b = 0; b < R && !found; ++b) {
      const Blocks bl = blocks_for(profile, a, b);
      if (bl.size_f != 2 || bl.size_l != 2) continue;
      const auto u = block_union(bl);
      if (u.size() != 4 || std::any_of(u.begin(), u.end(), [&](std::uint32_t r) { return contains(rows, r); })) continue;
      std::copy(u.begin(), u.end(), res.group.begin());
      first = {subarray, a};
      second = {subarray, b};
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::CapabilityUnsupported, "no four-row activation group available");

  std::array<Bits, 3> values;
  for (int i = 0; i < 3; ++i) values[i] = engine.peek_row({subarray, rows[i]});
  Rng stage_rng(rng.next());
  const FracPlan frac = plan_frac(topo, profile, {subarray, res.group[3]}, rows);
  res.trace = run_frac(engine, frac, subarray, stage_rng, staging).trace;
  for (int i = 0; i < 3; ++i) {
    if (staging == Staging::Commands) res.trace.append(write_trace(profile, {subarray, res.group[i]}, values[i]));
    stage_row(engine, {subarray, res.group[i]}, values[i], staging, stage_rng);
  }
  const CommandTrace core = merged_trace(profile, first, second);
  engine.execute(core, rng);
  res.trace.append(core);

  res.result.assign(topo.columns(), 0);
  for (std::uint32_t amp : {topo.amp_above(subarray), topo.amp_below(subarray)}) {
    const SensingRecord& rec = engine.last_sensing(amp);
    const bool on_top = amp == topo.amp_below(subarray);
    const std::uint32_t parity = topo.amp_parity(amp);
    for (std::uint32_t j = 0; j < topo.half_columns(); ++j) {
      const std::uint8_t top = rec.latch_top[j] > 0.5 ? 1 : 0;
      res.result[2 * j + parity] = on_top ? top : 1 - top;
    }
  }
  return res;
}

}  // namespace fcdram
