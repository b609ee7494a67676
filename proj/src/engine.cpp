#include "fcdram/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fcdram/decoder.hpp"
#include "fcdram/error.hpp"

namespace fcdram {

double charge_share(std::span<const WeightedCell> cells, double prior) {
  double wv = 0.0, w = 0.0;
  for (const WeightedCell& c : cells) {
    wv += c.weight * c.voltage;
    w += c.weight;
  }
  return w > 0.0 ? wv / w : prior;
}

Engine::Engine(std::shared_ptr<const BankTopology> topology, ChipProfile profile,
               std::shared_ptr<const VariationSample> sample, double temperature_c, const kernels::Table* table)
    : topology_(std::move(topology)),
      profile_(std::move(profile)),
      sample_(std::move(sample)),
      temperature_(temperature_c),
      sigma_trial_(trial_noise_sigma(profile_.noise, temperature_c)),
      k_(table != nullptr ? table : &kernels::best()),
      J_(topology_->half_columns()) {
  profile_.validate(*topology_);
  const BankTopology& t = *topology_;
  const std::uint32_t S = t.num_subarrays(), R = t.rows_per_subarray(), C = t.columns();
  if (sample_->cell_weight.size() != std::size_t{S} * R * C || sample_->half_columns != J_)
    throw Error(ErrorCode::InvalidArgument, "variation sample does not match the topology");

  cells_.assign(std::size_t{S} * R * C, 0.0);
  weights_.resize(cells_.size());
  for (std::uint32_t s = 0; s < S; ++s) {
    for (std::uint32_t r = 0; r < R; ++r) {
      for (std::uint32_t h = 0; h < 2; ++h) {
        const double dist = t.distance_factor({s, r}, amp_of(s, h));
        const double atten = 1.0 - profile_.noise.distance_beta * dist;
        double* w = &weights_[half_index(s, r, h)];
        const double* cw = &sample_->cell_weight[(std::size_t{s} * R + r) * C];
        for (std::uint32_t j = 0; j < J_; ++j) w[j] = cw[2 * j + h] * atten;
      }
    }
  }
  amps_.resize(t.num_amp_arrays());
  for (Amp& a : amps_) {
    a.top.assign(J_, 0.5);
    a.bot.assign(J_, 0.5);
    a.shared_top.assign(J_, 0.5);
    a.shared_bot.assign(J_, 0.5);
  }
  sensed_.resize(t.num_amp_arrays());
  active_.resize(S);
  acc_wv_.resize(J_);
  acc_w_.resize(J_);
  buf_a_.resize(J_);
  buf_b_.resize(J_);
  scratch_.resize(J_);
}

std::size_t Engine::half_index(std::uint32_t subarray, std::uint32_t row, std::uint32_t parity) const {
  return ((std::size_t{subarray} * topology_->rows_per_subarray() + row) * 2 + parity) * J_;
}

std::uint32_t Engine::amp_of(std::uint32_t subarray, std::uint32_t parity) const {
  return topology_->amp_parity(subarray) == parity ? subarray : subarray + 1;
}

std::uint32_t Engine::rows_on(std::uint32_t amp) const {
  std::uint32_t n = 0;
  if (amp > 0) n += static_cast<std::uint32_t>(active_[amp - 1].size());
  if (amp < topology_->num_subarrays()) n += static_cast<std::uint32_t>(active_[amp].size());
  return n;
}

bool Engine::any_connected() const {
  return std::any_of(active_.begin(), active_.end(), [](const auto& v) { return !v.empty(); });
}

bool Engine::is_idle() const { return !any_connected() && !pre_pending_; }

bool Engine::is_connected(RowAddress row) const {
  topology_->check(row);
  const auto& links = active_[row.subarray];
  return std::any_of(links.begin(), links.end(), [&](const Link& l) { return l.row == row.row; });
}

void Engine::terminal(std::uint32_t amp, bool top_side, double* out) const {
  const std::uint32_t parity = topology_->amp_parity(amp);
  std::fill(acc_wv_.begin(), acc_wv_.end(), 0.0);
  std::fill(acc_w_.begin(), acc_w_.end(), 0.0);
  const bool exists = top_side ? amp > 0 : amp < topology_->num_subarrays();
  if (exists) {
    const std::uint32_t s = top_side ? amp - 1 : amp;
    for (const Link& l : active_[s]) {
      const std::size_t idx = half_index(s, l.row, parity);
      k_->share_accumulate(acc_wv_.data(), acc_w_.data(), &cells_[idx], &weights_[idx], J_);
    }
  }
  k_->share_finalize(out, acc_wv_.data(), acc_w_.data(), 0.5, J_);
}

void Engine::connect(std::span<const RowAddress> rows, double t, Rng& rng) {
  std::vector<std::pair<std::uint32_t, std::size_t>> added;  // (subarray, link index)
  for (RowAddress row : rows) {
    auto& links = active_[row.subarray];
    if (std::any_of(links.begin(), links.end(), [&](const Link& l) { return l.row == row.row; })) continue;
    links.push_back(Link{});
    Link& link = links.back();
    link.row = row.row;
    link.connect_time = t;
    for (std::uint32_t h = 0; h < 2; ++h) {
      Amp& amp = amps_[amp_of(row.subarray, h)];
      if (amp.kind == AmpPhaseKind::Precharged) {
        amp.kind = AmpPhaseKind::Sharing;
        amp.sense_at = t + profile_.timing.t_latch;
      } else if (amp.kind == AmpPhaseKind::Latched) {
        link.late[h] = true;
      }
    }
    added.emplace_back(row.subarray, links.size() - 1);
  }
  // Rows joining a latched amp are driven by it; the load is every row the
  // activation leaves on that amp.
  const NoiseParams& n = profile_.noise;
  if (n.drive_failure_scale <= 0.0) return;
  for (auto [s, idx] : added) {
    Link& link = active_[s][idx];
    for (std::uint32_t h = 0; h < 2; ++h) {
      if (!link.late[h]) continue;
      const std::uint32_t a = amp_of(s, h);
      const double k = rows_on(a);
      const double dist = topology_->distance_factor({s, link.row}, a);
      // Probabilities depend only on the chip, so they are kept per (amp, load, row).
      const std::uint64_t key = (std::uint64_t{a} << 44) | (static_cast<std::uint64_t>(k) << 32) |
                                topology_->global_row({s, link.row});
      auto it = fail_prob_.find(key);
      if (it == fail_prob_.end()) {
        if (fail_prob_.size() >= 8192) fail_prob_.clear();
        std::vector<double> probs(J_);
        for (std::uint32_t j = 0; j < J_; ++j) probs[j] = restore_failure_prob(n, k, dist, sample_->drive(a, j));
        it = fail_prob_.emplace(key, std::move(probs)).first;
      }
      const double* probs = it->second.data();
      link.fail[h].resize(J_);
      for (std::uint32_t j = 0; j < J_; ++j) link.fail[h][j] = rng.uniform() < probs[j] ? 1 : 0;
    }
  }
}

void Engine::sense(std::uint32_t a, Rng& rng) {
  Amp& amp = amps_[a];
  SensingRecord& rec = sensed_[a];
  rec.v_top.resize(J_);
  rec.v_bot.resize(J_);
  terminal(a, true, rec.v_top.data());
  terminal(a, false, rec.v_bot.data());
  rec.rows = rows_on(a);

  const NoiseParams& n = profile_.noise;
  const double k = std::max<std::uint32_t>(rec.rows, 1);
  const double sigma = std::sqrt(sigma_trial_ * sigma_trial_ + n.sigma_multirow * n.sigma_multirow * (1.0 - 1.0 / k));
  std::span<double> noise(buf_a_);
  rng.fill_normal(noise, sigma);

  rec.latch_top.resize(J_);
  k_->sense(rec.latch_top.data(), rec.v_top.data(), rec.v_bot.data(), &sample_->amp_offset[std::size_t{a} * J_],
            noise.data(), n.coupling_kappa, scratch_.data(), J_);
  for (std::uint32_t j = 0; j < J_; ++j) {
    amp.top[j] = rec.latch_top[j];
    amp.bot[j] = 1.0 - rec.latch_top[j];
  }
  amp.shared_top = rec.v_top;
  amp.shared_bot = rec.v_bot;
  amp.kind = AmpPhaseKind::Latched;

  const std::uint32_t parity = topology_->amp_parity(a);
  for (std::uint32_t s : {a - 1, a}) {
    if (s >= topology_->num_subarrays()) continue;  // a - 1 wraps for the top edge
    for (Link& l : active_[s]) {
      l.late[parity] = false;
      l.fail[parity].clear();
    }
  }
}

void Engine::advance(double t, Rng& rng) {
  if (pre_pending_) return;  // a pending PRE holds off the sense enable
  for (;;) {
    std::uint32_t next = static_cast<std::uint32_t>(amps_.size());
    for (std::uint32_t a = 0; a < amps_.size(); ++a) {
      if (amps_[a].kind != AmpPhaseKind::Sharing || amps_[a].sense_at > t) continue;
      if (next == amps_.size() || amps_[a].sense_at < amps_[next].sense_at) next = a;
    }
    if (next == amps_.size()) return;
    sense(next, rng);
  }
}

void Engine::apply_precharge(double t) {
  const double tras = profile_.timing.tras_nominal;
  const double keep = 1.0 - profile_.noise.frac_leak;
  for (std::uint32_t a = 0; a < amps_.size(); ++a) {
    Amp& amp = amps_[a];
    if (amp.kind == AmpPhaseKind::Precharged) continue;
    const std::uint32_t parity = topology_->amp_parity(a);
    for (bool top_side : {true, false}) {
      if (top_side ? a == 0 : a >= topology_->num_subarrays()) continue;
      const std::uint32_t s = top_side ? a - 1 : a;
      if (active_[s].empty()) continue;
      if (amp.kind == AmpPhaseKind::Sharing) {
        terminal(a, top_side, buf_b_.data());
        for (const Link& l : active_[s]) k_->scale(&cells_[half_index(s, l.row, parity)], buf_b_.data(), keep, J_);
        continue;
      }
      const double* target = top_side ? amp.top.data() : amp.bot.data();
      const double* shared = top_side ? amp.shared_top.data() : amp.shared_bot.data();
      for (const Link& l : active_[s]) {
        double* c = &cells_[half_index(s, l.row, parity)];
        const double f = l.overdriven[parity] ? 1.0 : std::min(1.0, (t - l.connect_time) / tras);
        if (l.late[parity]) {
          const auto& fail = l.fail[parity];
          k_->restore(c, c, target, f, fail.empty() ? nullptr : fail.data(), J_);
        } else {
          k_->restore(c, shared, target, f, nullptr, J_);
        }
      }
    }
  }
  for (Amp& amp : amps_) {
    amp.kind = AmpPhaseKind::Precharged;
    std::fill(amp.top.begin(), amp.top.end(), 0.5);
    std::fill(amp.bot.begin(), amp.bot.end(), 0.5);
  }
  for (auto& links : active_) links.clear();
  pre_pending_ = false;
}

void Engine::act(RowAddress row, double t, Rng& rng) {
  topology_->check(row);
  if (pre_pending_) {
    if (t - t_pre_ < profile_.timing.t_decoder_reset && has_last_act_ && any_connected()) {
      const ActivationSet set = activation_sets(*topology_, last_act_, row, profile_);
      if (set.pattern != ActivationPattern::None) {
        pre_pending_ = false;
        std::vector<RowAddress> rows;
        for (std::uint32_t r : set.rows_f) rows.push_back({set.subarray_f, r});
        for (std::uint32_t r : set.rows_l) rows.push_back({set.subarray_l, r});
        connect(rows, t, rng);
        last_act_ = row;
        advance(t, rng);
        return;
      }
    }
    apply_precharge(t_pre_);
  } else if (any_connected()) {
    throw Error(ErrorCode::MalformedTrace, "ACT issued to an open bank without PRE");
  }
  connect(std::span<const RowAddress>(&row, 1), t, rng);
  last_act_ = row;
  has_last_act_ = true;
  advance(t, rng);
}

void Engine::check_latched(RowAddress row) const {
  topology_->check(row);
  if (pre_pending_ || !is_connected(row))
    throw Error(ErrorCode::NotActivated,
                "row " + std::to_string(row.subarray) + ":" + std::to_string(row.row) + " is not activated");
  for (std::uint32_t h = 0; h < 2; ++h) {
    if (amps_[amp_of(row.subarray, h)].kind != AmpPhaseKind::Latched)
      throw Error(ErrorCode::NotActivated, "sense amplifiers have not latched");
  }
}

Bits Engine::read_row(RowAddress row) const {
  check_latched(row);
  Bits out(topology_->columns());
  for (std::uint32_t h = 0; h < 2; ++h) {
    const std::uint32_t a = amp_of(row.subarray, h);
    // The subarray is the bottom side of the amp above it and the top side of the one below.
    const std::vector<double>& v = a == row.subarray ? amps_[a].bot : amps_[a].top;
    for (std::uint32_t j = 0; j < J_; ++j) out[2 * j + h] = v[j] > 0.5 ? 1 : 0;
  }
  return out;
}

void Engine::write_row(RowAddress row, const Bits& bits) {
  check_latched(row);
  if (bits.size() != topology_->columns())
    throw Error(ErrorCode::InvalidArgument, "write pattern width does not match the row");
  for (std::uint32_t h = 0; h < 2; ++h) {
    const std::uint32_t a = amp_of(row.subarray, h);
    Amp& amp = amps_[a];
    std::vector<double>& driven = a == row.subarray ? amp.bot : amp.top;
    std::vector<double>& opposite = a == row.subarray ? amp.top : amp.bot;
    for (std::uint32_t j = 0; j < J_; ++j) {
      driven[j] = bits[2 * j + h] ? 1.0 : 0.0;
      opposite[j] = 1.0 - driven[j];
    }
    for (std::uint32_t s : {a - 1, a}) {
      if (s >= topology_->num_subarrays()) continue;
      for (Link& l : active_[s]) {
        l.overdriven[h] = true;
        l.late[h] = false;
        l.fail[h].clear();
      }
    }
  }
}

std::vector<Bits> Engine::run(const CommandTrace& trace, Rng& rng) {
  if (is_idle()) now_ = 0.0;
  std::vector<Bits> reads;
  for (const Command& c : trace.commands) {
    if (!(c.delay_ns >= 0.0)) throw Error(ErrorCode::MalformedTrace, "negative delay");
    const double t = now_ + c.delay_ns;
    now_ = t;
    switch (c.kind) {
      case CommandKind::Act:
        advance(t, rng);
        act(c.row, t, rng);
        break;
      case CommandKind::Pre:
        if (!pre_pending_) {
          advance(t, rng);
          pre_pending_ = true;
          t_pre_ = t;
        }
        break;
      case CommandKind::Wr:
      case CommandKind::Rd:
        if (pre_pending_) apply_precharge(t_pre_);
        if (!has_last_act_) throw Error(ErrorCode::NotActivated, "no row has been activated");
        advance(t, rng);
        if (c.kind == CommandKind::Wr) write_row(last_act_, c.data);
        else reads.push_back(read_row(last_act_));
        break;
      case CommandKind::Idle:
        if (!(c.idle_ns >= 0.0)) throw Error(ErrorCode::MalformedTrace, "negative idle");
        now_ += c.idle_ns;
        advance(now_, rng);
        break;
    }
  }
  return reads;
}

std::vector<Bits> Engine::execute(const CommandTrace& trace, Rng& rng) {
  trace.validate(profile_.timing);
  if (!is_idle()) throw Error(ErrorCode::MalformedTrace, "execute requires an idle bank; use step");
  auto reads = run(trace, rng);
  if (pre_pending_) apply_precharge(t_pre_);
  return reads;
}

std::vector<Bits> Engine::step(const CommandTrace& trace, Rng& rng) {
  auto reads = run(trace, rng);
  return reads;
}

void Engine::set_temperature(double temperature_c) {
  sigma_trial_ = trial_noise_sigma(profile_.noise, temperature_c);
  temperature_ = temperature_c;
}

double Engine::cell(RowAddress row, std::uint32_t column) const {
  topology_->check(row);
  if (column >= topology_->columns()) throw Error(ErrorCode::OutOfRange, "column out of range");
  return cells_[half_index(row.subarray, row.row, column & 1U) + (column >> 1)];
}

void Engine::set_cell(RowAddress row, std::uint32_t column, double voltage) {
  topology_->check(row);
  if (column >= topology_->columns()) throw Error(ErrorCode::OutOfRange, "column out of range");
  cells_[half_index(row.subarray, row.row, column & 1U) + (column >> 1)] = std::clamp(voltage, 0.0, 1.0);
}

void Engine::poke_row(RowAddress row, const Bits& bits) {
  topology_->check(row);
  if (bits.size() != topology_->columns())
    throw Error(ErrorCode::InvalidArgument, "row pattern width does not match the row");
  for (std::uint32_t h = 0; h < 2; ++h) {
    double* c = &cells_[half_index(row.subarray, row.row, h)];
    for (std::uint32_t j = 0; j < J_; ++j) c[j] = static_cast<double>(bits[2 * j + h] != 0);
  }
}

void Engine::fill_row(RowAddress row, double voltage) {
  topology_->check(row);
  const double v = std::clamp(voltage, 0.0, 1.0);
  std::fill_n(&cells_[half_index(row.subarray, row.row, 0)], 2 * J_, v);
}

Bits Engine::peek_row(RowAddress row) const {
  topology_->check(row);
  Bits out(topology_->columns());
  for (std::uint32_t h = 0; h < 2; ++h) {
    const double* c = &cells_[half_index(row.subarray, row.row, h)];
    for (std::uint32_t j = 0; j < J_; ++j) out[2 * j + h] = c[j] > 0.5 ? 1 : 0;
  }
  return out;
}

std::span<const double> Engine::row_half(RowAddress row, std::uint32_t parity) const {
  topology_->check(row);
  return {&cells_[half_index(row.subarray, row.row, parity & 1U)], J_};
}

std::span<double> Engine::row_half(RowAddress row, std::uint32_t parity) {
  topology_->check(row);
  return {&cells_[half_index(row.subarray, row.row, parity & 1U)], J_};
}

AmpPhase Engine::amp_phase(std::uint32_t amp, std::uint32_t column) const {
  if (amp >= amps_.size() || column >= topology_->columns()) throw Error(ErrorCode::OutOfRange, "amp or column out of range");
  if (topology_->amp_parity(amp) != (column & 1U))
    throw Error(ErrorCode::InvalidArgument, "amp array does not serve this column");
  const Amp& a = amps_[amp];
  const std::uint32_t j = column >> 1;
  AmpPhase p;
  p.kind = a.kind;
  if (a.kind == AmpPhaseKind::Sharing) {
    terminal(amp, true, buf_a_.data());
    p.v_top = buf_a_[j];
    terminal(amp, false, buf_a_.data());
    p.v_bot = buf_a_[j];
  } else {
    p.v_top = a.top[j];
    p.v_bot = a.bot[j];
  }
  return p;
}

}  // namespace fcdram
