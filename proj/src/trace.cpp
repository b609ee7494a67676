#include "fcdram/trace.hpp"

#include <charconv>
#include <sstream>

#include "fcdram/error.hpp"

namespace fcdram {

namespace {

std::string format_ns(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view s, std::string_view what) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::MalformedTrace, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

std::uint32_t parse_uint(std::string_view s) {
  std::uint32_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::MalformedTrace, "bad row address '" + std::string(s) + "'");
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Command Command::act(RowAddress row, double delay) {
  Command c;
  c.kind = CommandKind::Act;
  c.row = row;
  c.delay_ns = delay;
  return c;
}

Command Command::pre(double delay) {
  Command c;
  c.kind = CommandKind::Pre;
  c.delay_ns = delay;
  return c;
}

Command Command::wr(Bits data, double delay) {
  Command c;
  c.kind = CommandKind::Wr;
  c.data = std::move(data);
  c.delay_ns = delay;
  return c;
}

Command Command::rd(double delay) {
  Command c;
  c.kind = CommandKind::Rd;
  c.delay_ns = delay;
  return c;
}

Command Command::idle(double ns, double delay) {
  Command c;
  c.kind = CommandKind::Idle;
  c.idle_ns = ns;
  c.delay_ns = delay;
  return c;
}

CommandTrace& CommandTrace::append(const CommandTrace& other) {
  commands.insert(commands.end(), other.commands.begin(), other.commands.end());
  return *this;
}

std::string bits_to_hex(const Bits& bits) {
  static const char digits[] = "0123456789abcdef";
  const std::size_t nibbles = (bits.size() + 3) / 4;
  std::string out(nibbles, '0');
  for (std::size_t i = 0; i < nibbles; ++i) {
    unsigned v = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t col = i * 4 + b;
      if (col < bits.size() && bits[col]) v |= 1U << b;
    }
    out[nibbles - 1 - i] = digits[v];
  }
  return out;
}

Bits hex_to_bits(std::string_view hex, std::uint32_t columns) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty()) throw Error(ErrorCode::MalformedTrace, "empty WR pattern");
  Bits bits(columns, 0);
  const std::size_t n = hex.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char ch = hex[n - 1 - i];
    unsigned v;
    if (ch >= '0' && ch <= '9') v = ch - '0';
    else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
    else throw Error(ErrorCode::MalformedTrace, "bad hex digit in WR pattern");
    for (unsigned b = 0; b < 4; ++b) {
      const std::size_t col = i * 4 + b;
      if (((v >> b) & 1U) == 0) continue;
      if (col >= columns) throw Error(ErrorCode::MalformedTrace, "WR pattern wider than the row");
      bits[col] = 1;
    }
  }
  return bits;
}

std::string CommandTrace::to_text() const {
  std::ostringstream os;
  for (const Command& c : commands) {
    switch (c.kind) {
      case CommandKind::Act: os << "ACT " << c.row.subarray << ':' << c.row.row; break;
      case CommandKind::Pre: os << "PRE"; break;
      case CommandKind::Wr: os << "WR " << bits_to_hex(c.data); break;
      case CommandKind::Rd: os << "RD"; break;
      case CommandKind::Idle: os << "IDLE " << format_ns(c.idle_ns); break;
    }
    os << " # delay=" << format_ns(c.delay_ns) << '\n';
  }
  return os.str();
}

CommandTrace CommandTrace::parse(std::string_view text, std::uint32_t columns) {
  CommandTrace trace;
  std::size_t lineno = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++lineno;

    double delay = 0.0;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      std::string_view comment = trim(line.substr(hash + 1));
      line = line.substr(0, hash);
      if (comment.starts_with("delay=")) delay = parse_number(comment.substr(6), "delay");
    }
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t sp = line.find(' ');
    const std::string_view op = line.substr(0, sp);
    const std::string_view arg = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp + 1));
    auto need_arg = [&](bool want) {
      if (want == arg.empty())
        throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(lineno) + ": bad operand for " + std::string(op));
    };
    if (op == "ACT") {
      need_arg(true);
      const std::size_t colon = arg.find(':');
      if (colon == std::string_view::npos) throw Error(ErrorCode::MalformedTrace, "ACT needs <subarray>:<row>");
      trace.add(Command::act({parse_uint(arg.substr(0, colon)), parse_uint(arg.substr(colon + 1))}, delay));
    } else if (op == "PRE") {
      need_arg(false);
      trace.add(Command::pre(delay));
    } else if (op == "WR") {
      need_arg(true);
      trace.add(Command::wr(hex_to_bits(arg, columns), delay));
    } else if (op == "RD") {
      need_arg(false);
      trace.add(Command::rd(delay));
    } else if (op == "IDLE") {
      need_arg(true);
      trace.add(Command::idle(parse_number(arg, "idle"), delay));
    } else {
      throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(lineno) + ": unknown command '" + std::string(op) + "'");
    }
  }
  return trace;
}

void CommandTrace::validate(const TimingThresholds& timing) const {
  for (const Command& c : commands) {
    if (!(c.delay_ns >= 0.0) || !(c.idle_ns >= 0.0))
      throw Error(ErrorCode::MalformedTrace, "delays must be non-negative");
  }
  std::size_t last = commands.size();
  double trailing_idle = 0.0;
  bool has_trailing = false;
  while (last > 0 && commands[last - 1].kind == CommandKind::Idle) {
    trailing_idle += commands[last - 1].idle_ns + commands[last - 1].delay_ns;
    has_trailing = true;
    --last;
  }
  if (last == 0 || commands[last - 1].kind != CommandKind::Pre)
    throw Error(ErrorCode::MalformedTrace, "trace must end with PRE");
  if (has_trailing && trailing_idle < timing.trp_nominal)
    throw Error(ErrorCode::MalformedTrace, "trailing idle shorter than trp_nominal");
}

}  // namespace fcdram
