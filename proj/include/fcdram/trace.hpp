#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fcdram/topology.hpp"
#include "fcdram/variation.hpp"

namespace fcdram {

using Bits = std::vector<std::uint8_t>;

enum class CommandKind { Act, Pre, Wr, Rd, Idle };

struct Command {
  CommandKind kind = CommandKind::Idle;
  double delay_ns = 0.0;  // time since the previous command was issued
  RowAddress row{};       // Act
  Bits data;              // Wr, one bit per column
  double idle_ns = 0.0;   // Idle

  static Command act(RowAddress row, double delay = 0.0);
  static Command pre(double delay = 0.0);
  static Command wr(Bits data, double delay = 0.0);
  static Command rd(double delay = 0.0);
  static Command idle(double ns, double delay = 0.0);
};

// Textual form, one command per line:
//   ACT <subarray>:<row> | PRE | WR <hex> | RD | IDLE <ns>, each with "# delay=<ns>".
// WR hex is big-endian with column 0 in the least significant bit.
struct CommandTrace {
  std::vector<Command> commands;

  CommandTrace& add(Command c) {
    commands.push_back(std::move(c));
    return *this;
  }
  CommandTrace& append(const CommandTrace& other);
  std::string to_text() const;
  static CommandTrace parse(std::string_view text, std::uint32_t columns);

  // Non-negative delays, and the last non-idle command is PRE. Trailing idle, if
  // present, must cover trp_nominal; when absent it is implied.
  void validate(const TimingThresholds& timing) const;
};

std::string bits_to_hex(const Bits& bits);
Bits hex_to_bits(std::string_view hex, std::uint32_t columns);

}  // namespace fcdram
