// Copyright 2026 The nqasm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Opcodes, operands and flavors of the NetQASM instruction set. Everything
// else in the toolchain derives operand layouts from the registry defined
// here.

#ifndef NQASM_ISA_HPP_
#define NQASM_ISA_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nqasm::isa {

enum class OperandKind : std::uint8_t {
  kImmediate,
  kRegister,
  kAddress,
  kArrayEntry,
  kArraySlice,
};

std::string_view to_string(OperandKind kind);

// Register names; the value is the high nibble of the binary encoding.
enum class RegName : std::uint8_t { kC = 0, kR = 1, kQ = 2, kM = 3 };

inline constexpr int kRegisterNames = 4;
inline constexpr int kRegistersPerName = 16;

struct RegisterRef {
  RegName name = RegName::kR;
  std::uint8_t index = 0;

  friend auto operator<=>(const RegisterRef&, const RegisterRef&) = default;
};

std::string to_string(RegisterRef reg);
// Throws kUnknownRegisterName / kRegisterIndexOutOfRange.
RegisterRef make_register(char name, int index);

struct Immediate {
  std::int32_t value = 0;
  friend auto operator<=>(const Immediate&, const Immediate&) = default;
};

// Opaque array identifier, never a memory offset.
struct Address {
  std::int32_t id = 0;
  friend auto operator<=>(const Address&, const Address&) = default;
};

// Array indices may be immediates in text form only; the binary form always
// carries registers.
using IndexOperand = std::variant<RegisterRef, Immediate>;

struct ArrayEntry {
  Address address;
  IndexOperand index;
  friend bool operator==(const ArrayEntry&, const ArrayEntry&) = default;
};

struct ArraySlice {
  Address address;
  IndexOperand start;
  IndexOperand stop;
  friend bool operator==(const ArraySlice&, const ArraySlice&) = default;
};

using Operand =
    std::variant<Immediate, RegisterRef, Address, ArrayEntry, ArraySlice>;

OperandKind kind_of(const Operand& operand);
std::string to_string(const Operand& operand);

enum class Flavor : std::uint8_t { kCore, kVanilla, kNv };

std::string_view to_string(Flavor flavor);
std::optional<Flavor> parse_flavor(std::string_view name);

// Instruction groups. The first eight are the core groups; gates belong to a
// flavor.
enum class Group : std::uint8_t {
  kClassical,
  kBranch,
  kMemory,
  kAllocate,
  kWait,
  kReturn,
  kMeasurement,
  kEntanglement,
  kGate,
};

// Numeric ids: core 0x00-0x2F, vanilla 0x30-0x5F, NV 0x60-0x7F.
enum class Opcode : std::uint8_t {
  // classical
  kAdd = 0x01,
  kSub = 0x02,
  kAddm = 0x03,
  kSubm = 0x04,
  // branch
  kJmp = 0x08,
  kBez = 0x09,
  kBnz = 0x0A,
  kBeq = 0x0B,
  kBne = 0x0C,
  kBlt = 0x0D,
  kBge = 0x0E,
  // memory
  kSet = 0x10,
  kStore = 0x11,
  kLoad = 0x12,
  kUndef = 0x13,
  kLea = 0x14,
  // allocate
  kArray = 0x18,
  kQalloc = 0x19,
  kQfree = 0x1A,
  // wait
  kWaitAll = 0x1C,
  kWaitAny = 0x1D,
  kWaitSingle = 0x1E,
  // return
  kRetReg = 0x20,
  kRetArr = 0x21,
  // measurement
  kMeas = 0x24,
  kPmrXyx = 0x25,
  kPmrZxz = 0x26,
  kPmrYzy = 0x27,
  // entanglement
  kCreateEpr = 0x28,
  kRecvEpr = 0x29,
  // vanilla flavor
  kInit = 0x30,
  kX = 0x31,
  kY = 0x32,
  kZ = 0x33,
  kH = 0x34,
  kS = 0x35,
  kK = 0x36,
  kT = 0x37,
  kRotX = 0x38,
  kRotY = 0x39,
  kRotZ = 0x3A,
  kCnot = 0x3B,
  kCphase = 0x3C,
  // NV flavor
  kNvInit = 0x60,
  kNvRotX = 0x61,
  kNvRotY = 0x62,
  kNvRotZ = 0x63,
  kCxDir = 0x64,
  kCyDir = 0x65,
};

enum class Axis : std::uint8_t { kX, kY, kZ };

struct OpcodeInfo {
  Opcode opcode;
  std::string_view mnemonic;
  Flavor flavor;
  Group group;
  std::vector<OperandKind> signature;
  // Operand position of the branch target, or -1.
  int branch_target = -1;
  // Number of qubit-address operands, which are the leading operands of
  // quantum instructions (gates, init, meas, qalloc, qfree).
  int qubit_operands = 0;
  // Rotation axis for rotation-type gates.
  std::optional<Axis> axis;
};

// Immutable table of every registered opcode.
class Registry {
 public:
  static const Registry& instance();

  // Throws kUnknownOpcode.
  const OpcodeInfo& info(Opcode opcode) const;
  const OpcodeInfo* find(std::uint8_t id) const;
  // Resolves a mnemonic. Core mnemonics are unique; flavor mnemonics that
  // exist in several flavors (init, rot_*) resolve to `preferred`, otherwise
  // to the single flavor that defines them.
  const OpcodeInfo* find(std::string_view mnemonic,
                         Flavor preferred = Flavor::kVanilla) const;
  std::span<const OpcodeInfo> all() const { return table_; }

 private:
  Registry();
  std::vector<OpcodeInfo> table_;
  std::vector<int> by_id_;
};

std::span<const OperandKind> signature(Opcode opcode);
Flavor flavor_of(Opcode opcode);
std::string_view mnemonic(Opcode opcode);
// Throws kUnknownOpcode for ids outside the registry.
Opcode opcode_from_id(std::uint8_t id);

inline constexpr std::uint32_t kMaxAngleExponent = 30;

// Angle n*pi/2^d, kept exact everywhere except inside the quantum backend.
struct AngleSpec {
  std::int32_t n = 0;
  std::uint32_t d = 0;

  friend bool operator==(const AngleSpec&, const AngleSpec&) = default;
};

// Throws kAngleOverflow when d > 30.
double angle_value(AngleSpec spec);
// Exact rational comparison of the two angles.
bool same_angle(AngleSpec a, AngleSpec b);
// Lowest-terms form (n odd or d == 0).
AngleSpec reduce(AngleSpec spec);

struct Instruction {
  Opcode opcode;
  std::vector<Operand> operands;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

const OpcodeInfo& info(const Instruction& instr);

struct Version {
  std::uint8_t major = 1;
  std::uint8_t minor = 0;
  friend auto operator<=>(const Version&, const Version&) = default;
};

struct Subroutine {
  Version version;
  std::int32_t app_id = 0;
  std::vector<Instruction> instructions;

  friend bool operator==(const Subroutine&, const Subroutine&) = default;
};

// True when every operand kind matches the opcode signature exactly and no
// array index is an immediate, i.e. the instruction can be encoded.
bool is_binary_ready(const Instruction& instr);

// Checks operand count, operand kinds (allowing the text-form relaxations when
// `allow_text_form`), branch-target ranges and the single-flavor rule. Throws
// kSignatureMismatch, kBranchOutOfRange or kWrongFlavor.
void check_subroutine(const Subroutine& sub, bool allow_text_form = false);

// The flavor used by the gates of `sub`, or kCore when it has none.
// Throws kWrongFlavor when gates of two flavors are mixed.
Flavor subroutine_flavor(const Subroutine& sub);

// Register operands that the instruction reads and writes.
std::vector<RegisterRef> registers_read(const Instruction& instr);
std::optional<RegisterRef> register_written(const Instruction& instr);

// Human readable table of the registry (markdown).
std::string isa_table();

}  // namespace nqasm::isa

#endif  // NQASM_ISA_HPP_
