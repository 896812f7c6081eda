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

#include "nqasm/isa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "nqasm/error.hpp"

namespace nqasm::isa {

namespace {

constexpr OperandKind I = OperandKind::kImmediate;
constexpr OperandKind R = OperandKind::kRegister;
constexpr OperandKind A = OperandKind::kAddress;
constexpr OperandKind E = OperandKind::kArrayEntry;
constexpr OperandKind S = OperandKind::kArraySlice;

std::vector<OpcodeInfo> build_table() {
  using O = Opcode;
  using F = Flavor;
  using G = Group;
  std::vector<OpcodeInfo> t;
  auto add = [&t](O op, std::string_view name, F flavor, G group,
                  std::vector<OperandKind> sig, int branch = -1, int qubits = 0,
                  std::optional<Axis> axis = std::nullopt) {
    t.push_back(OpcodeInfo{op, name, flavor, group, std::move(sig), branch,
                           qubits, axis});
  };

  add(O::kAdd, "add", F::kCore, G::kClassical, {R, R, R});
  add(O::kSub, "sub", F::kCore, G::kClassical, {R, R, R});
  add(O::kAddm, "addm", F::kCore, G::kClassical, {R, R, R, R});
  add(O::kSubm, "subm", F::kCore, G::kClassical, {R, R, R, R});

  add(O::kJmp, "jmp", F::kCore, G::kBranch, {I}, 0);
  add(O::kBez, "bez", F::kCore, G::kBranch, {R, I}, 1);
  add(O::kBnz, "bnz", F::kCore, G::kBranch, {R, I}, 1);
  add(O::kBeq, "beq", F::kCore, G::kBranch, {R, R, I}, 2);
  add(O::kBne, "bne", F::kCore, G::kBranch, {R, R, I}, 2);
  add(O::kBlt, "blt", F::kCore, G::kBranch, {R, R, I}, 2);
  add(O::kBge, "bge", F::kCore, G::kBranch, {R, R, I}, 2);

  add(O::kSet, "set", F::kCore, G::kMemory, {R, I});
  add(O::kStore, "store", F::kCore, G::kMemory, {R, E});
  add(O::kLoad, "load", F::kCore, G::kMemory, {R, E});
  add(O::kUndef, "undef", F::kCore, G::kMemory, {E});
  add(O::kLea, "lea", F::kCore, G::kMemory, {R, A});

  add(O::kArray, "array", F::kCore, G::kAllocate, {I, A});
  add(O::kQalloc, "qalloc", F::kCore, G::kAllocate, {R}, -1, 1);
  add(O::kQfree, "qfree", F::kCore, G::kAllocate, {R}, -1, 1);

  add(O::kWaitAll, "wait_all", F::kCore, G::kWait, {S});
  add(O::kWaitAny, "wait_any", F::kCore, G::kWait, {S});
  add(O::kWaitSingle, "wait_single", F::kCore, G::kWait, {E});

  add(O::kRetReg, "ret_reg", F::kCore, G::kReturn, {R});
  add(O::kRetArr, "ret_arr", F::kCore, G::kReturn, {A});

  add(O::kMeas, "meas", F::kCore, G::kMeasurement, {R, R}, -1, 1);
  add(O::kPmrXyx, "pmr_xyx", F::kCore, G::kMeasurement, {I, I, I, I, I, I});
  add(O::kPmrZxz, "pmr_zxz", F::kCore, G::kMeasurement, {I, I, I, I, I, I});
  add(O::kPmrYzy, "pmr_yzy", F::kCore, G::kMeasurement, {I, I, I, I, I, I});

  add(O::kCreateEpr, "create_epr", F::kCore, G::kEntanglement, {R, R, R, R, R});
  add(O::kRecvEpr, "recv_epr", F::kCore, G::kEntanglement, {R, R, R, R});

  add(O::kInit, "init", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kX, "x", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kY, "y", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kZ, "z", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kH, "h", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kS, "s", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kK, "k", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kT, "t", F::kVanilla, G::kGate, {R}, -1, 1);
  add(O::kRotX, "rot_x", F::kVanilla, G::kGate, {R, I, I}, -1, 1, Axis::kX);
  add(O::kRotY, "rot_y", F::kVanilla, G::kGate, {R, I, I}, -1, 1, Axis::kY);
  add(O::kRotZ, "rot_z", F::kVanilla, G::kGate, {R, I, I}, -1, 1, Axis::kZ);
  add(O::kCnot, "cnot", F::kVanilla, G::kGate, {R, R}, -1, 2);
  add(O::kCphase, "cphase", F::kVanilla, G::kGate, {R, R}, -1, 2);

  add(O::kNvInit, "init", F::kNv, G::kGate, {R}, -1, 1);
  add(O::kNvRotX, "rot_x", F::kNv, G::kGate, {R, I, I}, -1, 1, Axis::kX);
  add(O::kNvRotY, "rot_y", F::kNv, G::kGate, {R, I, I}, -1, 1, Axis::kY);
  add(O::kNvRotZ, "rot_z", F::kNv, G::kGate, {R, I, I}, -1, 1, Axis::kZ);
  add(O::kCxDir, "cx_dir", F::kNv, G::kGate, {R, R, I, I}, -1, 2, Axis::kX);
  add(O::kCyDir, "cy_dir", F::kNv, G::kGate, {R, R, I, I}, -1, 2, Axis::kY);
  return t;
}

bool kind_accepts(OperandKind want, const Operand& op, bool text_form) {
  const OperandKind have = kind_of(op);
  if (have == want) {
    if (text_form) return true;
    if (const auto* e = std::get_if<ArrayEntry>(&op)) {
      return std::holds_alternative<RegisterRef>(e->index);
    }
    if (const auto* s = std::get_if<ArraySlice>(&op)) {
      return std::holds_alternative<RegisterRef>(s->start) &&
             std::holds_alternative<RegisterRef>(s->stop);
    }
    return true;
  }
  // Text form lets immediates and array addresses stand in for registers;
  // resolve lowers them with set/lea.
  return text_form && want == OperandKind::kRegister &&
         (have == OperandKind::kImmediate || have == OperandKind::kAddress);
}

void add_index_reg(const IndexOperand& idx, std::vector<RegisterRef>& out) {
  if (const auto* r = std::get_if<RegisterRef>(&idx)) out.push_back(*r);
}

}  // namespace

std::string_view to_string(OperandKind kind) {
  switch (kind) {
    case OperandKind::kImmediate: return "IMMEDIATE";
    case OperandKind::kRegister: return "REGISTER";
    case OperandKind::kAddress: return "ADDRESS";
    case OperandKind::kArrayEntry: return "ARRAY_ENTRY";
    case OperandKind::kArraySlice: return "ARRAY_SLICE";
  }
  return "?";
}

std::string to_string(RegisterRef reg) {
  static constexpr char kNames[] = {'C', 'R', 'Q', 'M'};
  return kNames[static_cast<int>(reg.name)] + std::to_string(reg.index);
}

RegisterRef make_register(char name, int index) {
  RegisterRef reg;
  switch (name) {
    case 'C': reg.name = RegName::kC; break;
    case 'R': reg.name = RegName::kR; break;
    case 'Q': reg.name = RegName::kQ; break;
    case 'M': reg.name = RegName::kM; break;
    default:
      throw Error(ErrorCode::kUnknownRegisterName,
                  std::string("'") + name + "' is not one of C, R, Q, M");
  }
  if (index < 0 || index >= kRegistersPerName) {
    throw Error(ErrorCode::kRegisterIndexOutOfRange,
                "register index " + std::to_string(index));
  }
  reg.index = static_cast<std::uint8_t>(index);
  return reg;
}

OperandKind kind_of(const Operand& operand) {
  return static_cast<OperandKind>(operand.index());
}

namespace {

std::string index_string(const IndexOperand& idx) {
  if (const auto* r = std::get_if<RegisterRef>(&idx)) return to_string(*r);
  return std::to_string(std::get<Immediate>(idx).value);
}

}  // namespace

std::string to_string(const Operand& operand) {
  struct Visitor {
    std::string operator()(const Immediate& v) const {
      return std::to_string(v.value);
    }
    std::string operator()(const RegisterRef& r) const { return to_string(r); }
    std::string operator()(const Address& a) const {
      return "@" + std::to_string(a.id);
    }
    std::string operator()(const ArrayEntry& e) const {
      return "@" + std::to_string(e.address.id) + "[" + index_string(e.index) +
             "]";
    }
    std::string operator()(const ArraySlice& s) const {
      return "@" + std::to_string(s.address.id) + "[" + index_string(s.start) +
             ":" + index_string(s.stop) + "]";
    }
  };
  return std::visit(Visitor{}, operand);
}

std::string_view to_string(Flavor flavor) {
  switch (flavor) {
    case Flavor::kCore: return "core";
    case Flavor::kVanilla: return "vanilla";
    case Flavor::kNv: return "nv";
  }
  return "?";
}

std::optional<Flavor> parse_flavor(std::string_view name) {
  if (name == "vanilla") return Flavor::kVanilla;
  if (name == "nv") return Flavor::kNv;
  if (name == "core") return Flavor::kCore;
  return std::nullopt;
}

Registry::Registry() : table_(build_table()), by_id_(256, -1) {
  for (std::size_t i = 0; i < table_.size(); ++i) {
    by_id_[static_cast<std::uint8_t>(table_[i].opcode)] = static_cast<int>(i);
  }
}

const Registry& Registry::instance() {
  static const Registry registry;
  return registry;
}

const OpcodeInfo& Registry::info(Opcode opcode) const {
  const OpcodeInfo* found = find(static_cast<std::uint8_t>(opcode));
  if (found == nullptr) {
    throw Error(ErrorCode::kUnknownOpcode,
                "opcode id " + std::to_string(static_cast<int>(opcode)));
  }
  return *found;
}

const OpcodeInfo* Registry::find(std::uint8_t id) const {
  const int slot = by_id_[id];
  return slot < 0 ? nullptr : &table_[static_cast<std::size_t>(slot)];
}

const OpcodeInfo* Registry::find(std::string_view mnemonic,
                                 Flavor preferred) const {
  const OpcodeInfo* fallback = nullptr;
  for (const auto& entry : table_) {
    if (entry.mnemonic != mnemonic) continue;
    if (entry.flavor == Flavor::kCore || entry.flavor == preferred) {
      return &entry;
    }
    if (fallback == nullptr) fallback = &entry;
  }
  return fallback;
}

std::span<const OperandKind> signature(Opcode opcode) {
  return Registry::instance().info(opcode).signature;
}

Flavor flavor_of(Opcode opcode) {
  return Registry::instance().info(opcode).flavor;
}

std::string_view mnemonic(Opcode opcode) {
  return Registry::instance().info(opcode).mnemonic;
}

Opcode opcode_from_id(std::uint8_t id) {
  const OpcodeInfo* found = Registry::instance().find(id);
  if (found == nullptr) {
    throw Error(ErrorCode::kUnknownOpcode, "opcode id " + std::to_string(id));
  }
  return found->opcode;
}

double angle_value(AngleSpec spec) {
  if (spec.d > kMaxAngleExponent) {
    throw Error(ErrorCode::kAngleOverflow,
                "angle exponent " + std::to_string(spec.d) + " exceeds 30");
  }
  return static_cast<double>(spec.n) * std::numbers::pi /
         std::ldexp(1.0, static_cast<int>(spec.d));
}

bool same_angle(AngleSpec a, AngleSpec b) {
  // a.n / 2^a.d == b.n / 2^b.d, compared over a common denominator. Both
  // exponents are small enough (<= 30 after validation, 63 in the worst
  // case) to use 128-bit arithmetic.
  const std::uint32_t d = std::max(a.d, b.d);
  if (d > 90) return false;
  const __int128 lhs = static_cast<__int128>(a.n) << (d - a.d);
  const __int128 rhs = static_cast<__int128>(b.n) << (d - b.d);
  return lhs == rhs;
}

AngleSpec reduce(AngleSpec spec) {
  if (spec.n == 0) return {0, 0};
  while (spec.d > 0 && spec.n % 2 == 0) {
    spec.n /= 2;
    --spec.d;
  }
  return spec;
}

const OpcodeInfo& info(const Instruction& instr) {
  return Registry::instance().info(instr.opcode);
}

bool is_binary_ready(const Instruction& instr) {
  const auto& sig = info(instr).signature;
  if (sig.size() != instr.operands.size()) return false;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (!kind_accepts(sig[i], instr.operands[i], false)) return false;
  }
  return true;
}

Flavor subroutine_flavor(const Subroutine& sub) {
  Flavor found = Flavor::kCore;
  for (const auto& instr : sub.instructions) {
    const Flavor f = info(instr).flavor;
    if (f == Flavor::kCore) continue;
    if (found != Flavor::kCore && found != f) {
      throw Error(ErrorCode::kWrongFlavor,
                  "subroutine mixes vanilla and NV instructions");
    }
    found = f;
  }
  return found;
}

void check_subroutine(const Subroutine& sub, bool allow_text_form) {
  const auto count = static_cast<std::int64_t>(sub.instructions.size());
  for (std::int64_t i = 0; i < count; ++i) {
    const auto& instr = sub.instructions[static_cast<std::size_t>(i)];
    const auto& meta = info(instr);
    if (meta.signature.size() != instr.operands.size()) {
      throw Error(ErrorCode::kSignatureMismatch,
                  std::string(meta.mnemonic) + " expects " +
                      std::to_string(meta.signature.size()) + " operands",
                  i);
    }
    for (std::size_t k = 0; k < meta.signature.size(); ++k) {
      if (!kind_accepts(meta.signature[k], instr.operands[k],
                        allow_text_form)) {
        throw Error(ErrorCode::kSignatureMismatch,
                    std::string(meta.mnemonic) + " operand " +
                        std::to_string(k) + " must be " +
                        std::string(to_string(meta.signature[k])),
                    i);
      }
    }
    if (meta.branch_target >= 0) {
      const auto target = std::get<Immediate>(
          instr.operands[static_cast<std::size_t>(meta.branch_target)]);
      if (target.value < 0 || target.value > count) {
        throw Error(ErrorCode::kBranchOutOfRange,
                    "branch target " + std::to_string(target.value), i);
      }
    }
  }
  subroutine_flavor(sub);
}

std::vector<RegisterRef> registers_read(const Instruction& instr) {
  std::vector<RegisterRef> out;
  const auto& ops = instr.operands;
  auto reg_at = [&ops, &out](std::size_t i) {
    if (i < ops.size()) {
      if (const auto* r = std::get_if<RegisterRef>(&ops[i])) out.push_back(*r);
    }
  };
  auto index_regs = [&out](const Operand& op) {
    if (const auto* e = std::get_if<ArrayEntry>(&op)) add_index_reg(e->index, out);
    if (const auto* s = std::get_if<ArraySlice>(&op)) {
      add_index_reg(s->start, out);
      add_index_reg(s->stop, out);
    }
  };
  switch (instr.opcode) {
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kAddm:
    case Opcode::kSubm:
      for (std::size_t i = 1; i < ops.size(); ++i) reg_at(i);
      break;
    case Opcode::kSet:
    case Opcode::kLea:
    case Opcode::kArray:
    case Opcode::kRetArr:
    case Opcode::kPmrXyx:
    case Opcode::kPmrZxz:
    case Opcode::kPmrYzy:
      break;
    case Opcode::kLoad:
      for (const auto& op : ops) index_regs(op);
      break;
    case Opcode::kMeas:
      reg_at(0);
      break;
    default:
      for (std::size_t i = 0; i < ops.size(); ++i) {
        reg_at(i);
        index_regs(ops[i]);
      }
      break;
  }
  return out;
}

std::optional<RegisterRef> register_written(const Instruction& instr) {
  switch (instr.opcode) {
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kAddm:
    case Opcode::kSubm:
    case Opcode::kSet:
    case Opcode::kLoad:
    case Opcode::kLea:
      if (const auto* r = std::get_if<RegisterRef>(&instr.operands.at(0))) {
        return *r;
      }
      return std::nullopt;
    case Opcode::kMeas:
      if (const auto* r = std::get_if<RegisterRef>(&instr.operands.at(1))) {
        return *r;
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::string isa_table() {
  std::ostringstream out;
  out << "| mnemonic | id | flavor | group | signature |\n";
  out << "|---|---|---|---|---|\n";
  static constexpr const char* kGroups[] = {
      "classical", "branch",      "memory",       "allocate", "wait",
      "return",    "measurement", "entanglement", "gate"};
  for (const auto& entry : Registry::instance().all()) {
    char id[8];
    std::snprintf(id, sizeof(id), "0x%02X", static_cast<int>(entry.opcode));
    out << "| " << entry.mnemonic << " | " << id << " | "
        << to_string(entry.flavor) << " | "
        << kGroups[static_cast<int>(entry.group)] << " | ";
    for (std::size_t i = 0; i < entry.signature.size(); ++i) {
      if (i > 0) out << ", ";
      out << to_string(entry.signature[i]);
    }
    out << " |\n";
  }
  return out.str();
}

}  // namespace nqasm::isa
