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

#include "nqasm/dataflow.hpp"

#include <deque>

namespace nqasm::dataflow {

using isa::Opcode;
using isa::Operand;
using isa::RegisterRef;

namespace {

std::size_t slot(RegisterRef r) {
  return static_cast<std::size_t>(r.name) * isa::kRegistersPerName + r.index;
}

Value meet(const Value& a, const Value& b) {
  return a == b ? a : Value::varying();
}

Value index_value(const State& s, const isa::IndexOperand& idx) {
  if (const auto* r = std::get_if<RegisterRef>(&idx)) return s.reg(*r);
  return Value::constant(std::get<isa::Immediate>(idx).value);
}

std::optional<std::int32_t> const_of(const Value& v) {
  if (v.kind == Value::Kind::kConst) return v.value;
  return std::nullopt;
}

std::int32_t wrap_add(std::int32_t a, std::int32_t b, bool subtract) {
  const auto ua = static_cast<std::uint32_t>(a);
  const auto ub = static_cast<std::uint32_t>(b);
  return static_cast<std::int32_t>(subtract ? ua - ub : ua + ub);
}

// Mirrors the QNPU: result in [0, m).
std::optional<std::int32_t> mod_op(std::int64_t a, std::int64_t b, std::int64_t m,
                                   bool subtract) {
  if (m <= 0) return std::nullopt;
  std::int64_t v = subtract ? a - b : a + b;
  v %= m;
  if (v < 0) v += m;
  return static_cast<std::int32_t>(v);
}

void transfer(const isa::Instruction& in, State& s) {
  const auto& ops = in.operands;
  auto reg0 = [&]() { return std::get<RegisterRef>(ops.at(0)); };
  switch (in.opcode) {
    case Opcode::kSet:
      if (const auto* r = std::get_if<RegisterRef>(&ops[0])) {
        s.set_reg(*r, operand_value(s, ops[1]));
      }
      break;
    case Opcode::kAdd:
    case Opcode::kSub: {
      const auto a = const_of(operand_value(s, ops[1]));
      const auto b = const_of(operand_value(s, ops[2]));
      s.set_reg(reg0(), a && b ? Value::constant(wrap_add(*a, *b, in.opcode == Opcode::kSub))
                               : Value::varying());
      break;
    }
    case Opcode::kAddm:
    case Opcode::kSubm: {
      const auto a = const_of(operand_value(s, ops[1]));
      const auto b = const_of(operand_value(s, ops[2]));
      const auto m = const_of(operand_value(s, ops[3]));
      std::optional<std::int32_t> v;
      if (a && b && m) v = mod_op(*a, *b, *m, in.opcode == Opcode::kSubm);
      s.set_reg(reg0(), v ? Value::constant(*v) : Value::varying());
      break;
    }
    case Opcode::kLoad: {
      const auto& e = std::get<isa::ArrayEntry>(ops[1]);
      const auto idx = const_of(index_value(s, e.index));
      Value v = idx ? s.entry(e.address.id, *idx) : Value::varying();
      // A null load fails at runtime; past it the register is unknown.
      if (v.kind == Value::Kind::kNull) v = Value::varying();
      s.set_reg(reg0(), v);
      break;
    }
    case Opcode::kStore:
    case Opcode::kUndef: {
      const auto& e = std::get<isa::ArrayEntry>(ops[in.opcode == Opcode::kStore ? 1 : 0]);
      const auto idx = const_of(index_value(s, e.index));
      const Value v = in.opcode == Opcode::kStore ? operand_value(s, ops[0]) : Value::null();
      if (idx) {
        s.entries[{e.address.id, *idx}] = v;
      } else {
        s.clobber(e.address.id);
      }
      break;
    }
    case Opcode::kLea:
      s.set_reg(reg0(), Value::constant(std::get<isa::Address>(ops[1]).id));
      break;
    case Opcode::kArray: {
      const auto addr = std::get<isa::Address>(ops[1]).id;
      std::erase_if(s.entries, [addr](const auto& kv) { return kv.first.first == addr; });
      s.clobbered.erase(addr);
      s.fresh[addr] = std::get<isa::Immediate>(ops[0]).value;
      break;
    }
    case Opcode::kMeas:
      if (const auto* r = std::get_if<RegisterRef>(&ops[1])) {
        s.set_reg(*r, Value::varying());
      }
      break;
    case Opcode::kCreateEpr:
    case Opcode::kRecvEpr: {
      // The netstack fills the entanglement-info array later.
      const auto& info_op = ops.back();
      const auto addr = const_of(operand_value(s, info_op));
      if (addr) {
        s.clobber(*addr);
      } else {
        s.all_clobbered = true;
        s.entries.clear();
        s.fresh.clear();
      }
      break;
    }
    default:
      if (const auto w = isa::register_written(in)) s.set_reg(*w, Value::varying());
      break;
  }
}

std::optional<std::size_t> branch_target(const isa::Instruction& in) {
  const auto& info = isa::info(in);
  if (info.branch_target < 0) return std::nullopt;
  const auto* imm = std::get_if<isa::Immediate>(&in.operands.at(info.branch_target));
  if (!imm || imm->value < 0) return std::nullopt;
  return static_cast<std::size_t>(imm->value);
}

}  // namespace

Value State::reg(RegisterRef r) const { return regs[slot(r)]; }

void State::set_reg(RegisterRef r, Value v) { regs[slot(r)] = v; }

Value State::entry(std::int32_t address, std::int32_t index) const {
  if (all_clobbered && !fresh.contains(address) && !entries.contains({address, index})) {
    return Value::varying();
  }
  if (clobbered.contains(address)) return Value::varying();
  const auto it = entries.find({address, index});
  if (it != entries.end()) return it->second;
  return fresh.contains(address) ? Value::null() : Value::varying();
}

std::optional<std::int32_t> State::length(std::int32_t address) const {
  const auto it = fresh.find(address);
  if (it == fresh.end()) return std::nullopt;
  return it->second;
}

void State::clobber(std::int32_t address) {
  std::erase_if(entries, [address](const auto& kv) { return kv.first.first == address; });
  clobbered.insert(address);
}

State join(const State& a, const State& b) {
  State out;
  for (std::size_t i = 0; i < out.regs.size(); ++i) out.regs[i] = meet(a.regs[i], b.regs[i]);
  out.all_clobbered = a.all_clobbered || b.all_clobbered;
  out.clobbered = a.clobbered;
  out.clobbered.insert(b.clobbered.begin(), b.clobbered.end());
  for (const auto& [addr, len] : a.fresh) {
    const auto it = b.fresh.find(addr);
    if (it != b.fresh.end() && it->second == len) out.fresh[addr] = len;
  }
  // Keep an entry only when both sides agree on it.
  std::set<std::pair<std::int32_t, std::int32_t>> keys;
  for (const auto& kv : a.entries) keys.insert(kv.first);
  for (const auto& kv : b.entries) keys.insert(kv.first);
  for (const auto& k : keys) {
    const Value va = a.entry(k.first, k.second);
    const Value vb = b.entry(k.first, k.second);
    if (va == vb && va.kind != Value::Kind::kVarying) out.entries[k] = va;
  }
  return out;
}

std::optional<std::int32_t> Analysis::constant(std::size_t i, RegisterRef r) const {
  if (i >= state_before.size() || !state_before[i]) return std::nullopt;
  return const_of(state_before[i]->reg(r));
}

Value operand_value(const State& state, const Operand& op) {
  if (const auto* r = std::get_if<RegisterRef>(&op)) return state.reg(*r);
  if (const auto* imm = std::get_if<isa::Immediate>(&op)) return Value::constant(imm->value);
  if (const auto* a = std::get_if<isa::Address>(&op)) return Value::constant(a->id);
  return Value::varying();
}

Analysis analyze(const isa::Subroutine& sub) {
  const auto& code = sub.instructions;
  Analysis out;
  out.state_before.resize(code.size() + 1);
  if (code.empty()) {
    out.state_before[0] = State{};
    return out;
  }
  out.state_before[0] = State{};
  std::deque<std::size_t> work{0};
  std::vector<bool> queued(code.size() + 1, false);
  queued[0] = true;
  auto flow = [&](std::size_t to, const State& s) {
    if (to > code.size()) return;
    auto& slot = out.state_before[to];
    State next = slot ? join(*slot, s) : s;
    if (!slot || !(next == *slot)) {
      slot = std::move(next);
      if (to < code.size() && !queued[to]) {
        queued[to] = true;
        work.push_back(to);
      }
    }
  };
  while (!work.empty()) {
    const std::size_t i = work.front();
    work.pop_front();
    queued[i] = false;
    State s = *out.state_before[i];
    transfer(code[i], s);
    const auto target = branch_target(code[i]);
    if (target) flow(*target, s);
    if (code[i].opcode != Opcode::kJmp) flow(i + 1, s);
  }
  return out;
}

}  // namespace nqasm::dataflow
