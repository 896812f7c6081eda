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

// Flow-sensitive constant propagation over one subroutine. Registers and
// array entries start unknown (they may carry values from earlier
// subroutines); the analysis only learns from what the subroutine itself
// writes.

#ifndef NQASM_DATAFLOW_HPP_
#define NQASM_DATAFLOW_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "nqasm/isa.hpp"

namespace nqasm::dataflow {

struct Value {
  enum class Kind : std::uint8_t { kConst, kNull, kVarying };
  Kind kind = Kind::kVarying;
  std::int32_t value = 0;

  static Value constant(std::int32_t v) { return {Kind::kConst, v}; }
  static Value null() { return {Kind::kNull, 0}; }
  static Value varying() { return {}; }

  friend bool operator==(const Value&, const Value&) = default;
};

struct State {
  std::array<Value, isa::kRegisterNames * isa::kRegistersPerName> regs{};
  // Entries written with a known index.
  std::map<std::pair<std::int32_t, std::int32_t>, Value> entries;
  // Arrays declared in this subroutine and not clobbered: absent entries are
  // null. Value is the length.
  std::map<std::int32_t, std::int32_t> fresh;
  // Arrays written at an unknown index.
  std::set<std::int32_t> clobbered;
  // Something wrote an array at an unknown address.
  bool all_clobbered = false;

  Value reg(isa::RegisterRef r) const;
  void set_reg(isa::RegisterRef r, Value v);
  Value entry(std::int32_t address, std::int32_t index) const;
  std::optional<std::int32_t> length(std::int32_t address) const;
  void clobber(std::int32_t address);

  friend bool operator==(const State&, const State&) = default;
};

State join(const State& a, const State& b);

// state_before[i] is empty when instruction i is unreachable.
struct Analysis {
  std::vector<std::optional<State>> state_before;

  std::optional<std::int32_t> constant(std::size_t i, isa::RegisterRef r) const;
};

// Works on binary-ready subroutines and on text-form operands (immediates
// standing in for registers count as constants).
Analysis analyze(const isa::Subroutine& sub);

// Value of a register-or-immediate operand under `state`.
Value operand_value(const State& state, const isa::Operand& op);

}  // namespace nqasm::dataflow

#endif  // NQASM_DATAFLOW_HPP_
