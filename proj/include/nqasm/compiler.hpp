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

// Unit-module-aware passes: validation, vanilla -> NV lowering with qubit
// placement (moves between the communication qubit and storage qubits),
// measurement reordering, rotation peephole, and a unitary oracle.

#ifndef NQASM_COMPILER_HPP_
#define NQASM_COMPILER_HPP_

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "nqasm/diagnostic.hpp"
#include "nqasm/gates.hpp"
#include "nqasm/isa.hpp"
#include "nqasm/unit_module.hpp"

namespace nqasm::compiler {

struct GateCounts {
  int two_qubit_ops = 0;
  int moves = 0;
  double duration_ns = 0.0;
  friend bool operator==(const GateCounts&, const GateCounts&) = default;
};

// strict: vanilla qubit ids are taken as positions (NV-strict). Non-strict
// skips the placement checks for vanilla gates and meas, which the NV
// translation satisfies by inserting moves.
std::vector<Diagnostic> validate(const isa::Subroutine& sub, const UnitModule& um,
                                 bool strict = true);

// NV sequence for one vanilla gate whose qubit operands already name
// physical registers. comm_operand: which qubit operand sits on the
// communication qubit (0 or 1), -1 for single-qubit gates.
std::vector<isa::Instruction> nv_gate_sequence(const isa::Instruction& gate,
                                               int comm_operand = -1);

// Transfers a state between C and S; the destination must be freshly
// allocated. Includes the destination init, not qalloc/qfree.
std::vector<isa::Instruction> move_sequence(isa::RegisterRef comm,
                                            isa::RegisterRef storage,
                                            bool to_storage);

// Compiled NV code addresses unit-module position p through register
// Q(15 - p); the prologue sets them. C14/C15 are compiler scratch.
isa::RegisterRef position_register(int position);
inline constexpr int kMaxPositions = 8;

enum class Mode { kAdhoc, kOptimized };

struct CompileOptions {
  bool reorder = false;
  bool peephole = false;
  // Defer single-qubit rotations on a storage qubit until it next moves to
  // the communication qubit (or something else touches it).
  bool sink_rotations = false;

  static CompileOptions from_mode(Mode mode);
};

struct Placement {
  std::map<int, int> position;  // virtual id -> unit-module position
  std::vector<int> occupant;    // position -> virtual id or -1
  std::set<int> pending_epr;    // placed by an EPR request, not yet waited on

  explicit Placement(int size = 0) : occupant(static_cast<std::size_t>(size), -1) {}
};

struct CompileStats {
  int moves = 0;
};

// Placement persists across the subroutines of one application.
class NvSession {
 public:
  explicit NvSession(UnitModule um, CompileOptions options = {});

  // Input: core + vanilla and/or NV opcodes on virtual qubit ids.
  // Throws kUnsupportedProgram, kNoFreeStorage, kQubitNotAllocated,
  // kQubitOutOfRange.
  isa::Subroutine translate(const isa::Subroutine& sub, CompileStats* stats = nullptr);

  const UnitModule& unit_module() const { return um_; }
  const Placement& placement() const { return placement_; }
  std::optional<int> position(int virtual_id) const;

 private:
  UnitModule um_;
  CompileOptions options_;
  Placement placement_;
};

// Throws kWrongFlavor for non-vanilla input or a non-NV unit module.
isa::Subroutine translate_vanilla_to_nv(const isa::Subroutine& sub,
                                        const UnitModule& um, Mode mode,
                                        CompileStats* stats = nullptr);
isa::Subroutine translate_vanilla_to_nv(const isa::Subroutine& sub,
                                        const UnitModule& um,
                                        const CompileOptions& options,
                                        CompileStats* stats = nullptr);

// Placement only: lowering with neither reorder nor peephole.
isa::Subroutine insert_moves_nv(const isa::Subroutine& sub, const UnitModule& um,
                                CompileStats* stats = nullptr);

isa::Subroutine reorder_commuting_measurements(const isa::Subroutine& sub,
                                               const UnitModule& um);
isa::Subroutine reorder_commuting_measurements(const isa::Subroutine& sub,
                                               const UnitModule& um,
                                               const Placement& start);

isa::Subroutine peephole(const isa::Subroutine& sub);

// Qubit qubits[0] is the most significant. Throws kNotAGateBlock.
gates::Matrix block_unitary(const std::vector<isa::Instruction>& instructions,
                            const std::vector<isa::RegisterRef>& qubits);

// Throws kMissingDurationEntry, kWrongFlavor.
GateCounts gate_counts(const isa::Subroutine& sub, const UnitModule& um);

// Unitary of a single gate instruction, on its own qubit operands in order.
gates::Matrix gate_matrix(const isa::Instruction& gate);

}  // namespace nqasm::compiler

#endif  // NQASM_COMPILER_HPP_
