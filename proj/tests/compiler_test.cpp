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

#include "nqasm/compiler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "exact_sim.hpp"
#include "nqasm/assembler.hpp"
#include "nqasm/error.hpp"
#include "nqasm/gates.hpp"
#include "nqasm/params.hpp"

namespace nqasm::compiler {
namespace {

using isa::Immediate;
using isa::Instruction;
using isa::Opcode;
using isa::RegisterRef;
using Matrix = gates::Matrix;
using C = std::complex<double>;

const RegisterRef Q0 = isa::make_register('Q', 0);
const RegisterRef Q1 = isa::make_register('Q', 1);

isa::Subroutine asm_vanilla(const std::string& body) {
  return assembler::assemble("# NETQASM 1.0\n# APPID 0\n" + body);
}

Instruction rotation(Opcode op, RegisterRef q, int n, int d) {
  return {op, {q, Immediate{n}, Immediate{d}}};
}

double angle(int n, int d) { return n * std::numbers::pi / std::ldexp(1.0, d); }

TEST(GateSequenceTest, SingleQubitGatesMatchUpToPhase) {
  const std::vector<Instruction> gates_in = {
      {Opcode::kX, {Q0}},
      {Opcode::kY, {Q0}},
      {Opcode::kZ, {Q0}},
      {Opcode::kH, {Q0}},
      {Opcode::kS, {Q0}},
      {Opcode::kK, {Q0}},
      {Opcode::kT, {Q0}},
      rotation(Opcode::kRotX, Q0, 3, 2),
      rotation(Opcode::kRotY, Q0, -5, 3),
      rotation(Opcode::kRotZ, Q0, 7, 4),
  };
  for (const auto& g : gates_in) {
    const auto seq = nv_gate_sequence(g);
    for (const auto& x : seq) EXPECT_EQ(isa::flavor_of(x.opcode), isa::Flavor::kNv);
    EXPECT_LT(gates::phase_distance(block_unitary(seq, {Q0}), block_unitary({g}, {Q0})),
              1e-9)
        << isa::mnemonic(g.opcode);
  }
}

TEST(GateSequenceTest, HadamardMapping) {
  const auto seq = nv_gate_sequence({Opcode::kH, {Q0}});
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0], rotation(Opcode::kNvRotY, Q0, 1, 1));
  EXPECT_EQ(seq[1], rotation(Opcode::kNvRotX, Q0, 1, 0));
}

TEST(GateSequenceTest, TwoQubitGatesMatchUpToPhase) {
  // Independent reference: CNOT / CZ written out in the computational basis.
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
  Matrix cz = Matrix::Identity(4, 4);
  cz(3, 3) = -1;
  for (const int comm : {0, 1}) {
    const auto seq_x = nv_gate_sequence({Opcode::kCnot, {Q0, Q1}}, comm);
    EXPECT_LT(gates::phase_distance(block_unitary(seq_x, {Q0, Q1}), cnot), 1e-9) << comm;
    const auto seq_z = nv_gate_sequence({Opcode::kCphase, {Q0, Q1}}, comm);
    EXPECT_LT(gates::phase_distance(block_unitary(seq_z, {Q0, Q1}), cz), 1e-9) << comm;
  }
  EXPECT_EQ(nv_gate_sequence({Opcode::kCnot, {Q0, Q1}}, 0).size(), 3u);
  EXPECT_EQ(nv_gate_sequence({Opcode::kCnot, {Q0, Q1}}, 1).size(), 9u);
}

TEST(GateSequenceTest, CphaseMappingShape) {
  const auto seq = nv_gate_sequence({Opcode::kCphase, {Q0, Q1}}, 0);
  ASSERT_EQ(seq.size(), 5u);
  EXPECT_EQ(seq.back(), rotation(Opcode::kNvRotY, Q1, -1, 1));
}

TEST(GateSequenceTest, PublishedStorageControlledCnotIsNotCnot) {
  // C = Q0, S = Q1; logical control is S.
  const RegisterRef c = Q0, s = Q1;
  const Instruction cx{Opcode::kCxDir, {c, s, Immediate{1}, Immediate{1}}};
  const std::vector<Instruction> published = {
      rotation(Opcode::kNvRotY, c, 1, 1), rotation(Opcode::kNvRotX, c, 1, 0),
      rotation(Opcode::kNvRotY, s, 1, 1), cx,
      rotation(Opcode::kNvRotZ, c, -1, 1), rotation(Opcode::kNvRotX, s, -1, 1),
      rotation(Opcode::kNvRotY, s, 1, 1), rotation(Opcode::kNvRotY, c, 1, 1),
      rotation(Opcode::kNvRotX, c, 1, 0)};
  Matrix cnot_sc = Matrix::Zero(4, 4);  // control = second qubit
  cnot_sc(0, 0) = cnot_sc(3, 1) = cnot_sc(2, 2) = cnot_sc(1, 3) = 1;
  EXPECT_GT(gates::phase_distance(block_unitary(published, {c, s}), cnot_sc), 0.1);
}

TEST(BlockUnitaryTest, Examples) {
  const double r = 1 / std::sqrt(2.0);
  Matrix h(2, 2);
  h << r, r, r, -r;
  EXPECT_LT((block_unitary({{Opcode::kH, {Q0}}}, {Q0}) - h).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((block_unitary({}, {Q0, Q1}) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(),
            1e-12);
  // diag(Rx(pi/2), Rx(-pi/2))
  const double c = std::cos(std::numbers::pi / 4), s = std::sin(std::numbers::pi / 4);
  Matrix ec = Matrix::Zero(4, 4);
  ec(0, 0) = ec(1, 1) = c;
  ec(0, 1) = ec(1, 0) = C(0, -s);
  ec(2, 2) = ec(3, 3) = c;
  ec(2, 3) = ec(3, 2) = C(0, s);
  const Instruction cx{Opcode::kCxDir, {Q0, Q1, Immediate{1}, Immediate{1}}};
  EXPECT_LT((block_unitary({cx}, {Q0, Q1}) - ec).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BlockUnitaryTest, RejectsNonGates) {
  try {
    block_unitary({{Opcode::kMeas, {Q0, isa::make_register('M', 0)}}}, {Q0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAGateBlock);
  }
  EXPECT_THROW(block_unitary({{Opcode::kInit, {Q0}}}, {Q0}), Error);
  EXPECT_THROW(block_unitary({{Opcode::kH, {Q1}}}, {Q0}), Error);
}

Eigen::VectorXcd pauli_state(int k) {
  const double r = 1 / std::sqrt(2.0);
  Eigen::VectorXcd v(2);
  switch (k) {
    case 0: v << 1, 0; break;
    case 1: v << 0, 1; break;
    case 2: v << r, r; break;
    case 3: v << r, -r; break;
    case 4: v << r, C(0, r); break;
    default: v << r, C(0, -r); break;
  }
  return v;
}

// <psi| Tr_other(|phi><phi|) |psi> for the qubit at `keep` (0 = MSB).
double reduced_fidelity(const Eigen::VectorXcd& phi, int keep, const Eigen::VectorXcd& psi) {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const int other_i = keep == 0 ? (i & 1) : (i >> 1);
      const int other_j = keep == 0 ? (j & 1) : (j >> 1);
      if (other_i != other_j) continue;
      const int a = keep == 0 ? (i >> 1) : (i & 1);
      const int b = keep == 0 ? (j >> 1) : (j & 1);
      rho(a, b) += phi(i) * std::conj(phi(j));
    }
  }
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

TEST(MoveTest, TransfersAllPauliStatesBothWays) {
  for (const bool to_storage : {true, false}) {
    auto seq = move_sequence(Q0, Q1, to_storage);
    ASSERT_EQ(seq.front().opcode, Opcode::kNvInit);
    EXPECT_EQ(std::get<RegisterRef>(seq.front().operands[0]), to_storage ? Q1 : Q0);
    seq.erase(seq.begin());  // destination starts in |0>
    const Matrix u = block_unitary(seq, {Q0, Q1});
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXcd psi = pauli_state(k);
      Eigen::VectorXcd zero(2);
      zero << 1, 0;
      const Eigen::VectorXcd in = to_storage ? Eigen::VectorXcd(gates::kron(psi, zero))
                                             : Eigen::VectorXcd(gates::kron(zero, psi));
      const Eigen::VectorXcd out = u * in;
      EXPECT_GT(reduced_fidelity(out, to_storage ? 1 : 0, psi), 1 - 1e-9) << k;
      // source ends in |0>
      EXPECT_GT(reduced_fidelity(out, to_storage ? 0 : 1, zero), 1 - 1e-9) << k;
    }
  }
}

const char* kTeleportSender = R"(# DEFINE q_arr @0
# DEFINE args @1
# DEFINE ent @2
array 1 $q_arr
array 20 $args
array 10 $ent
store 1 $q_arr[0]
set Q0 0
qalloc Q0
init Q0
h Q0
create_epr 1 0 $q_arr $args $ent
wait_all $ent[0:10]
set Q1 1
cnot Q0 Q1
h Q0
meas Q0 M0
qfree Q0
meas Q1 M1
qfree Q1
ret_reg M0
ret_reg M1
)";

int positions_used(const isa::Subroutine& sub) {
  std::set<RegisterRef> regs;
  for (const auto& in : sub.instructions) {
    if (in.opcode == Opcode::kQalloc) regs.insert(std::get<RegisterRef>(in.operands[0]));
  }
  return static_cast<int>(regs.size());
}

std::size_t index_of_meas(const isa::Subroutine& sub, RegisterRef out) {
  for (std::size_t i = 0; i < sub.instructions.size(); ++i) {
    const auto& in = sub.instructions[i];
    if (in.opcode == Opcode::kMeas && std::get<RegisterRef>(in.operands[1]) == out) return i;
  }
  return sub.instructions.size();
}

TEST(TeleportSenderTest, MoveCountsAndDuration) {
  const auto um = UnitModule::nv(3, nv_noise({500000.0, 0.99}));
  const auto src = asm_vanilla(kTeleportSender);
  CompileStats num_stats, um_stats;
  const auto num = translate_vanilla_to_nv(src, um, CompileOptions{}, &num_stats);
  const auto umo = translate_vanilla_to_nv(src, um, CompileOptions{true, false, false}, &um_stats);
  EXPECT_EQ(num_stats.moves, 4);
  EXPECT_EQ(um_stats.moves, 2);
  EXPECT_EQ(positions_used(num), 3);
  EXPECT_EQ(positions_used(umo), 2);

  const auto c_num = gate_counts(num, um);
  const auto c_um = gate_counts(umo, um);
  EXPECT_EQ(c_num.moves, 4);
  EXPECT_EQ(c_um.moves, 2);
  // Two moves' worth of cx_dir each.
  EXPECT_EQ(c_num.two_qubit_ops - c_um.two_qubit_ops, 4);

  // Independent arithmetic over the table: a move is its init, three
  // electron rotations, one carbon z rotation and two controlled rotations.
  const auto& g = um.noise.gates;
  const double shared = 3 * g.at("electron_rot").duration_ns + g.at("carbon_z_rot").duration_ns +
                        2 * g.at("ec_controlled_dir_xy").duration_ns;
  const double to_storage = g.at("carbon_init").duration_ns + shared;
  const double to_comm = g.at("electron_init").duration_ns + shared;
  EXPECT_EQ(c_num.duration_ns - c_um.duration_ns, to_storage + to_comm);
}

TEST(TeleportSenderTest, ReorderHoistsEprMeasurement) {
  const auto um = UnitModule::nv(3);
  const auto src = asm_vanilla(kTeleportSender);
  const auto re = reorder_commuting_measurements(src, um);
  const auto m0 = isa::make_register('M', 0), m1 = isa::make_register('M', 1);
  EXPECT_LT(index_of_meas(re, m1), index_of_meas(re, m0));
  EXPECT_GT(index_of_meas(src, m1), index_of_meas(src, m0));
  EXPECT_EQ(re.instructions.size(), src.instructions.size());
  // Same multiset of instructions, outcome registers untouched.
  auto sorted = [](isa::Subroutine s) {
    std::vector<std::string> lines;
    for (auto& x : s.instructions) lines.push_back(assembler::print({{}, 0, {x}}));
    std::sort(lines.begin(), lines.end());
    return lines;
  };
  EXPECT_EQ(sorted(re), sorted(src));
  // idempotent
  EXPECT_EQ(reorder_commuting_measurements(re, um), re);
}

TEST(ReorderTest, DataDependenceBlocksReorder) {
  const auto um = UnitModule::nv(3);
  // The first outcome decides a branch before the second measurement.
  const auto src = asm_vanilla(R"(set Q0 0
qalloc Q0
set Q1 1
qalloc Q1
h Q1
meas Q1 M0
bez M0 SKIP
x Q0
SKIP:
meas Q0 M1
)");
  // Q1 lives in storage, Q0 on comm; the branch on M0 sits between them.
  EXPECT_EQ(reorder_commuting_measurements(src, um), src);
}

TEST(PlacementTest, CommOnlyProgramNeedsNoMoves) {
  const auto um = UnitModule::nv(3);
  const auto src = asm_vanilla("set Q0 0\nqalloc Q0\ninit Q0\nh Q0\nmeas Q0 M0\nqfree Q0\n");
  CompileStats stats;
  const auto out = insert_moves_nv(src, um, &stats);
  EXPECT_EQ(stats.moves, 0);
  EXPECT_EQ(gate_counts(out, um).moves, 0);
}

TEST(PlacementTest, NoFreeStorage) {
  const auto um = UnitModule::nv(2);
  const auto src = asm_vanilla(
      "set Q0 0\nqalloc Q0\nset Q1 1\nqalloc Q1\nset Q2 2\nqalloc Q2\n");
  try {
    insert_moves_nv(src, UnitModule::nv(3), nullptr);
  } catch (...) {
    FAIL() << "three qubits fit";
  }
  try {
    insert_moves_nv(src, um, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQubitOutOfRange);
  }
  const auto full = asm_vanilla(
      "set Q0 0\nqalloc Q0\nset Q1 1\nqalloc Q1\nmeas Q1 M0\n");
  try {
    insert_moves_nv(full, um, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoFreeStorage);
  }
}

TEST(PlacementTest, LoopsOnCommQubitCompile) {
  const auto um = UnitModule::nv(2);
  const auto src = asm_vanilla(R"(# DEFINE ms @0
# DEFINE i R0
array 10 $ms
set $i 0
LOOP:
beq $i 10 EXIT
set Q0 0
qalloc Q0
init Q0
h Q0
meas Q0 M0
store M0 $ms[$i]
qfree Q0
add $i $i 1
jmp LOOP
EXIT:
ret_arr $ms
)");
  const auto out = translate_vanilla_to_nv(src, um, Mode::kOptimized);
  EXPECT_NO_THROW(isa::check_subroutine(out));
  EXPECT_EQ(isa::subroutine_flavor(out), isa::Flavor::kNv);
  // Branch targets still land on the loop head / exit.
  for (const auto& in : out.instructions) {
    if (in.opcode == Opcode::kJmp) {
      const auto t = std::get<Immediate>(in.operands[0]).value;
      EXPECT_EQ(out.instructions.at(static_cast<std::size_t>(t)).opcode, Opcode::kSet);
    }
  }
}

TEST(TranslateTest, RejectsNvInput) {
  const auto um = UnitModule::nv(2);
  const auto nv = assembler::assemble("# NETQASM 1.0\n# APPID 0\n# FLAVOR nv\nset Q0 0\nqalloc Q0\nrot_x Q0 1 1\n");
  EXPECT_THROW(translate_vanilla_to_nv(nv, um, Mode::kAdhoc), Error);
  const auto van = asm_vanilla("set Q0 0\nqalloc Q0\nh Q0\n");
  EXPECT_THROW(translate_vanilla_to_nv(van, UnitModule::generic(2), Mode::kAdhoc), Error);
}

TEST(PeepholeTest, Examples) {
  const auto merged = peephole({{}, 0, {rotation(Opcode::kRotX, Q0, 1, 1),
                                        rotation(Opcode::kRotX, Q0, 1, 1)}});
  ASSERT_EQ(merged.instructions.size(), 1u);
  EXPECT_EQ(merged.instructions[0], rotation(Opcode::kRotX, Q0, 1, 0));
  const auto gone = peephole({{}, 0, {rotation(Opcode::kRotZ, Q0, 1, 1),
                                      rotation(Opcode::kRotZ, Q0, -1, 1)}});
  EXPECT_TRUE(gone.instructions.empty());
  const auto zero = peephole({{}, 0, {rotation(Opcode::kNvRotY, Q0, 4, 1)}});
  EXPECT_TRUE(zero.instructions.empty());
  // Different axes or an intervening gate on the qubit block merging.
  const std::vector<Instruction> blocked = {rotation(Opcode::kRotX, Q0, 1, 1),
                                            {Opcode::kH, {Q0}},
                                            rotation(Opcode::kRotX, Q0, 1, 1)};
  EXPECT_EQ(peephole({{}, 0, blocked}).instructions, blocked);
  // Gates on other qubits are transparent.
  const auto across = peephole({{}, 0, {rotation(Opcode::kRotX, Q0, 1, 2),
                                        {Opcode::kH, {Q1}},
                                        rotation(Opcode::kRotX, Q0, 1, 2)}});
  EXPECT_EQ(across.instructions.size(), 2u);
}

TEST(PeepholeTest, KeepsBranchTargetsValid) {
  const auto src = asm_vanilla(R"(set Q0 0
rot_z Q0 1 2
rot_z Q0 1 2
jmp END
rot_x Q0 1 1
END:
rot_x Q0 1 1
)");
  const auto out = peephole(src);
  EXPECT_NO_THROW(isa::check_subroutine(out));
  const auto& jmp = out.instructions.at(2);
  ASSERT_EQ(jmp.opcode, Opcode::kJmp);
  // The target instruction itself must not be merged away.
  EXPECT_EQ(out.instructions.at(static_cast<std::size_t>(std::get<Immediate>(jmp.operands[0]).value)),
            rotation(Opcode::kRotX, Q0, 1, 1));
}

Opcode random_rotation(std::mt19937_64& rng, bool nv) {
  static constexpr Opcode kVan[] = {Opcode::kRotX, Opcode::kRotY, Opcode::kRotZ};
  static constexpr Opcode kNv[] = {Opcode::kNvRotX, Opcode::kNvRotY, Opcode::kNvRotZ};
  return (nv ? kNv : kVan)[rng() % 3];
}

TEST(PeepholeTest, RandomBlocksPreserveUnitaryAndAreIdempotent) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    isa::Subroutine sub;
    const int len = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < len; ++k) {
      const int d = static_cast<int>(rng() % 4);
      const int n = static_cast<int>(rng() % 17) - 8;
      // Few axes so that merges actually happen.
      const Opcode op = rng() % 3 == 0 ? Opcode::kNvRotX : random_rotation(rng, true);
      sub.instructions.push_back(rotation(op, Q0, n, d));
    }
    const auto once = peephole(sub);
    EXPECT_LE(once.instructions.size(), sub.instructions.size());
    EXPECT_EQ(peephole(once), once);
    EXPECT_LT(gates::phase_distance(block_unitary(once.instructions, {Q0}),
                                    block_unitary(sub.instructions, {Q0})),
              1e-9)
        << trial;
  }
}

TEST(ValidateTest, Examples) {
  const auto nv = UnitModule::nv(3);
  const auto two_storage = asm_vanilla("set Q0 1\nset Q1 2\ncnot Q0 Q1\n");
  auto d = validate(two_storage, nv);
  ASSERT_TRUE(has_errors(d));
  EXPECT_EQ(d.back().code, "GateNotSupportedOnPair");
  EXPECT_EQ(d.back().instruction, 2);

  d = validate(asm_vanilla("set Q0 1\nqalloc Q0\nmeas Q0 M0\n"), nv);
  ASSERT_TRUE(has_errors(d));
  EXPECT_EQ(d.back().code, "MeasureRequiresCommQubit");
  // Non-strict leaves placement to the translator.
  EXPECT_FALSE(has_errors(validate(asm_vanilla("set Q0 1\nqalloc Q0\nmeas Q0 M0\n"), nv, false)));
  EXPECT_FALSE(has_errors(validate(two_storage, nv, false)));

  d = validate(asm_vanilla("set Q0 5\nqalloc Q0\n"), nv);
  ASSERT_TRUE(has_errors(d));
  EXPECT_EQ(d.back().code, "QubitOutOfRange");

  d = validate(asm_vanilla("set R0 0\nstore R0 @3[R0]\narray 2 @3\n"), nv);
  ASSERT_TRUE(has_errors(d));
  EXPECT_EQ(d.back().code, "ArrayBeforeDeclaration");

  isa::Subroutine bad_branch{{}, 0, {{Opcode::kJmp, {Immediate{9}}}}};
  d = validate(bad_branch, nv);
  ASSERT_TRUE(has_errors(d));
  EXPECT_EQ(d.back().code, "BranchOutOfRange");

  d = validate(asm_vanilla("set Q15 0\nqalloc Q15\n"), nv);
  EXPECT_FALSE(has_errors(d));
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d.back().code, "ReservedRegister");

  // The running example of the instruction-set chapter on a generic module.
  const auto example = asm_vanilla(R"(set Q0 0
set Q1 1
qalloc Q0
qalloc Q1
init Q0
init Q1
h Q0
cnot Q0 Q1
meas Q0 M0
meas Q1 M1
ret_reg M0
ret_reg M1
)");
  EXPECT_TRUE(validate(example, UnitModule::generic(2)).empty());
}

TEST(GateCountsTest, EmptyIsZero) {
  EXPECT_EQ(gate_counts({}, UnitModule::nv(3)), GateCounts{});
  EXPECT_EQ(gate_counts({}, UnitModule::generic(2)), GateCounts{});
}

TEST(GateCountsTest, MissingEntry) {
  auto um = UnitModule::nv(2);
  um.noise.gates.erase("electron_rot");
  const auto sub = translate_vanilla_to_nv(asm_vanilla("set Q0 0\nqalloc Q0\nh Q0\n"), um,
                                           Mode::kAdhoc);
  try {
    gate_counts(sub, um);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingDurationEntry);
  }
}

// Random 3-qubit vanilla programs: allocate, gates, then measure and free.
isa::Subroutine random_program(std::mt19937_64& rng, bool commuting_tail) {
  isa::Subroutine sub;
  auto& code = sub.instructions;
  auto q = [](int i) { return isa::make_register('Q', i); };
  for (int i = 0; i < 3; ++i) {
    code.push_back({Opcode::kSet, {q(i), Immediate{i}}});
    code.push_back({Opcode::kQalloc, {q(i)}});
    code.push_back({Opcode::kInit, {q(i)}});
  }
  static constexpr Opcode kSingle[] = {Opcode::kX, Opcode::kY, Opcode::kZ, Opcode::kH,
                                       Opcode::kS, Opcode::kK, Opcode::kT};
  const int len = 4 + static_cast<int>(rng() % 10);
  for (int k = 0; k < len; ++k) {
    const int a = static_cast<int>(rng() % 3);
    const auto pick = rng() % 10;
    if (pick < 3) {
      const int b = (a + 1 + static_cast<int>(rng() % 2)) % 3;
      code.push_back({rng() % 2 ? Opcode::kCnot : Opcode::kCphase, {q(a), q(b)}});
    } else if (pick < 5) {
      code.push_back(rotation(random_rotation(rng, false), q(a),
                              static_cast<int>(rng() % 9) - 4, static_cast<int>(rng() % 3)));
    } else {
      code.push_back({kSingle[rng() % 7], {q(a)}});
    }
  }
  // Tail: per qubit some single-qubit gates then meas + qfree, in an order
  // that interleaves qubits.
  std::vector<int> order = {0, 1, 2};
  std::shuffle(order.begin(), order.end(), rng);
  for (const int i : order) {
    const int g = commuting_tail ? static_cast<int>(rng() % 3) : 0;
    for (int k = 0; k < g; ++k) code.push_back({kSingle[rng() % 7], {q(i)}});
    code.push_back({Opcode::kMeas, {q(i), isa::make_register('M', i)}});
    code.push_back({Opcode::kQfree, {q(i)}});
  }
  return sub;
}

TEST(EquivalenceTest, TranslationPreservesOutcomeDistribution) {
  const auto um = UnitModule::nv(4);
  const std::vector<RegisterRef> outs = {isa::make_register('M', 0), isa::make_register('M', 1),
                                         isa::make_register('M', 2)};
  const testing::ExactSim sim(4);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto src = random_program(rng, trial % 2 == 0);
    const auto ref = sim.run(src, outs);
    for (const auto mode : {Mode::kAdhoc, Mode::kOptimized}) {
      const auto out = translate_vanilla_to_nv(src, um, mode);
      EXPECT_LT(testing::total_variation(sim.run(out, outs), ref), 1e-9)
          << trial << " " << (mode == Mode::kAdhoc ? "adhoc" : "optimized") << "\n"
          << assembler::print(out);
    }
  }
}

TEST(EquivalenceTest, ReorderPreservesOutcomeDistribution) {
  const auto um = UnitModule::nv(4);
  const std::vector<RegisterRef> outs = {isa::make_register('M', 0), isa::make_register('M', 1),
                                         isa::make_register('M', 2)};
  const testing::ExactSim sim(4);
  std::mt19937_64 rng(5);
  int changed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto src = random_program(rng, true);
    const auto re = reorder_commuting_measurements(src, um);
    if (!(re == src)) ++changed;
    EXPECT_LT(testing::total_variation(sim.run(re, outs), sim.run(src, outs)), 1e-9) << trial;
  }
  EXPECT_GT(changed, 0);
}

TEST(SessionTest, PlacementPersistsAcrossSubroutines) {
  NvSession session(UnitModule::nv(3), CompileOptions::from_mode(Mode::kOptimized));
  session.translate(asm_vanilla("set Q0 0\nqalloc Q0\nset Q1 1\nqalloc Q1\n"));
  EXPECT_EQ(session.position(0), 0);
  EXPECT_EQ(session.position(1), 1);
  CompileStats stats;
  session.translate(asm_vanilla("set Q1 1\nmeas Q1 M0\n"), &stats);
  EXPECT_EQ(stats.moves, 2);
  EXPECT_EQ(session.position(1), 0);
  EXPECT_EQ(session.position(0), 2);
}

TEST(SessionTest, SinkingMovesStorageRotationsOntoComm) {
  const auto um = UnitModule::nv(3, nv_noise({500000.0, 0.98}));
  const auto src = asm_vanilla(
      "set Q0 0\nqalloc Q0\nset Q1 1\nqalloc Q1\nh Q1\nrot_z Q1 1 2\nmeas Q1 M0\n");
  const auto adhoc = translate_vanilla_to_nv(src, um, Mode::kAdhoc);
  const auto opt = translate_vanilla_to_nv(src, um, Mode::kOptimized);
  auto carbon_xy = [](const isa::Subroutine& s) {
    int n = 0;
    for (const auto& in : s.instructions) {
      if ((in.opcode == Opcode::kNvRotX || in.opcode == Opcode::kNvRotY) &&
          std::get<RegisterRef>(in.operands[0]) != position_register(0)) {
        ++n;
      }
    }
    return n;
  };
  EXPECT_EQ(carbon_xy(adhoc), 2);
  EXPECT_EQ(carbon_xy(opt), 0);
  EXPECT_LT(gate_counts(opt, um).duration_ns, gate_counts(adhoc, um).duration_ns);
  const testing::ExactSim sim(3);
  const std::vector<RegisterRef> outs = {isa::make_register('M', 0)};
  EXPECT_LT(testing::total_variation(sim.run(opt, outs), sim.run(src, outs)), 1e-9);
}

}  // namespace
}  // namespace nqasm::compiler
