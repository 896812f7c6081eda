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


#include "nqasm/qnpu.hpp"

#include <gtest/gtest.h>

#include "nqasm/assembler.hpp"
#include "test_util.hpp"

namespace nqasm::qnpu {
namespace {

using isa::make_register;
using testing::expect_error;
using testing::read_source_file;

isa::Subroutine listing(const std::string& name) {
  return assembler::assemble(read_source_file("apps/listings/" + name));
}

isa::Subroutine body(const std::string& text, const std::string& flavor = "") {
  std::string src = "# NETQASM 1.0\n# APPID 0\n";
  if (!flavor.empty()) src += "# FLAVOR " + flavor + "\n";
  return assembler::assemble(src + text);
}

std::vector<NodeConfig> two_nodes(Profile profile = Profile::kGeneric, int qubits = 3) {
  auto hw = profile == Profile::kNv ? UnitModule::nv(qubits, nv_noiseless())
                                    : UnitModule::generic(qubits);
  return {{0, "alice", hw}, {1, "bob", hw}};
}

std::vector<LinkConfig> one_link(double fidelity = 1.0) { return {{0, 1, fidelity, 1e5}}; }

// Runs a single subroutine on a fresh one-node network.
std::int32_t run_single(const isa::Subroutine& sub, std::uint64_t seed,
                        Profile profile = Profile::kGeneric) {
  Network net(two_nodes(profile), {}, seed);
  auto& n = net.node(0);
  const int app = n.register_app({2, {}});
  n.submit(app, sub, 1);
  net.scheduler().run();
  return *n.view(app).reg(make_register('M', 0));
}

TEST(ExecuteTest, HadamardExampleIsFair) {
  const auto sub = listing("hadamard.nqasm");
  int zeros = 0;
  constexpr int kShots = 10000;
  for (int s = 0; s < kShots; ++s) zeros += run_single(sub, static_cast<std::uint64_t>(s)) == 0;
  EXPECT_NEAR(zeros / double(kShots), 0.5, 0.02);
}

TEST(ExecuteTest, HadamardOnNvHardwareIsTranslated) {
  const auto sub = listing("hadamard.nqasm");
  int zeros = 0;
  for (int s = 0; s < 2000; ++s) {
    zeros += run_single(sub, static_cast<std::uint64_t>(s), Profile::kNv) == 0;
  }
  EXPECT_NEAR(zeros / 2000.0, 0.5, 0.04);
}

TEST(ExecuteTest, IfStatementLeavesZero) {
  const auto sub = listing("if_statement.nqasm");
  std::set<int> outcomes;
  for (std::uint64_t s = 0; s < 40; ++s) {
    Network net(two_nodes(), {}, s);
    auto& n = net.node(0);
    const int app = n.register_app({1, {}});
    n.submit(app, sub, 1);
    net.scheduler().run();
    outcomes.insert(n.memory(app).reg_get(make_register('M', 0)));
    const auto q = n.backend_qubit(app, 0);
    ASSERT_TRUE(q);
    qsim::Vector zero(2);
    zero << 1.0, 0.0;
    const std::array<qsim::QubitId, 1> qs{*q};
    EXPECT_NEAR(net.simulator().fidelity(qs, zero), 1.0, 1e-9);
  }
  EXPECT_EQ(outcomes, (std::set<int>{0, 1}));
}

TEST(ExecuteTest, ForLoopStoresTenBitsAndFreesQubit) {
  Network net(two_nodes(), {}, 7);
  auto& n = net.node(0);
  const int app = n.register_app({1, {}});
  n.submit(app, listing("for_loop.nqasm"), 1);
  net.scheduler().run();
  const auto* ms = n.view(app).array(0);
  ASSERT_NE(ms, nullptr);
  ASSERT_EQ(ms->size(), 10u);
  for (const auto& e : *ms) {
    ASSERT_TRUE(e.has_value());
    EXPECT_TRUE(*e == 0 || *e == 1);
  }
  EXPECT_EQ(n.allocated_qubits(app), 0);
}

TEST(ExecuteTest, ArithmeticAndBranches) {
  const auto sub = body(R"(
set R0 7
set R1 8
set R2 10
addm R3 R0 R1 R2
subm R4 R0 R1 R2
add R5 R0 R1
sub R6 R0 R1
set R7 0
LOOP:
bge R7 3 END
add R7 R7 1
jmp LOOP
END:
ret_reg R3
ret_reg R4
ret_reg R5
ret_reg R6
ret_reg R7
)");
  Network net(two_nodes(), {}, 1);
  auto& n = net.node(0);
  const int app = n.register_app({1, {}});
  n.submit(app, sub, 1);
  net.scheduler().run();
  const auto& v = n.view(app);
  EXPECT_EQ(v.reg(make_register('R', 3)), 5);
  EXPECT_EQ(v.reg(make_register('R', 4)), 9);
  EXPECT_EQ(v.reg(make_register('R', 5)), 15);
  EXPECT_EQ(v.reg(make_register('R', 6)), -1);
  EXPECT_EQ(v.reg(make_register('R', 7)), 3);
}

TEST(ExecuteTest, BadModulus) {
  Network net(two_nodes(), {}, 1);
  auto& n = net.node(0);
  const int app = n.register_app({1, {}});
  n.submit(app, body("set R0 1\nset R1 0\naddm R2 R0 R0 R1\n"), 1);
  expect_error([&] { net.scheduler().run(); }, ErrorCode::kBadModulus);
}

TEST(ExecuteTest, GateOnUnallocatedQubit) {
  Network net(two_nodes(), {}, 1);
  auto& n = net.node(0);
  const int app = n.register_app({1, {}});
  n.submit(app, body("set Q0 0\nh Q0\n"), 1);
  expect_error([&] { net.scheduler().run(); }, ErrorCode::kQubitNotAllocated);
}

TEST(ExecuteTest, BranchPastEndIsRejectedStatically) {
  Network net(two_nodes(), {}, 1);
  auto& n = net.node(0);
  const int app = n.register_app({1, {}});
  isa::Subroutine sub;
  sub.instructions.push_back({isa::Opcode::kJmp, {isa::Immediate{5}}});
  expect_error([&] { n.submit(app, sub, 1); }, ErrorCode::kBranchOutOfRange);
}

TEST(ExecuteTest, NvSubroutineOnGenericNode) {
  Network net(two_nodes(), {}, 1);
  auto& n = net.node(0);
  const int app = n.register_app({1, {}});
  expect_error([&] { n.submit(app, body("set Q0 0\nqalloc Q0\nrot_x Q0 1 1\n", "nv"), 1); },
               ErrorCode::kWrongFlavor);
}

TEST(ExecuteTest, NvMeasurementNeedsCommunicationQubit) {
  Network net(two_nodes(Profile::kNv), {}, 1);
  auto& n = net.node(0);
  const int app = n.register_app({2, {}});
  n.submit(app, body("set Q1 1\nqalloc Q1\ninit Q1\nmeas Q1 M0\n", "nv"), 1);
  expect_error([&] { net.scheduler().run(); }, ErrorCode::kNotCommunicationQubit);
}

TEST(ExecuteTest, PreMeasurementRotation) {
  // X(pi) before measuring |0>.
  const auto sub = body("set Q0 0\nqalloc Q0\ninit Q0\npmr_xyx 1 0 0 0 0 0\nmeas Q0 M0\nret_reg M0\n");
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_EQ(run_single(sub, s), 1);
}

TEST(ExecuteTest, QubitPersistsAcrossSubroutines) {
  Network net(two_nodes(), {}, 3);
  auto& n = net.node(0);
  const int app = n.register_app({1, {}});
  n.submit(app, body("set Q0 0\nqalloc Q0\ninit Q0\nx Q0\n"), 1);
  n.submit(app, body("set Q0 0\nmeas Q0 M0\nqfree Q0\nret_reg M0\n"), 2);
  std::vector<std::int32_t> done;
  n.on_done([&](int, std::int32_t id, const shmem::AppView&) { done.push_back(id); });
  net.scheduler().run();
  EXPECT_EQ(done, (std::vector<std::int32_t>{1, 2}));
  EXPECT_EQ(n.view(app).reg(make_register('M', 0)), 1);
}

TEST(RegisterTest, ResourcesAndIds) {
  Network net(two_nodes(Profile::kNv, 3), {}, 1);
  auto& n = net.node(0);
  expect_error([&] { n.register_app({5, {}}); }, ErrorCode::kResources);
  EXPECT_EQ(n.register_app({2, {}}), 0);
  EXPECT_EQ(n.free_qubits(), 1);
  // The communication qubit is taken.
  expect_error([&] { n.register_app({1, {}}); }, ErrorCode::kResources);
}

TEST(RegisterTest, ConcurrentAppsHaveDisjointPools) {
  Network net(two_nodes(Profile::kGeneric, 4), {}, 1);
  auto& n = net.node(0);
  const int a = n.register_app({2, {}});
  const int b = n.register_app({2, {}});
  EXPECT_NE(a, b);
  EXPECT_EQ(n.free_qubits(), 0);
  expect_error([&] { n.register_app({1, {}}); }, ErrorCode::kResources);

  // Both use virtual id 0; a flips its qubit, b must still read 0.
  n.submit(a, body("array 1 @0\nstore 5 @0[0]\nset Q0 0\nqalloc Q0\ninit Q0\nx Q0\nmeas Q0 M0\nret_reg M0\n"), 1);
  n.submit(b, body("set Q0 0\nqalloc Q0\ninit Q0\nmeas Q0 M0\nret_reg M0\n"), 1);
  net.scheduler().run();
  EXPECT_EQ(n.view(a).reg(make_register('M', 0)), 1);
  EXPECT_EQ(n.view(b).reg(make_register('M', 0)), 0);
  EXPECT_TRUE(n.memory(a).has_array(0));
  EXPECT_FALSE(n.memory(b).has_array(0));
}

TEST(RegisterTest, SocketErrors) {
  Network net(two_nodes(), one_link(), 1);
  auto& n = net.node(0);
  expect_error([&] { n.register_app({1, {{0, 1, 0, 0}, {0, 1, 1, 0}}}); }, ErrorCode::kSocketInUse);
  expect_error([&] { n.register_app({1, {{0, 9, 0, 0}}}); }, ErrorCode::kNoSuchSocket);
  n.register_app({1, {{0, 1, 0, 0}}});
  expect_error([&] { n.register_app({1, {{0, 1, 0, 0}}}); }, ErrorCode::kSocketInUse);
}

TEST(StopTest, ReturnsPoolAndTracesOut) {
  Network net(two_nodes(Profile::kGeneric, 3), {}, 1);
  auto& n = net.node(0);
  const int app = n.register_app({3, {}});
  n.submit(app, body("set Q0 0\nset Q1 1\nqalloc Q0\nqalloc Q1\nh Q0\ncnot Q0 Q1\n"), 1);
  net.scheduler().run();
  EXPECT_EQ(n.free_qubits(), 0);
  EXPECT_EQ(net.simulator().qubit_count(), 2u);
  n.stop_app(app);
  EXPECT_EQ(n.free_qubits(), 3);
  EXPECT_EQ(net.simulator().qubit_count(), 0u);
  EXPECT_EQ(net.simulator().group_count(), 0u);
  expect_error([&] { n.stop_app(app); }, ErrorCode::kNoSuchApp);
  expect_error([&] { n.submit(app, body("set R0 1\n"), 2); }, ErrorCode::kNoSuchApp);
}

struct EprRun {
  std::int32_t a = -1;
  std::int32_t b = -1;
};

EprRun run_epr(std::uint64_t seed, Profile profile, double fidelity = 1.0) {
  Network net(two_nodes(profile), one_link(fidelity), seed);
  auto& a = net.node(0);
  auto& b = net.node(1);
  const int x = a.register_app({1, {{0, 1, 0, 0}}});
  const int y = b.register_app({1, {{0, 0, 0, 0}}});
  a.submit(x, listing("epr_create.nqasm"), 1);
  b.submit(y, listing("epr_recv.nqasm"), 1);
  net.scheduler().run();
  return {*a.view(x).reg(make_register('M', 0)), *b.view(y).reg(make_register('M', 0))};
}

TEST(EprTest, CreateRecvListingsCorrelate) {
  int equal = 0;
  int ones = 0;
  constexpr int kShots = 10000;
  for (int s = 0; s < kShots; ++s) {
    const auto r = run_epr(static_cast<std::uint64_t>(s), Profile::kGeneric);
    equal += r.a == r.b;
    ones += r.a;
  }
  EXPECT_NEAR(equal / double(kShots), 1.0, 0.02);
  EXPECT_NEAR(ones / double(kShots), 0.5, 0.02);
}

TEST(EprTest, CreateRecvOnNvNodes) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto r = run_epr(s, Profile::kNv);
    EXPECT_EQ(r.a, r.b);
  }
}

TEST(EprTest, UnmatchedCreateBlocksUntilRecv) {
  Network net(two_nodes(), one_link(), 1);
  auto& a = net.node(0);
  auto& b = net.node(1);
  const int x = a.register_app({1, {{0, 1, 0, 0}}});
  const int y = b.register_app({1, {{0, 0, 0, 0}}});
  int updates = 0;
  a.on_memory_update([&](int, std::int32_t, const shmem::AppView&) { ++updates; });
  a.submit(x, listing("epr_create.nqasm"), 1);
  net.scheduler().run();
  EXPECT_TRUE(a.busy(x));
  EXPECT_EQ(updates, 1);
  const auto blocked = net.blocked();
  ASSERT_EQ(blocked.size(), 1u);
  EXPECT_EQ(blocked[0].node, 0);
  EXPECT_NE(blocked[0].text.find("wait_all"), std::string::npos);
  ASSERT_EQ(net.pending_requests().size(), 1u);

  b.submit(y, listing("epr_recv.nqasm"), 1);
  net.scheduler().run();
  EXPECT_FALSE(a.busy(x));
  EXPECT_FALSE(b.busy(y));
  EXPECT_TRUE(net.blocked().empty());
}

TEST(EprTest, TwoPairRecordsAreAtomic) {
  Network net(two_nodes(), one_link(), 5);
  auto& a = net.node(0);
  auto& b = net.node(1);
  const int x = a.register_app({2, {{0, 1, 0, 0}}});
  const int y = b.register_app({2, {{0, 0, 0, 0}}});
  a.submit(x, body(R"(
array 2 @0
store 0 @0[0]
store 1 @0[1]
array 20 @1
store 2 @1[1]
array 20 @2
create_epr 1 0 @0 @1 @2
wait_all @2[0:20]
ret_arr @2
)"), 1);
  b.submit(y, body(R"(
array 2 @0
store 0 @0[0]
store 1 @0[1]
array 20 @2
recv_epr 0 0 @0 @2
wait_all @2[0:20]
ret_arr @2
)"), 1);
  // After every event, each 10-slot record is either fully null or fully
  // defined.
  int checks = 0;
  net.scheduler().set_observer([&] {
    for (const auto& [node, app] : {std::pair{0, x}, std::pair{1, y}}) {
      const auto& mem = net.node(node).memory(app);
      if (!mem.has_array(2)) continue;
      for (int k = 0; k < 2; ++k) {
        int defined = 0;
        for (int i = 0; i < kEntInfoWidth; ++i) defined += mem.entry_defined(2, k * 10 + i);
        EXPECT_TRUE(defined == 0 || defined == kEntInfoWidth);
        ++checks;
      }
    }
  });
  net.scheduler().run();
  EXPECT_GT(checks, 0);
  for (const auto& [node, app, remote] : {std::tuple{0, x, 1}, std::tuple{1, y, 0}}) {
    const auto* info = net.node(node).view(app).array(2);
    ASSERT_NE(info, nullptr);
    for (int k = 0; k < 2; ++k) {
      const auto rec = [&](int slot) { return info->at(static_cast<std::size_t>(k * 10 + slot)); };
      EXPECT_EQ(rec(kPairIndex), k);
      EXPECT_EQ(rec(kBellState), 0);
      EXPECT_EQ(rec(kQubitOrOutcome), k);
      EXPECT_EQ(rec(kRemoteNode), remote);
      EXPECT_EQ(rec(kSocketId), 0);
      EXPECT_EQ(rec(kGoodness), 10000);
      EXPECT_EQ(rec(kDurationUs), 100);
      EXPECT_EQ(rec(7), 0);
    }
    EXPECT_EQ(net.node(node).allocated_qubits(app), 2);
  }
}

TEST(EprTest, ClassicalWorkContinuesWhileEntanglementPends) {
  Network net(two_nodes(), one_link(), 2);
  auto& a = net.node(0);
  auto& b = net.node(1);
  const int x = a.register_app({1, {{0, 1, 0, 0}}});
  const int y = b.register_app({1, {{0, 0, 0, 0}}});
  a.submit(x, body(R"(
array 1 @0
store 0 @0[0]
array 20 @1
array 10 @2
array 1 @3
create_epr 1 0 @0 @1 @2
set R0 0
LOOP:
beq R0 100 DONE
add R0 R0 1
jmp LOOP
DONE:
store R0 @3[0]
wait_all @2[0:10]
ret_arr @3
)"), 1);
  b.submit(y, listing("epr_recv.nqasm"), 1);
  // First event: alice's executor runs up to the wait.
  ASSERT_TRUE(net.scheduler().step());
  const auto& mem = a.memory(x);
  EXPECT_EQ(mem.array_entry(3, 0), 100);
  EXPECT_FALSE(mem.entry_defined(2, 0));
  net.scheduler().run();
  EXPECT_EQ(a.view(x).array(3)->at(0), 100);
}

TEST(EprTest, MeasureDirectly) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Network net(two_nodes(), one_link(), s);
    auto& a = net.node(0);
    auto& b = net.node(1);
    const int x = a.register_app({1, {{0, 1, 0, 0}}});
    const int y = b.register_app({1, {{0, 0, 0, 0}}});
    a.submit(x, body(R"(
array 1 @0
array 20 @1
store 1 @1[0]
store 1 @1[1]
array 10 @2
create_epr 1 0 @0 @1 @2
wait_all @2[0:10]
ret_arr @2
)"), 1);
    b.submit(y, body("array 1 @0\narray 10 @2\nrecv_epr 0 0 @0 @2\nwait_all @2[0:10]\nret_arr @2\n"), 1);
    net.scheduler().run();
    const auto ma = a.view(x).array(2)->at(kQubitOrOutcome);
    const auto mb = b.view(y).array(2)->at(kQubitOrOutcome);
    EXPECT_EQ(ma, mb);
    EXPECT_EQ(a.allocated_qubits(x), 0);
    EXPECT_EQ(net.simulator().qubit_count(), 0u);
  }
}

TEST(EprTest, NullQubitIdAndUnknownSocket) {
  {
    Network net(two_nodes(), one_link(), 1);
    const int x = net.node(0).register_app({1, {{0, 1, 0, 0}}});
    const int y = net.node(1).register_app({1, {{0, 0, 0, 0}}});
    net.node(0).submit(x, body("array 1 @0\narray 20 @1\narray 10 @2\ncreate_epr 1 0 @0 @1 @2\n"), 1);
    net.node(1).submit(y, listing("epr_recv.nqasm"), 1);
    expect_error([&] { net.scheduler().run(); }, ErrorCode::kBadQubitArray);
  }
  {
    Network net(two_nodes(), one_link(), 1);
    const int x = net.node(0).register_app({1, {}});
    net.node(0).submit(x, listing("epr_create.nqasm"), 1);
    expect_error([&] { net.scheduler().run(); }, ErrorCode::kNoSuchSocket);
  }
}

TEST(SchedulerTest, TieBreakByNodeThenInsertion) {
  Scheduler s;
  std::vector<int> order;
  s.at(5, 1, [&] { order.push_back(1); });
  s.at(5, 0, [&] { order.push_back(0); });
  s.at(5, 0, [&] { order.push_back(2); });
  s.at(1, 9, [&] { order.push_back(3); });
  s.run();
  EXPECT_EQ(order, (std::vector<int>{3, 0, 2, 1}));
}

TEST(SchedulerTest, Deadline) {
  Scheduler s;
  int ran = 0;
  s.at(5, 0, [&] { ++ran; });
  s.at(50, 0, [&] { ++ran; });
  s.set_deadline(10.0);
  s.run();
  EXPECT_EQ(ran, 1);
  EXPECT_TRUE(s.deadline_hit());
}

}  // namespace
}  // namespace nqasm::qnpu
