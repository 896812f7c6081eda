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


#include "nqasm/host.hpp"

#include <gtest/gtest.h>

#include "nqasm/apps.hpp"
#include "nqasm/assembler.hpp"
#include "nqasm/codec.hpp"
#include "nqasm/protocol.hpp"
#include "test_util.hpp"

namespace nqasm::host {
namespace {

using nlohmann::json;
using testing::expect_error;
using testing::read_source_file;

NetworkConfig network(const std::string& profile, int qubits, double link_fidelity = 1.0,
                      bool noiseless = true) {
  json node = {{"profile", profile}, {"qubits", qubits}};
  if (profile == "nv" && noiseless) node["noiseless"] = true;
  json a = node, b = node;
  a["name"] = "alice";
  a["id"] = 0;
  b["name"] = "bob";
  b["id"] = 1;
  return network_config_from_json({{"nodes", {a, b}},
                                   {"links", {{{"nodes", {"alice", "bob"}},
                                               {"link_fidelity", link_fidelity}}}},
                                   {"classical_latency_ns", 1000}});
}

isa::Subroutine sub(const std::string& body) { return apps::vanilla(body); }

// ---- protocol frames

TEST(ProtocolTest, RegisterAppOkBytes) {
  const protocol::Message m{7, protocol::RegisterAppOk{3}};
  const Bytes frame = protocol::encode_message(m);
  const Bytes expected{0x02, 7, 0, 0, 0, 4, 0, 0, 0, 3, 0, 0, 0};
  EXPECT_EQ(frame, expected);
  EXPECT_EQ(protocol::decode_message(frame), m);
}

TEST(ProtocolTest, SubroutineCarriesBinaryVerbatim) {
  const auto hadamard = assembler::assemble(read_source_file("apps/listings/hadamard.nqasm"));
  const Bytes binary = codec::encode(hadamard);
  const protocol::Message m{1, protocol::SubroutineMsg{5, binary}};
  const Bytes frame = protocol::encode_message(m);
  ASSERT_EQ(frame.size(), 9 + 4 + binary.size());
  EXPECT_EQ(frame[0], 0x04);
  EXPECT_TRUE(std::equal(binary.begin(), binary.end(), frame.begin() + 13));
  const auto back = protocol::decode_message(frame);
  EXPECT_EQ(back, m);
  EXPECT_EQ(codec::decode(std::get<protocol::SubroutineMsg>(back.payload).subroutine), hadamard);
}

TEST(ProtocolTest, EveryMessageRoundTrips) {
  shmem::AppView view({{isa::make_register('M', 0), 1}, {isa::make_register('R', 2), -9}},
                      {{4, {std::int32_t{1}, std::nullopt, std::int32_t{-3}}}});
  const std::vector<protocol::Message> messages{
      {1, protocol::RegisterApp{2, {{0, 1, 0, 0}, {1, 1, 3, 50}}}},
      {1, protocol::RegisterAppOk{0}},
      {1, protocol::RegisterAppErr{ErrorCode::kSocketInUse}},
      {2, protocol::SubroutineMsg{0, {0xAA, 0xBB}}},
      {2, protocol::Done{}},
      {2, protocol::MemoryUpdate{0, view}},
      {3, protocol::StopApp{0}},
  };
  for (const auto& m : messages) {
    EXPECT_EQ(protocol::decode_message(protocol::encode_message(m)), m);
  }
}

TEST(ProtocolTest, UnknownTypeAndBadLength) {
  Bytes frame = protocol::encode_message({1, protocol::StopApp{0}});
  Bytes bad_type = frame;
  bad_type[0] = 0xFF;
  expect_error([&] { protocol::decode_message(bad_type); }, ErrorCode::kUnknownMessageType);
  Bytes short_frame(frame.begin(), frame.end() - 1);
  expect_error([&] { protocol::decode_message(short_frame); }, ErrorCode::kTruncated);
  Bytes long_frame = frame;
  long_frame.push_back(0);
  expect_error([&] { protocol::decode_message(long_frame); }, ErrorCode::kTruncated);
}

// ---- teleportation

TEST(TeleportTest, NoiselessGenericIsPerfect) {
  const auto config = network("generic", 2);
  for (int s = 0; s < apps::kPauliStates; ++s) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto r = run_network(config, apps::teleport({s}), seed);
      EXPECT_NEAR(r.nodes.at("bob").outputs.at("fidelity").get<double>(), 1.0, 1e-9)
          << "state " << s << " seed " << seed;
    }
  }
}

TEST(TeleportTest, NoiselessNvIsPerfectForEveryFlavoring) {
  const auto config = network("nv", 3);
  for (const char* flavor : {"vanilla", "num", "um", "nv"}) {
    for (int s = 0; s < apps::kPauliStates; ++s) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        apps::TeleportParams p{s, apps::Flavoring::from_name(flavor)};
        const auto r = run_network(config, apps::teleport(p), seed);
        EXPECT_NEAR(r.nodes.at("bob").outputs.at("fidelity").get<double>(), 1.0, 1e-9)
            << flavor << " state " << s << " seed " << seed;
      }
    }
  }
}

TEST(TeleportTest, SenderMovesByFlavoring) {
  const auto config = network("nv", 3);
  auto moves = [&](const char* flavor) {
    const auto r = run_network(config, apps::teleport({2, apps::Flavoring::from_name(flavor)}), 1);
    const auto& a = r.nodes.at("alice");
    return a.outputs.at("compiled_moves").get<int>() + a.stats.moves;
  };
  EXPECT_EQ(moves("um"), 2);
  EXPECT_EQ(moves("num"), 4);
}

TEST(TeleportTest, TraceFollowsTheProtocol) {
  const auto r = run_network(network("nv", 3), apps::teleport({4}), 3);
  std::string why;
  EXPECT_TRUE(trace_conforms(r.trace, &why)) << why;
  EXPECT_FALSE(r.trace.empty());
  // Receiver registers, runs two subroutines and stops.
  int bob_subroutines = 0;
  for (const auto& t : r.trace) {
    bob_subroutines += t.node == "bob" && t.type == protocol::MessageType::kSubroutine;
  }
  EXPECT_EQ(bob_subroutines, 2);
}

TEST(TraceTest, RejectsOutOfOrderSequences) {
  using T = protocol::MessageType;
  auto entry = [](T type, std::int32_t id, bool to_qnpu) {
    return TraceEntry{"n", 0, to_qnpu, type, id, 0.0};
  };
  std::vector<TraceEntry> good{entry(T::kRegisterApp, 1, true), entry(T::kRegisterAppOk, 1, false),
                               entry(T::kSubroutine, 2, true), entry(T::kMemoryUpdate, 2, false),
                               entry(T::kDone, 2, false), entry(T::kStopApp, 3, true)};
  EXPECT_TRUE(trace_conforms(good));
  auto no_stop = good;
  no_stop.pop_back();
  EXPECT_FALSE(trace_conforms(no_stop));
  auto wrong_done = good;
  wrong_done[4].message_id = 9;
  EXPECT_FALSE(trace_conforms(wrong_done));
  auto early = good;
  std::swap(early[2], early[1]);
  EXPECT_FALSE(trace_conforms(early));
}

// ---- blind computation

TEST(BqcTest, NoiselessTrapsNeverFail) {
  const auto config = network_config_from_json(json::parse(R"({
    "nodes": [{"name": "client", "id": 0, "profile": "nv", "qubits": 1, "noiseless": true},
              {"name": "server", "id": 1, "profile": "nv", "qubits": 3, "noiseless": true}],
    "links": [{"nodes": ["client", "server"]}]})"));
  for (const char* flavor : {"vanilla", "nv"}) {
    apps::RunRequest req{config, {{"app", "bqc"}, {"flavor", flavor}}, {}, 11, 500};
    const auto report = apps::run_app(req);
    EXPECT_EQ(report["summary"]["trap_rounds"], 500);
    EXPECT_EQ(report["summary"]["trap_error_rate"].get<double>(), 0.0) << flavor;
  }
}

TEST(BqcTest, NoiselessComputationIsDeterministicForZeroAngles) {
  // alpha = beta = 0 on a two-qubit graph state: m1 is uniformly random but
  // the client undoes it; check the protocol runs and the trace conforms.
  const auto config = network_config_from_json(json::parse(R"({
    "nodes": [{"name": "client", "id": 0, "profile": "generic", "qubits": 2},
              {"name": "server", "id": 1, "profile": "generic", "qubits": 2}],
    "links": [{"nodes": ["client", "server"]}]})"));
  for (int t = 0; t < 8; ++t) {
    apps::BqcRound round;
    round.theta1 = t;
    round.theta2 = 7 - t;
    const auto r = run_network(config, apps::bqc(round), static_cast<std::uint64_t>(t));
    EXPECT_TRUE(trace_conforms(r.trace));
    EXPECT_TRUE(r.nodes.at("client").outputs.contains("m2"));
    EXPECT_FALSE(r.nodes.at("client").outputs.contains("trap_failed"));
  }
}

// ---- drivers and classical sockets

Program fifo_sender(Context& ctx) {
  ctx.register_app(1);
  for (int i = 0; i < 5; ++i) ctx.send_ints("bob", {i});
  co_return;
}

Program fifo_receiver(Context& ctx) {
  ctx.register_app(1);
  json got = json::array();
  for (int i = 0; i < 5; ++i) got.push_back(decode_ints(co_await ctx.recv("alice"))[0]);
  ctx.output("got", got);
}

TEST(DriverTest, ClassicalMessagesArriveInOrder) {
  const auto r = run_network(network("generic", 1), {{"alice", fifo_sender}, {"bob", fifo_receiver}}, 0);
  EXPECT_EQ(r.nodes.at("bob").outputs.at("got"), json({0, 1, 2, 3, 4}));
}

Program late_sender(Context& ctx) {
  ctx.register_app(1);
  // Some quantum work first, so the receiver is already waiting.
  co_await ctx.run(sub("set Q0 0\nqalloc Q0\ninit Q0\nh Q0\nmeas Q0 M0\nret_reg M0\n"));
  ctx.output("sent_at", ctx.now());
  ctx.send_ints("bob", {42});
}

Program early_receiver(Context& ctx) {
  ctx.register_app(1);
  ctx.output("value", decode_ints(co_await ctx.recv("alice"))[0]);
  ctx.output("received_at", ctx.now());
}

TEST(DriverTest, RecvBlocksUntilSend) {
  const auto r = run_network(network("generic", 1), {{"alice", late_sender}, {"bob", early_receiver}}, 0);
  const auto& bob = r.nodes.at("bob").outputs;
  EXPECT_EQ(bob.at("value"), 42);
  EXPECT_GE(bob.at("received_at").get<double>(),
            r.nodes.at("alice").outputs.at("sent_at").get<double>() + 1000);
}

Program silent(Context& ctx) {
  ctx.register_app(1);
  co_return;
}

TEST(DriverTest, RecvFromStoppedPeerFails) {
  expect_error([] { run_network(network("generic", 1), {{"alice", silent}, {"bob", early_receiver}}, 0); },
               ErrorCode::kPeerClosed);
}

Program unregistered(Context& ctx) {
  co_await ctx.run(sub("set Q0 0\nqalloc Q0\n"));
}

Program after_stop(Context& ctx) {
  ctx.register_app(1);
  ctx.stop();
  co_await ctx.run(sub("set Q0 0\nqalloc Q0\n"));
}

TEST(DriverTest, SubroutineOrderIsEnforced) {
  expect_error([] { run_network(network("generic", 1), {{"alice", unregistered}}, 0); },
               ErrorCode::kProtocolOrder);
  expect_error([] { run_network(network("generic", 1), {{"alice", after_stop}}, 0); },
               ErrorCode::kNoSuchApp);
}

Program two_subroutines(Context& ctx) {
  ctx.register_app(1);
  co_await ctx.run(sub("set Q0 0\nqalloc Q0\ninit Q0\nx Q0\n"));
  const auto view = co_await ctx.run(sub("set Q0 0\nmeas Q0 M0\nret_reg M0\n"));
  ctx.output("m", *view.reg(isa::make_register('M', 0)));
  ctx.output("updates", ctx.memory_updates());
}

TEST(DriverTest, QubitsPersistAcrossSubroutines) {
  for (const char* profile : {"generic", "nv"}) {
    const auto r = run_network(network(profile, 2), {{"alice", two_subroutines}}, 5);
    EXPECT_EQ(r.nodes.at("alice").outputs.at("m"), 1) << profile;
    EXPECT_TRUE(trace_conforms(r.trace));
  }
}

Program lonely_create(Context& ctx) {
  ctx.register_app(1, {{0, "bob", 0, 0}});
  co_await ctx.run(sub(
      "array 1 @0\narray 20 @1\narray 10 @2\nstore 0 @0[0]\n"
      "create_epr 1 0 @0 @1 @2\nwait_all @2[0:10]\n"));
}

TEST(DriverTest, DeadlockIsReported) {
  try {
    run_network(network("generic", 1), {{"alice", lonely_create}, {"bob", silent}}, 0);
    ADD_FAILURE() << "no deadlock";
  } catch (const DeadlockError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDeadlock);
    ASSERT_EQ(e.report().waits.size(), 1u);
    EXPECT_EQ(e.report().waits[0].node, 0);
    EXPECT_NE(e.report().describe().find("wait_all"), std::string::npos) << e.report().describe();
  }
}

TEST(DriverTest, UnknownNodeIsAConfigError) {
  expect_error([] { run_network(network("generic", 1), {{"carol", silent}}, 0); },
               ErrorCode::kConfig);
}

// ---- run_app

TEST(RunAppTest, SameSeedSameReport) {
  const auto config = network("nv", 3, 0.9, false);
  apps::RunRequest req{config, {{"app", "teleport"}, {"flavor", "um"}}, {}, 99, 12};
  const auto a = apps::run_app(req).dump();
  const auto b = apps::run_app(req).dump();
  EXPECT_EQ(a, b);
  req.seed = 100;
  EXPECT_NE(apps::run_app(req).dump(), a);
}

TEST(RunAppTest, DigestCoversConfigAndApp) {
  const auto config = network("generic", 2);
  const json app = {{"app", "teleport"}};
  const auto d = apps::config_digest(config, app);
  EXPECT_EQ(d.size(), 64u);
  EXPECT_EQ(d, apps::config_digest(config, app));
  EXPECT_NE(d, apps::config_digest(network("generic", 2, 0.95), app));
  EXPECT_NE(d, apps::config_digest(config, {{"app", "teleport"}, {"state", 1}}));
}

TEST(RunAppTest, ScriptRunsTheEprListings) {
  const auto config = network("generic", 2);
  const json app = {{"app", "script"},
                    {"programs",
                     {{"alice", {{"sockets", {{{"id", 0}, {"remote", "bob"}}}},
                                 {"subroutines", {"epr_create.nqasm"}}}},
                      {"bob", {{"sockets", {{{"id", 0}, {"remote", "alice"}}}},
                               {"subroutines", {"epr_recv.nqasm"}}}}}}};
  apps::RunRequest req{config, app, testing::source_path("apps/listings"), 3, 50};
  const auto report = apps::run_app(req);
  for (const auto& shot : report["results"]) {
    const auto& a = shot["nodes"]["alice"]["outputs"]["results"][0]["registers"]["M0"];
    const auto& b = shot["nodes"]["bob"]["outputs"]["results"][0]["registers"]["M0"];
    EXPECT_EQ(a, b);
  }
}

TEST(RunAppTest, BadAppIsAConfigError) {
  apps::RunRequest req{network("generic", 2), {{"app", "chess"}}, {}, 0, 1};
  expect_error([&] { apps::run_app(req); }, ErrorCode::kConfig);
  req.app = {{"app", "teleport"}, {"flavor", "quantum"}};
  expect_error([&] { apps::run_app(req); }, ErrorCode::kConfig);
}

}  // namespace
}  // namespace nqasm::host
