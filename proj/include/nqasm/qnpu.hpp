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


// Simulated QNPU: application registration with disjoint qubit pools,
// subroutine execution, EPR sockets and a direct-link network stack. One
// Network owns the scheduler, the quantum backend and every node.

#ifndef NQASM_QNPU_HPP_
#define NQASM_QNPU_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nqasm/compiler.hpp"
#include "nqasm/isa.hpp"
#include "nqasm/qsim.hpp"
#include "nqasm/scheduler.hpp"
#include "nqasm/shmem.hpp"
#include "nqasm/unit_module.hpp"

namespace nqasm::qnpu {

inline constexpr int kEntInfoWidth = 10;
inline constexpr int kArgsWidth = 20;

// Slots of one entanglement-info record.
enum EntInfoSlot {
  kPairIndex = 0,
  kBellState = 1,
  kQubitOrOutcome = 2,
  kRemoteNode = 3,
  kSocketId = 4,
  kGoodness = 5,
  kDurationUs = 6,
};

// Slots of the create_epr argument array.
enum ArgsSlot { kArgType = 0, kArgPairs = 1, kArgMinFidelity = 2 };

enum class EntType : std::int32_t { kCreateKeep = 0, kMeasureDirectly = 1 };

struct EprSocketBinding {
  std::int32_t socket_id = 0;
  std::int32_t remote_node = 0;
  std::int32_t remote_socket = 0;
  std::int32_t min_fidelity = 0;  // x 10^4, recorded only
  friend bool operator==(const EprSocketBinding&, const EprSocketBinding&) = default;
};

struct AppSpec {
  int qubits = 1;
  std::vector<EprSocketBinding> sockets;
};

struct NodeConfig {
  int id = 0;
  std::string name;
  UnitModule hardware;
};

struct LinkConfig {
  int a = 0;
  int b = 1;
  double link_fidelity = 1.0;
  double cycle_time_ns = 1e5;
};

struct EntRequest {
  bool create = true;
  int node = 0;
  int app = 0;
  std::int32_t socket_id = 0;
  std::int32_t remote_node = 0;
  std::int32_t remote_socket = 0;
  std::int32_t qubit_array = 0;
  std::optional<std::int32_t> args_array;
  std::int32_t entinfo_array = 0;
  // Create side only; the recv side takes the creator's values.
  int pairs = 1;
  EntType type = EntType::kCreateKeep;
  double submitted_ns = 0.0;
};

// A wait instruction an executor is blocked on.
struct BlockedWait {
  int node = 0;
  int app = 0;
  std::size_t instruction = 0;
  std::string text;
};

struct NodeStats {
  std::map<std::string, int> gates;  // native gate name -> count
  int two_qubit_gates = 0;
  int moves = 0;  // inserted by runtime translation
  int pairs = 0;
  double end_time_ns = 0.0;
};

class Network;

class Qnpu {
 public:
  using DoneFn = std::function<void(int app, std::int32_t message_id, const shmem::AppView&)>;
  using UpdateFn = std::function<void(int app, std::int32_t message_id, const shmem::AppView&)>;

  int id() const { return config_.id; }
  const std::string& name() const { return config_.name; }
  const UnitModule& hardware() const { return config_.hardware; }

  // Throws kResources, kSocketInUse, kNoSuchSocket (unknown remote node).
  int register_app(const AppSpec& spec);
  // Queues the subroutine; it starts when the app's previous one is done.
  // Throws kNoSuchApp, kWrongFlavor and the static subroutine checks.
  void submit(int app, isa::Subroutine sub, std::int32_t message_id);
  // Throws kNoSuchApp.
  void stop_app(int app);

  bool has_app(int app) const { return apps_.contains(app); }
  bool busy(int app) const;
  int free_qubits() const;
  int allocated_qubits(int app) const;
  const UnitModule& unit_module(int app) const;
  const shmem::SharedMemory& memory(int app) const;
  const shmem::AppView& view(int app) const;
  // Backend qubit behind a virtual id, for simulation-only inspection.
  std::optional<qsim::QubitId> backend_qubit(int app, int virtual_id) const;
  std::vector<BlockedWait> blocked() const;
  const NodeStats& stats() const { return stats_; }
  double clock_ns() const { return clock_ns_; }

  void on_done(DoneFn fn) { on_done_ = std::move(fn); }
  void on_memory_update(UpdateFn fn) { on_update_ = std::move(fn); }

 private:
  friend class Network;

  struct Running {
    isa::Subroutine sub;
    std::int32_t message_id = 0;
    std::size_t pc = 0;
    bool blocked = false;
    bool scheduled = false;
  };

  struct App {
    int id = 0;
    UnitModule um;
    std::vector<int> pool;                 // position -> hardware qubit
    std::map<int, int> position;           // virtual id -> position
    std::map<int, qsim::QubitId> backend;  // position -> backend qubit
    std::map<std::int32_t, EprSocketBinding> sockets;
    shmem::SharedMemory mem;
    shmem::AppView view;
    std::set<isa::RegisterRef> ret_regs;
    std::set<std::int32_t> ret_arrays;
    std::optional<std::array<std::pair<isa::Axis, isa::AngleSpec>, 3>> pmr;
    std::optional<Running> running;
    std::deque<Running> queue;
    std::unique_ptr<compiler::NvSession> session;
    bool precompiled = false;  // NV code seen from this app
    std::map<isa::RegisterRef, std::int32_t> measurements;  // count per result register
  };

  Qnpu(Network& net, NodeConfig config);

  App& app(int id);
  const App& app(int id) const;
  void schedule(App& a);
  void resume(int app_id);
  // Executes one instruction; false when the executor must block.
  bool execute(App& a, Running& r);
  void finish(App& a);
  void notify(int app_id);
  bool wait_satisfied(const App& a, const isa::Instruction& in) const;

  std::int32_t value(const App& a, const isa::Operand& op) const;
  std::int32_t index(const App& a, const isa::IndexOperand& idx) const;
  int resolve_qubit(const App& a, const isa::Operand& op, std::size_t pc) const;
  int map_virtual(App& a, int virtual_id, bool epr);
  void release_position(App& a, int position);
  void gate(App& a, const isa::Instruction& in, std::size_t pc);
  void measure(App& a, const isa::Instruction& in, std::size_t pc);
  void submit_epr(App& a, const isa::Instruction& in);
  double advance(double duration_ns);

  Network& net_;
  NodeConfig config_;
  std::vector<int> owner_;  // hardware qubit -> app id or -1
  std::map<int, App> apps_;
  int next_app_ = 0;
  double clock_ns_ = 0.0;
  NodeStats stats_;
  DoneFn on_done_;
  UpdateFn on_update_;
};

class Network {
 public:
  // Throws kConfig for duplicate node ids or links to unknown nodes.
  Network(std::vector<NodeConfig> nodes, std::vector<LinkConfig> links, std::uint64_t seed,
          qsim::TwoQubitNoise two_qubit_noise = qsim::TwoQubitNoise::kPerQubit);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  ~Network();

  Scheduler& scheduler() { return scheduler_; }
  qsim::Simulator& simulator() { return sim_; }
  const qsim::Simulator& simulator() const { return sim_; }

  bool has_node(int id) const { return nodes_.contains(id); }
  Qnpu& node(int id);
  const Qnpu& node(int id) const;
  std::vector<int> node_ids() const;
  const LinkConfig* link(int a, int b) const;

  std::vector<BlockedWait> blocked() const;
  const std::vector<EntRequest>& pending_requests() const { return pending_; }

  // Arrays currently registered as entanglement-info targets, as
  // (node, app, address); for the atomicity check.
  std::vector<std::array<int, 3>> entinfo_arrays() const;

 private:
  friend class Qnpu;

  void submit_request(EntRequest req);
  void drop_requests(int node, int app);
  void try_match();
  void deliver(const EntRequest& create, const EntRequest& recv, int index,
               std::uint64_t match_id);

  Scheduler scheduler_;
  qsim::Simulator sim_;
  std::map<int, std::unique_ptr<Qnpu>> nodes_;
  std::vector<LinkConfig> links_;
  std::vector<EntRequest> pending_;
  std::map<std::uint64_t, std::pair<EntRequest, EntRequest>> active_;
  std::uint64_t next_match_ = 0;
};

}  // namespace nqasm::qnpu

#endif  // NQASM_QNPU_HPP_
