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


// Application layer: network configuration, per-node program drivers written
// as coroutines, classical sockets between drivers, and the runner that
// puts one QNPU behind each node and plays everything out on the shared
// scheduler. Drivers talk to their QNPU only through encoded protocol
// frames, which are recorded in a trace.

#ifndef NQASM_HOST_HPP_
#define NQASM_HOST_HPP_

#include <coroutine>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nqasm/bytes.hpp"
#include "nqasm/protocol.hpp"
#include "nqasm/qnpu.hpp"
#include "nqasm/qsim.hpp"
#include "nqasm/shmem.hpp"
#include "nqasm/unit_module.hpp"

namespace nqasm::host {

struct NodeSpec {
  std::string name;
  int id = 0;
  UnitModule hardware;
};

struct LinkSpec {
  std::string a;
  std::string b;
  double link_fidelity = 1.0;
  double cycle_time_ns = 1e5;
};

struct NetworkConfig {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  double classical_latency_ns = 0.0;
  std::optional<std::uint64_t> seed;

  // Throws kConfig.
  void check() const;
  const NodeSpec& node(const std::string& name) const;
  bool has_node(const std::string& name) const;
};

// {"nodes": [{"name", "id", "profile", "qubits", "noise" | "noiseless" |
//  "two_qubit_fidelity"/"two_qubit_duration_ns"}],
//  "links": [{"nodes": [a, b], "link_fidelity", "cycle_time_ns"}],
//  "classical_latency_ns", "seed"}
NetworkConfig network_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkConfig& config);

// Coroutine type of a program driver.
class Program {
 public:
  struct promise_type {
    std::exception_ptr error;
    Program get_return_object() {
      return Program(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { error = std::current_exception(); }
  };

  Program() = default;
  explicit Program(std::coroutine_handle<promise_type> h) : handle_(h) {}
  Program(Program&& other) noexcept : handle_(std::exchange(other.handle_, {})) {}
  Program& operator=(Program&& other) noexcept;
  Program(const Program&) = delete;
  Program& operator=(const Program&) = delete;
  ~Program();

  std::coroutine_handle<promise_type> handle() const { return handle_; }
  bool done() const { return !handle_ || handle_.done(); }

 private:
  std::coroutine_handle<promise_type> handle_;
};

struct SocketSpec {
  std::int32_t socket_id = 0;
  std::string remote;  // node name
  std::int32_t remote_socket = 0;
  std::int32_t min_fidelity = 0;
};

struct TraceEntry {
  std::string node;
  int app_id = -1;
  bool to_qnpu = true;
  protocol::MessageType type;
  std::int32_t message_id = 0;
  double time_ns = 0.0;
};

class Runner;

// The handle a driver uses to reach its QNPU, its peers and its outputs.
class Context {
 public:
  const std::string& node_name() const { return node_; }
  int node_id() const;
  int node_id(const std::string& name) const;
  double now() const;

  // RegisterApp / RegisterAppOK. Throws the error code of RegisterAppErr.
  int register_app(int qubits, const std::vector<SocketSpec>& sockets = {});
  bool registered() const { return app_id_ >= 0; }
  int app_id() const { return app_id_; }
  // The app's unit module as granted by the node.
  const UnitModule& unit_module() const;
  // The node's full quantum memory, known before registering.
  const UnitModule& hardware() const;

  struct RunAwaiter {
    Context* ctx;
    isa::Subroutine sub;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h);
    shmem::AppView await_resume();
  };
  // Sends the subroutine and resumes after Done with the app's view.
  // Throws kProtocolOrder before registration or after stop.
  RunAwaiter run(isa::Subroutine sub) { return RunAwaiter{this, std::move(sub)}; }
  // Latest view received through MemoryUpdate.
  const shmem::AppView& view() const { return view_; }
  int memory_updates() const { return memory_updates_; }

  // Classical messages to/from another driver. send throws kPeerClosed when
  // the peer has stopped.
  void send(const std::string& peer, Bytes message);
  void send_ints(const std::string& peer, const std::vector<std::int32_t>& values);

  struct RecvAwaiter {
    Context* ctx;
    std::string peer;
    bool await_ready() const;
    void await_suspend(std::coroutine_handle<> h);
    Bytes await_resume();
  };
  RecvAwaiter recv(const std::string& peer) { return RecvAwaiter{this, peer}; }

  void stop();
  bool stopped() const { return stopped_; }

  void output(const std::string& key, nlohmann::json value) { outputs_[key] = std::move(value); }
  const nlohmann::json& outputs() const { return outputs_; }

  // Simulation-only: fidelity of the app's qubit `virtual_id` with `psi`.
  double peek_fidelity(int virtual_id, const qsim::Vector& psi) const;

 private:
  friend class Runner;
  Context(Runner& runner, std::string node) : runner_(runner), node_(std::move(node)) {}

  void deliver_from_qnpu(const Bytes& frame);
  void deliver_classical(const std::string& from, Bytes message);
  void resume();
  int in_flight(const std::string& peer) const {
    const auto it = in_flight_.find(peer);
    return it == in_flight_.end() ? 0 : it->second;
  }

  Runner& runner_;
  std::string node_;
  int app_id_ = -1;
  bool stopped_ = false;
  std::int32_t next_message_id_ = 1;
  std::optional<std::int32_t> awaiting_done_;
  std::optional<std::string> awaiting_peer_;
  std::coroutine_handle<> waiting_;
  shmem::AppView view_;
  int memory_updates_ = 0;
  std::map<std::string, std::deque<Bytes>> inbox_;
  // Messages sent to us that are still on the wire, per sender.
  std::map<std::string, int> in_flight_;
  std::optional<protocol::Message> reply_;
  nlohmann::json outputs_ = nlohmann::json::object();
};

std::vector<std::int32_t> decode_ints(const Bytes& message);

using Driver = std::function<Program(Context&)>;

struct RunOptions {
  qsim::TwoQubitNoise two_qubit_noise = qsim::TwoQubitNoise::kPerQubit;
  std::optional<double> deadline_ns;
};

struct NodeResult {
  nlohmann::json outputs = nlohmann::json::object();
  qnpu::NodeStats stats;
  double end_time_ns = 0.0;
};

struct RunResult {
  std::map<std::string, NodeResult> nodes;
  std::vector<TraceEntry> trace;
  double end_time_ns = 0.0;

  nlohmann::json to_json() const;
};

struct DeadlockReport {
  std::vector<qnpu::BlockedWait> waits;
  // Drivers that did not finish, with what they wait for.
  std::vector<std::pair<std::string, std::string>> drivers;

  std::string describe() const;
};

class DeadlockError : public Error {
 public:
  explicit DeadlockError(DeadlockReport report)
      : Error(ErrorCode::kDeadlock, report.describe()), report_(std::move(report)) {}
  const DeadlockReport& report() const { return report_; }

 private:
  DeadlockReport report_;
};

// Throws kConfig for drivers on unknown nodes, DeadlockError, and whatever a
// driver or QNPU raises.
RunResult run_network(const NetworkConfig& config, const std::map<std::string, Driver>& drivers,
                      std::uint64_t seed, const RunOptions& options = {});

// Checks RegisterApp (RegisterAppOK) (Subroutine MemoryUpdate* Done)* StopApp
// for every (node, app) in the trace.
bool trace_conforms(const std::vector<TraceEntry>& trace, std::string* why = nullptr);

}  // namespace nqasm::host

#endif  // NQASM_HOST_HPP_
