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


// Bundled applications (teleportation, blind computation trap rounds and a
// generic script runner) and the shot loop behind `nqasm run`.

#ifndef NQASM_APPS_HPP_
#define NQASM_APPS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nqasm/compiler.hpp"
#include "nqasm/host.hpp"

namespace nqasm::apps {

// How a driver hands its vanilla code to the QNPU: as is (the QNPU maps it
// to native gates ad hoc) or compiled to the NV flavor at the application
// layer with the given passes.
struct Flavoring {
  bool nv = false;
  compiler::CompileOptions options;

  static Flavoring vanilla() { return {}; }
  // NV compilation without and with measurement reordering.
  static Flavoring nv_num() { return {true, {}}; }
  static Flavoring nv_um() { return {true, {true, false, false}}; }
  static Flavoring nv_optimized() { return {true, compiler::CompileOptions::from_mode(compiler::Mode::kOptimized)}; }
  // "vanilla", "num", "um", "nv" (optimized). Throws kConfig.
  static Flavoring from_name(const std::string& name);
};

// Compiles per app on the application side; keeps the qubit placement
// between the app's subroutines. Gate-free subroutines are sent as written
// until the first NV one, mirroring the QNPU, which translates them itself
// up to that point.
class AppCompiler {
 public:
  AppCompiler(const host::Context& ctx, Flavoring flavoring);
  isa::Subroutine operator()(const isa::Subroutine& vanilla);
  int moves() const { return moves_; }
  // Virtual id the QNPU sees for the app's qubit `v`.
  int qubit(int v) const;

 private:
  std::unique_ptr<compiler::NvSession> session_;
  int moves_ = 0;
  bool sent_nv_ = false;
};

isa::Subroutine vanilla(const std::string& body);

// The six Pauli eigenstates |0>, |1>, |+>, |->, |+i>, |-i>.
inline constexpr int kPauliStates = 6;
qsim::Vector pauli_state(int index);
// Vanilla gates preparing pauli_state(index) from |0> on Q0.
std::string pauli_preparation(int index);

struct TeleportParams {
  int state = 0;
  Flavoring flavoring;
  std::string sender = "alice";
  std::string receiver = "bob";
};

// Sender teleports pauli_state(state); receiver outputs "fidelity".
std::map<std::string, host::Driver> teleport(const TeleportParams& params);

// The vanilla sender subroutine (state preparation, EPR, Bell measurement).
std::string teleport_sender_source(int state, int receiver_node);

struct BqcRound {
  // Angles in units of pi/4.
  int theta1 = 0;
  int theta2 = 0;
  int alpha = 0;
  int beta = 0;
  // 0: computation round; 1: qubit 1 is the trap and qubit 2 a dummy;
  // 2: the other way round.
  int trap = 0;
  Flavoring flavoring;
  std::string client = "client";
  std::string server = "server";
};

// Client outputs m1, m2 and, in trap rounds, "trap_failed".
std::map<std::string, host::Driver> bqc(const BqcRound& round);

// Runs subroutine files per node: {"programs": {node: {"qubits": n,
// "sockets": [{"id", "remote", "remote_id"}], "subroutines": [files]}}}.
std::map<std::string, host::Driver> script(const nlohmann::json& spec,
                                           const std::filesystem::path& base);

struct RunRequest {
  host::NetworkConfig network;
  nlohmann::json app;  // contents of app.json
  std::filesystem::path app_dir;
  std::uint64_t seed = 0;
  int shots = 1;
};

// Seed of shot `shot`, derived from the run seed.
std::uint64_t shot_seed(std::uint64_t seed, int shot);

// SHA-256 (hex) over the canonical JSON of the network config and app.
std::string config_digest(const host::NetworkConfig& network, const nlohmann::json& app);

// Executes the shots and returns the report. Throws DeadlockError and the
// errors of the drivers.
nlohmann::json run_app(const RunRequest& request);

}  // namespace nqasm::apps

#endif  // NQASM_APPS_HPP_
