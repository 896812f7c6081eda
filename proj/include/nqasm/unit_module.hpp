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

// Virtual quantum memory handed to one application: qubit types, which
// native gates each qubit or pair supports, and the timing/noise table.

#ifndef NQASM_UNIT_MODULE_HPP_
#define NQASM_UNIT_MODULE_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "nqasm/isa.hpp"
#include "nqasm/params.hpp"

namespace nqasm {

enum class Profile { kNv, kGeneric };
enum class QubitType { kCommunication, kStorage };

std::string_view to_string(Profile profile);
std::string_view to_string(QubitType type);

struct UnitQubit {
  int id = 0;
  QubitType type = QubitType::kCommunication;
  std::vector<std::string> gates;
};

struct UnitEdge {
  int a = 0;
  int b = 0;
  std::vector<std::string> gates;
};

struct UnitModule {
  Profile profile = Profile::kGeneric;
  std::vector<UnitQubit> qubits;
  std::vector<UnitEdge> edges;
  NoiseParams noise;

  // NV: qubit 0 is the communication qubit, 1..n-1 are storage, star edges.
  static UnitModule nv(int n, NoiseParams noise = nv_noise());
  // Generic: every qubit can do everything, all pairs connected.
  static UnitModule generic(int n, NoiseParams noise = generic_noiseless());

  // Throws kConfig when an invariant is broken.
  void check() const;

  int size() const { return static_cast<int>(qubits.size()); }
  bool contains(int id) const;
  QubitType type(int id) const;
  // -1 when there is none (generic profile has no distinguished one).
  int communication_qubit() const;
  bool supports(int id, const std::string& gate) const;
  bool has_edge(int a, int b) const;

  // Native gate used for `opcode` on the given qubits, or "" for operations
  // that take no time (classical, qalloc, ...). Throws kWrongFlavor when the
  // opcode has no native form on this profile.
  std::string gate_name(isa::Opcode opcode, const std::vector<int>& qubits) const;
  // Throws kMissingDurationEntry.
  const GateParams& params(const std::string& gate) const;
};

nlohmann::json to_json(const UnitModule& um);
// Accepts {"profile": "nv"|"generic", "qubits": n, optional "noise": {...}};
// the NV profile also takes "two_qubit_fidelity" / "two_qubit_duration_ns"
// and "noiseless": true; "prob_error_meas_0/1" override the measurement
// flips. Throws kConfig.
UnitModule unit_module_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NoiseParams& noise);
NoiseParams noise_from_json(const nlohmann::json& j);

}  // namespace nqasm

#endif  // NQASM_UNIT_MODULE_HPP_
