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

#include "nqasm/unit_module.hpp"

#include <algorithm>
#include <set>

#include "nqasm/error.hpp"

namespace nqasm {

namespace g = gate_names;
using isa::Opcode;

std::string_view to_string(Profile profile) {
  return profile == Profile::kNv ? "nv" : "generic";
}

std::string_view to_string(QubitType type) {
  return type == QubitType::kCommunication ? "communication" : "storage";
}

UnitModule UnitModule::nv(int n, NoiseParams noise) {
  if (n < 1) throw Error(ErrorCode::kConfig, "NV unit module needs >= 1 qubit");
  UnitModule um;
  um.profile = Profile::kNv;
  um.noise = std::move(noise);
  um.qubits.push_back({0, QubitType::kCommunication,
                       {g::kElectronInit, g::kElectronRot, g::kMeasure}});
  for (int i = 1; i < n; ++i) {
    um.qubits.push_back({i, QubitType::kStorage,
                         {g::kCarbonInit, g::kCarbonXyRot, g::kCarbonZRot}});
    um.edges.push_back({0, i, {g::kEcControlledDirXy}});
  }
  return um;
}

UnitModule UnitModule::generic(int n, NoiseParams noise) {
  if (n < 1) throw Error(ErrorCode::kConfig, "unit module needs >= 1 qubit");
  UnitModule um;
  um.profile = Profile::kGeneric;
  um.noise = std::move(noise);
  for (int i = 0; i < n; ++i) {
    um.qubits.push_back({i, QubitType::kCommunication,
                         {g::kInit, g::kSingleQubitGate, g::kMeasure}});
    for (int j = 0; j < i; ++j) um.edges.push_back({j, i, {g::kTwoQubitGate}});
  }
  return um;
}

void UnitModule::check() const {
  std::set<int> ids;
  for (const auto& q : qubits) {
    if (!ids.insert(q.id).second) {
      throw Error(ErrorCode::kConfig, "duplicate qubit id " + std::to_string(q.id));
    }
  }
  for (const auto& e : edges) {
    if (!ids.contains(e.a) || !ids.contains(e.b) || e.a == e.b) {
      throw Error(ErrorCode::kConfig, "edge (" + std::to_string(e.a) + "," +
                                          std::to_string(e.b) + ") is invalid");
    }
  }
  if (profile == Profile::kNv) {
    const auto comm = std::count_if(qubits.begin(), qubits.end(), [](const auto& q) {
      return q.type == QubitType::kCommunication;
    });
    if (comm != 1) {
      throw Error(ErrorCode::kConfig, "NV unit module needs exactly one communication qubit");
    }
    const int c = communication_qubit();
    for (const auto& e : edges) {
      if (e.a != c && e.b != c) {
        throw Error(ErrorCode::kConfig, "NV edge not incident to the communication qubit");
      }
    }
  }
}

bool UnitModule::contains(int id) const {
  return std::any_of(qubits.begin(), qubits.end(),
                     [id](const auto& q) { return q.id == id; });
}

QubitType UnitModule::type(int id) const {
  for (const auto& q : qubits) {
    if (q.id == id) return q.type;
  }
  throw Error(ErrorCode::kQubitOutOfRange, "qubit " + std::to_string(id));
}

int UnitModule::communication_qubit() const {
  if (profile != Profile::kNv) return -1;
  for (const auto& q : qubits) {
    if (q.type == QubitType::kCommunication) return q.id;
  }
  return -1;
}

bool UnitModule::supports(int id, const std::string& gate) const {
  for (const auto& q : qubits) {
    if (q.id == id) {
      return std::find(q.gates.begin(), q.gates.end(), gate) != q.gates.end();
    }
  }
  return false;
}

bool UnitModule::has_edge(int a, int b) const {
  return std::any_of(edges.begin(), edges.end(), [a, b](const auto& e) {
    return (e.a == a && e.b == b) || (e.a == b && e.b == a);
  });
}

std::string UnitModule::gate_name(Opcode opcode, const std::vector<int>& q) const {
  const auto& info = isa::Registry::instance().info(opcode);
  if (opcode == Opcode::kMeas) return g::kMeasure;
  if (info.group != isa::Group::kGate) return "";
  const bool nv_op = info.flavor == isa::Flavor::kNv;
  if (profile == Profile::kGeneric) {
    if (nv_op) {
      throw Error(ErrorCode::kWrongFlavor,
                  std::string(info.mnemonic) + " (nv) on a generic unit module");
    }
    if (opcode == Opcode::kInit) return g::kInit;
    return info.qubit_operands == 2 ? g::kTwoQubitGate : g::kSingleQubitGate;
  }
  if (!nv_op) {
    throw Error(ErrorCode::kWrongFlavor,
                std::string(info.mnemonic) + " (vanilla) on an NV unit module");
  }
  if (info.qubit_operands == 2) return g::kEcControlledDirXy;
  const bool comm = type(q.at(0)) == QubitType::kCommunication;
  if (opcode == Opcode::kNvInit) return comm ? g::kElectronInit : g::kCarbonInit;
  if (comm) return g::kElectronRot;
  return opcode == Opcode::kNvRotZ ? g::kCarbonZRot : g::kCarbonXyRot;
}

const GateParams& UnitModule::params(const std::string& gate) const {
  return noise.gate(gate);
}

nlohmann::json to_json(const NoiseParams& noise) {
  nlohmann::json j;
  for (const auto& [name, p] : noise.gates) {
    j["gates"][name] = {{"duration_ns", p.duration_ns}, {"fidelity", p.fidelity}};
  }
  j["prob_error_meas_0"] = noise.prob_error_meas_0;
  j["prob_error_meas_1"] = noise.prob_error_meas_1;
  if (!noise.decoherence_ns.empty()) j["decoherence_ns"] = noise.decoherence_ns;
  return j;
}

NoiseParams noise_from_json(const nlohmann::json& j) {
  try {
    NoiseParams p;
    for (const auto& [name, g] : j.at("gates").items()) {
      p.gates[name] = {g.at("duration_ns").get<double>(),
                       g.value("fidelity", 1.0)};
    }
    p.prob_error_meas_0 = j.value("prob_error_meas_0", 0.0);
    p.prob_error_meas_1 = j.value("prob_error_meas_1", 0.0);
    if (j.contains("decoherence_ns")) {
      p.decoherence_ns = j.at("decoherence_ns").get<std::map<std::string, double>>();
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("noise: ") + e.what());
  }
}

nlohmann::json to_json(const UnitModule& um) {
  nlohmann::json j;
  j["profile"] = std::string(to_string(um.profile));
  j["qubits"] = um.size();
  j["noise"] = to_json(um.noise);
  return j;
}

UnitModule unit_module_from_json(const nlohmann::json& j) {
  try {
    const auto profile = j.value("profile", std::string("generic"));
    const int n = j.at("qubits").get<int>();
    UnitModule um;
    if (profile == "nv") {
      NoiseParams noise;
      if (j.contains("noise")) {
        noise = noise_from_json(j.at("noise"));
      } else if (j.value("noiseless", false)) {
        noise = nv_noiseless();
      } else {
        noise = nv_noise({j.value("two_qubit_duration_ns", 500000.0),
                          j.value("two_qubit_fidelity", 1.0)});
      }
      noise.prob_error_meas_0 = j.value("prob_error_meas_0", noise.prob_error_meas_0);
      noise.prob_error_meas_1 = j.value("prob_error_meas_1", noise.prob_error_meas_1);
      um = UnitModule::nv(n, std::move(noise));
    } else if (profile == "generic") {
      um = UnitModule::generic(
          n, j.contains("noise") ? noise_from_json(j.at("noise")) : generic_noiseless());
    } else {
      throw Error(ErrorCode::kConfig, "unknown profile '" + profile + "'");
    }
    um.check();
    return um;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("unit module: ") + e.what());
  }
}

}  // namespace nqasm
