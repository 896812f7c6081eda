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

#include "nqasm/params.hpp"

#include "nqasm/error.hpp"

namespace nqasm {

const GateParams& NoiseParams::gate(const std::string& name) const {
  const auto it = gates.find(name);
  if (it == gates.end()) {
    throw Error(ErrorCode::kMissingDurationEntry, "no entry for gate " + name);
  }
  return it->second;
}

NoiseParams nv_noise(GateParams two_qubit) {
  namespace g = gate_names;
  NoiseParams p;
  p.gates[g::kElectronInit] = {2e3, 0.99};
  p.gates[g::kElectronRot] = {5, 1.0};
  p.gates[g::kMeasure] = {3.7e3, 1.0};
  p.gates[g::kCarbonInit] = {3.1e5, 0.997};
  p.gates[g::kCarbonXyRot] = two_qubit;
  p.gates[g::kCarbonZRot] = {5, 0.999};
  p.gates[g::kEcControlledDirXy] = two_qubit;
  p.prob_error_meas_0 = 0.05;
  p.prob_error_meas_1 = 0.005;
  constexpr double kSecond = 1e9;
  p.decoherence_ns = {{"electron_T1", 3600 * kSecond},
                      {"electron_T2", 1.46 * kSecond},
                      {"carbon_T1", 36000 * kSecond},
                      {"carbon_T2", 1 * kSecond}};
  return p;
}

NoiseParams nv_noiseless() {
  NoiseParams p = nv_noise();
  for (auto& [name, gate] : p.gates) gate.fidelity = 1.0;
  p.prob_error_meas_0 = 0.0;
  p.prob_error_meas_1 = 0.0;
  return p;
}

NoiseParams generic_noiseless() {
  namespace g = gate_names;
  NoiseParams p;
  p.gates[g::kInit] = {1e3, 1.0};
  p.gates[g::kSingleQubitGate] = {5, 1.0};
  p.gates[g::kTwoQubitGate] = {5e3, 1.0};
  p.gates[g::kMeasure] = {3.7e3, 1.0};
  return p;
}

}  // namespace nqasm
