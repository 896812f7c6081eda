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

// Gate durations and noise parameters, keyed by the gate names of the NV
// model (electron_init, carbon_xy_rot, ec_controlled_dir_xy, ...).

#ifndef NQASM_PARAMS_HPP_
#define NQASM_PARAMS_HPP_

#include <map>
#include <string>

namespace nqasm {

struct GateParams {
  double duration_ns = 0.0;
  double fidelity = 1.0;
  friend bool operator==(const GateParams&, const GateParams&) = default;
};

namespace gate_names {
inline constexpr const char* kElectronInit = "electron_init";
inline constexpr const char* kElectronRot = "electron_rot";
inline constexpr const char* kMeasure = "measure";
inline constexpr const char* kCarbonInit = "carbon_init";
inline constexpr const char* kCarbonXyRot = "carbon_xy_rot";
inline constexpr const char* kCarbonZRot = "carbon_z_rot";
inline constexpr const char* kEcControlledDirXy = "ec_controlled_dir_xy";
// Generic (non-NV) profiles.
inline constexpr const char* kInit = "init";
inline constexpr const char* kSingleQubitGate = "single_qubit_gate";
inline constexpr const char* kTwoQubitGate = "two_qubit_gate";
}  // namespace gate_names

struct NoiseParams {
  std::map<std::string, GateParams> gates;
  double prob_error_meas_0 = 0.0;
  double prob_error_meas_1 = 0.0;
  // Recorded but not applied: electron_T1, electron_T2, carbon_T1, carbon_T2
  // in nanoseconds.
  std::map<std::string, double> decoherence_ns;

  // Throws kMissingDurationEntry.
  const GateParams& gate(const std::string& name) const;

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

// The NV table values. `two_qubit` is the swept (t, f) pair used for both
// ec_controlled_dir_xy and carbon_xy_rot.
NoiseParams nv_noise(GateParams two_qubit = {500000.0, 1.0});

// Same durations, every fidelity 1 and no measurement flips.
NoiseParams nv_noiseless();

NoiseParams generic_noiseless();

}  // namespace nqasm

#endif  // NQASM_PARAMS_HPP_
