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

#ifndef NQASM_DIAGNOSTIC_HPP_
#define NQASM_DIAGNOSTIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace nqasm {

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  // Index of the offending instruction, or -1 for whole-program findings.
  std::int64_t instruction = -1;
  std::string code;
  std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::kError) return true;
  }
  return false;
}

std::string to_string(const Diagnostic& diagnostic);

}  // namespace nqasm

#endif  // NQASM_DIAGNOSTIC_HPP_
