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

// Text form of NetQASM: preprocessing (# directives and $macros), parsing into
// a symbolic subroutine with branch labels, label resolution with set-lowering,
// and the canonical printer used as the disassembler.

#ifndef NQASM_ASSEMBLER_HPP_
#define NQASM_ASSEMBLER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nqasm/diagnostic.hpp"
#include "nqasm/isa.hpp"

namespace nqasm::assembler {

struct SourceMetadata {
  isa::Version version;
  std::int32_t app_id = 0;
  // In definition order.
  std::vector<std::pair<std::string, std::string>> defines;
  // Set by the optional "# FLAVOR" directive. Decides which flavor a
  // mnemonic shared by several flavors (init, rot_x, ...) refers to.
  isa::Flavor flavor = isa::Flavor::kVanilla;
};

struct SourceLine {
  int line = 0;  // 1-based line in the original source
  std::string text;
};

struct Preprocessed {
  SourceMetadata metadata;
  std::vector<SourceLine> body;

  std::string body_text() const;
};

// Consumes directives, strips // comments and blank lines and expands $key
// macros. Throws kMissingDirective, kMalformedDirective, kUndefinedMacro and
// kDirectiveOrder.
Preprocessed preprocess(std::string_view source);

struct LabelRef {
  std::string name;
  friend bool operator==(const LabelRef&, const LabelRef&) = default;
};

using SymbolicOperand = std::variant<isa::Operand, LabelRef>;

struct SymbolicInstruction {
  isa::Opcode opcode;
  std::vector<SymbolicOperand> operands;
  int line = 0;
};

struct SymbolicSubroutine {
  SourceMetadata metadata;
  std::vector<SymbolicInstruction> instructions;
  // Label -> index of the instruction it precedes (== size() for a trailing
  // label).
  std::map<std::string, std::size_t> labels;
};

SymbolicSubroutine parse(const Preprocessed& source);

// Reserved scratch registers, in allocation order, used when lowering
// immediates and addresses written where a register is required.
inline constexpr int kFirstScratchIndex = 15;
inline constexpr int kScratchCount = 5;

struct ResolveOptions {
  // When false only branch labels are replaced; immediates in register slots
  // are kept in their text form.
  bool lower_operands = true;
};

struct ResolveReport {
  int set_insertions = 0;
  int lea_insertions = 0;
  std::vector<Diagnostic> warnings;
};

// Throws kUndefinedLabel and kBranchOutOfRange.
isa::Subroutine resolve(const SymbolicSubroutine& sym,
                        const ResolveOptions& options = {},
                        ResolveReport* report = nullptr);

// Re-resolves an already resolved subroutine; numeric branch targets are
// remapped across any inserted instructions.
isa::Subroutine resolve(const isa::Subroutine& sub,
                        const ResolveOptions& options = {},
                        ResolveReport* report = nullptr);

SymbolicSubroutine to_symbolic(const isa::Subroutine& sub);

// Canonical text: directives, then one instruction per line, single spaces.
std::string print(const isa::Subroutine& sub);

// preprocess + parse + resolve.
isa::Subroutine assemble(std::string_view source,
                         const ResolveOptions& options = {},
                         ResolveReport* report = nullptr);

}  // namespace nqasm::assembler

#endif  // NQASM_ASSEMBLER_HPP_
