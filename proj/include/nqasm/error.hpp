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

#ifndef NQASM_ERROR_HPP_
#define NQASM_ERROR_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nqasm {

// Every failure raised by the library carries one of these codes. The names
// are stable and are what the CLI prints as the diagnostic code.
enum class ErrorCode {
  // isa
  kUnknownOpcode,
  kAngleOverflow,
  // text front end
  kMissingDirective,
  kMalformedDirective,
  kUndefinedMacro,
  kDirectiveOrder,
  kUnknownMnemonic,
  kUnknownRegisterName,
  kRegisterIndexOutOfRange,
  kSignatureMismatch,
  kSyntaxError,
  kDuplicateLabel,
  kUndefinedLabel,
  kBranchOutOfRange,
  // binary codec
  kNotLowered,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kTrailingBytes,
  kMalformedOperand,
  // compiler
  kWrongFlavor,
  kNotAGateBlock,
  kMissingDurationEntry,
  kNoFreeStorage,
  kUnsupportedProgram,
  kCompileFailed,
  // shared memory
  kAddressInUse,
  kNoSuchArray,
  kIndexOutOfRange,
  kNullEntry,
  // quantum backend
  kNotUnitary,
  kNoSuchQubit,
  kTooManyQubits,
  kDimensionMismatch,
  // qnpu
  kQubitNotAllocated,
  kQubitOutOfRange,
  kInvalidBranch,
  kBadModulus,
  kNoSuchSocket,
  kBadQubitArray,
  kQubitBusy,
  kNoSuchApp,
  kResources,
  kSocketInUse,
  kNotCommunicationQubit,
  // host and protocol
  kUnknownMessageType,
  kProtocolOrder,
  kPeerClosed,
  kDeadlock,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::int64_t> location = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // Source line (text front end) or byte offset (codecs), when known.
  std::optional<std::int64_t> location() const noexcept { return location_; }

 private:
  ErrorCode code_;
  std::optional<std::int64_t> location_;
};

}  // namespace nqasm

#endif  // NQASM_ERROR_HPP_
