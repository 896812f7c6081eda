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

#include "nqasm/error.hpp"

namespace nqasm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownOpcode: return "UnknownOpcode";
    case ErrorCode::kAngleOverflow: return "AngleOverflow";
    case ErrorCode::kMissingDirective: return "MissingDirective";
    case ErrorCode::kMalformedDirective: return "MalformedDirective";
    case ErrorCode::kUndefinedMacro: return "UndefinedMacro";
    case ErrorCode::kDirectiveOrder: return "DirectiveOrder";
    case ErrorCode::kUnknownMnemonic: return "UnknownMnemonic";
    case ErrorCode::kUnknownRegisterName: return "UnknownRegisterName";
    case ErrorCode::kRegisterIndexOutOfRange: return "RegisterIndexOutOfRange";
    case ErrorCode::kSignatureMismatch: return "SignatureMismatch";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kDuplicateLabel: return "DuplicateLabel";
    case ErrorCode::kUndefinedLabel: return "UndefinedLabel";
    case ErrorCode::kBranchOutOfRange: return "BranchOutOfRange";
    case ErrorCode::kNotLowered: return "NotLowered";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kTrailingBytes: return "TrailingBytes";
    case ErrorCode::kMalformedOperand: return "MalformedOperand";
    case ErrorCode::kWrongFlavor: return "WrongFlavor";
    case ErrorCode::kNotAGateBlock: return "NotAGateBlock";
    case ErrorCode::kMissingDurationEntry: return "MissingDurationEntry";
    case ErrorCode::kNoFreeStorage: return "NoFreeStorage";
    case ErrorCode::kUnsupportedProgram: return "UnsupportedProgram";
    case ErrorCode::kCompileFailed: return "CompileFailed";
    case ErrorCode::kAddressInUse: return "AddressInUse";
    case ErrorCode::kNoSuchArray: return "NoSuchArray";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNullEntry: return "NullEntry";
    case ErrorCode::kNotUnitary: return "NotUnitary";
    case ErrorCode::kNoSuchQubit: return "NoSuchQubit";
    case ErrorCode::kTooManyQubits: return "TooManyQubits";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kQubitNotAllocated: return "QubitNotAllocated";
    case ErrorCode::kQubitOutOfRange: return "QubitOutOfRange";
    case ErrorCode::kInvalidBranch: return "InvalidBranch";
    case ErrorCode::kBadModulus: return "BadModulus";
    case ErrorCode::kNoSuchSocket: return "NoSuchSocket";
    case ErrorCode::kBadQubitArray: return "BadQubitArray";
    case ErrorCode::kQubitBusy: return "QubitBusy";
    case ErrorCode::kNoSuchApp: return "NoSuchApp";
    case ErrorCode::kResources: return "Resources";
    case ErrorCode::kSocketInUse: return "SocketInUse";
    case ErrorCode::kNotCommunicationQubit: return "NotCommunicationQubit";
    case ErrorCode::kUnknownMessageType: return "UnknownMessageType";
    case ErrorCode::kProtocolOrder: return "ProtocolOrder";
    case ErrorCode::kPeerClosed: return "PeerClosed";
    case ErrorCode::kDeadlock: return "Deadlock";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           std::optional<std::int64_t> location) {
  std::string out(to_string(code));
  if (location) out += " at " + std::to_string(*location);
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::int64_t> location)
    : std::runtime_error(format_message(code, message, location)),
      code_(code),
      location_(location) {}

}  // namespace nqasm
