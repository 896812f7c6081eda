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


// Messages between the application layer and the QNPU.
//
//   frame: type u8 | message_id i32 | payload length u32 | payload
//
// Payloads (all integers little-endian):
//   RegisterApp     qubits i32, socket count u32, per socket
//                   (socket_id, remote_node, remote_socket, min_fidelity) i32
//   RegisterAppOK   app_id i32
//   RegisterAppErr  error_code i32
//   Subroutine      app_id i32, subroutine bytes (rest of the payload)
//   Done            empty; message_id names the subroutine
//   MemoryUpdate    app_id i32, register count u32, per register (byte,
//                   value i32), array count u32, per array (address i32,
//                   length u32, per entry defined u8 + value i32)
//   StopApp         app_id i32

#ifndef NQASM_PROTOCOL_HPP_
#define NQASM_PROTOCOL_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "nqasm/bytes.hpp"
#include "nqasm/error.hpp"
#include "nqasm/qnpu.hpp"
#include "nqasm/shmem.hpp"

namespace nqasm::protocol {

enum class MessageType : std::uint8_t {
  kRegisterApp = 0x01,
  kRegisterAppOk = 0x02,
  kRegisterAppErr = 0x03,
  kSubroutine = 0x04,
  kDone = 0x05,
  kMemoryUpdate = 0x06,
  kStopApp = 0x07,
};

std::string_view to_string(MessageType type);

struct RegisterApp {
  std::int32_t qubits = 1;
  std::vector<qnpu::EprSocketBinding> sockets;
  friend bool operator==(const RegisterApp&, const RegisterApp&) = default;
};

struct RegisterAppOk {
  std::int32_t app_id = 0;
  friend bool operator==(const RegisterAppOk&, const RegisterAppOk&) = default;
};

struct RegisterAppErr {
  ErrorCode error_code = ErrorCode::kResources;
  friend bool operator==(const RegisterAppErr&, const RegisterAppErr&) = default;
};

struct SubroutineMsg {
  std::int32_t app_id = 0;
  Bytes subroutine;
  friend bool operator==(const SubroutineMsg&, const SubroutineMsg&) = default;
};

struct Done {
  friend bool operator==(const Done&, const Done&) = default;
};

struct MemoryUpdate {
  std::int32_t app_id = 0;
  shmem::AppView view;
  friend bool operator==(const MemoryUpdate&, const MemoryUpdate&) = default;
};

struct StopApp {
  std::int32_t app_id = 0;
  friend bool operator==(const StopApp&, const StopApp&) = default;
};

using Payload = std::variant<RegisterApp, RegisterAppOk, RegisterAppErr, SubroutineMsg,
                             Done, MemoryUpdate, StopApp>;

struct Message {
  std::int32_t message_id = 0;
  Payload payload;
  friend bool operator==(const Message&, const Message&) = default;
};

MessageType type_of(const Message& message);

Bytes encode_message(const Message& message);
// Throws kUnknownMessageType, kTruncated (length field disagrees with the
// bytes present) and kMalformedOperand.
Message decode_message(std::span<const std::uint8_t> frame);

}  // namespace nqasm::protocol

#endif  // NQASM_PROTOCOL_HPP_
