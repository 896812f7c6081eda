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


#include "nqasm/protocol.hpp"

#include "nqasm/codec.hpp"

namespace nqasm::protocol {

namespace {

constexpr std::size_t kFrameHeader = 9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void write_payload(ByteWriter& w, const Payload& p) {
  std::visit(
      Overloaded{
          [&](const RegisterApp& m) {
            w.i32(m.qubits);
            w.u32(static_cast<std::uint32_t>(m.sockets.size()));
            for (const auto& s : m.sockets) {
              w.i32(s.socket_id);
              w.i32(s.remote_node);
              w.i32(s.remote_socket);
              w.i32(s.min_fidelity);
            }
          },
          [&](const RegisterAppOk& m) { w.i32(m.app_id); },
          [&](const RegisterAppErr& m) { w.i32(static_cast<std::int32_t>(m.error_code)); },
          [&](const SubroutineMsg& m) {
            w.i32(m.app_id);
            w.bytes(m.subroutine);
          },
          [&](const Done&) {},
          [&](const MemoryUpdate& m) {
            w.i32(m.app_id);
            w.u32(static_cast<std::uint32_t>(m.view.registers().size()));
            for (const auto& [reg, v] : m.view.registers()) {
              w.u8(codec::encode_register(reg));
              w.i32(v);
            }
            w.u32(static_cast<std::uint32_t>(m.view.arrays().size()));
            for (const auto& [addr, entries] : m.view.arrays()) {
              w.i32(addr);
              w.u32(static_cast<std::uint32_t>(entries.size()));
              for (const auto& e : entries) {
                w.u8(e.has_value() ? 1 : 0);
                w.i32(e.value_or(0));
              }
            }
          },
          [&](const StopApp& m) { w.i32(m.app_id); },
      },
      p);
}

Payload read_payload(MessageType type, ByteReader& r) {
  switch (type) {
    case MessageType::kRegisterApp: {
      RegisterApp m;
      m.qubits = r.i32();
      const auto n = r.u32();
      if (n > r.remaining() / 16) throw Error(ErrorCode::kTruncated, "socket list");
      for (std::uint32_t i = 0; i < n; ++i) {
        qnpu::EprSocketBinding s;
        s.socket_id = r.i32();
        s.remote_node = r.i32();
        s.remote_socket = r.i32();
        s.min_fidelity = r.i32();
        m.sockets.push_back(s);
      }
      return m;
    }
    case MessageType::kRegisterAppOk: return RegisterAppOk{r.i32()};
    case MessageType::kRegisterAppErr: {
      const auto code = r.i32();
      if (code < 0 || code > static_cast<std::int32_t>(ErrorCode::kIo)) {
        throw Error(ErrorCode::kMalformedOperand, "unknown error code " + std::to_string(code));
      }
      return RegisterAppErr{static_cast<ErrorCode>(code)};
    }
    case MessageType::kSubroutine: {
      SubroutineMsg m;
      m.app_id = r.i32();
      const auto rest = r.bytes(r.remaining());
      m.subroutine.assign(rest.begin(), rest.end());
      return m;
    }
    case MessageType::kDone: return Done{};
    case MessageType::kMemoryUpdate: {
      MemoryUpdate m;
      m.app_id = r.i32();
      std::map<isa::RegisterRef, std::int32_t> regs;
      const auto nr = r.u32();
      for (std::uint32_t i = 0; i < nr; ++i) {
        const auto reg = codec::decode_register(r.u8());
        regs[reg] = r.i32();
      }
      std::map<std::int32_t, std::vector<shmem::Entry>> arrays;
      const auto na = r.u32();
      for (std::uint32_t i = 0; i < na; ++i) {
        const auto addr = r.i32();
        const auto len = r.u32();
        if (len > r.remaining() / 5) throw Error(ErrorCode::kTruncated, "array entries");
        std::vector<shmem::Entry> entries;
        for (std::uint32_t k = 0; k < len; ++k) {
          const bool defined = r.u8() != 0;
          const auto v = r.i32();
          entries.push_back(defined ? shmem::Entry{v} : std::nullopt);
        }
        arrays[addr] = std::move(entries);
      }
      m.view = shmem::AppView(std::move(regs), std::move(arrays));
      return m;
    }
    case MessageType::kStopApp: return StopApp{r.i32()};
  }
  throw Error(ErrorCode::kUnknownMessageType, "message type");
}

}  // namespace

std::string_view to_string(MessageType type) {
  switch (type) {
    case MessageType::kRegisterApp: return "RegisterApp";
    case MessageType::kRegisterAppOk: return "RegisterAppOK";
    case MessageType::kRegisterAppErr: return "RegisterAppErr";
    case MessageType::kSubroutine: return "Subroutine";
    case MessageType::kDone: return "Done";
    case MessageType::kMemoryUpdate: return "MemoryUpdate";
    case MessageType::kStopApp: return "StopApp";
  }
  return "?";
}

MessageType type_of(const Message& message) {
  return static_cast<MessageType>(message.payload.index() + 1);
}

Bytes encode_message(const Message& message) {
  ByteWriter body;
  write_payload(body, message.payload);
  const Bytes payload = body.take();
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(type_of(message)));
  w.i32(message.message_id);
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.bytes(payload);
  return w.take();
}

Message decode_message(std::span<const std::uint8_t> frame) {
  if (frame.empty()) throw Error(ErrorCode::kTruncated, "empty frame", 0);
  const std::uint8_t t = frame[0];
  if (t < 0x01 || t > 0x07) {
    throw Error(ErrorCode::kUnknownMessageType, "message type " + std::to_string(t), 0);
  }
  ByteReader header(frame);
  header.u8();
  Message m;
  m.message_id = header.i32();
  const auto length = header.u32();
  if (frame.size() - kFrameHeader != length) {
    throw Error(ErrorCode::kTruncated,
                "payload length " + std::to_string(length) + " but " +
                    std::to_string(frame.size() - kFrameHeader) + " bytes follow",
                static_cast<std::int64_t>(kFrameHeader));
  }
  ByteReader body(frame.subspan(kFrameHeader));
  m.payload = read_payload(static_cast<MessageType>(t), body);
  if (body.remaining() != 0) {
    throw Error(ErrorCode::kTruncated, "payload longer than its message", 
                static_cast<std::int64_t>(kFrameHeader + body.offset()));
  }
  return m;
}

}  // namespace nqasm::protocol
