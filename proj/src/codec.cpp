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

#include "nqasm/codec.hpp"

#include <algorithm>

#include "nqasm/error.hpp"

namespace nqasm::codec {

using isa::OperandKind;
using isa::RegisterRef;

std::uint8_t encode_register(RegisterRef reg) {
  return static_cast<std::uint8_t>((static_cast<int>(reg.name) << 4) |
                                   (reg.index & 0x0F));
}

RegisterRef decode_register(std::uint8_t byte) {
  const int name = byte >> 4;
  if (name >= isa::kRegisterNames) {
    throw Error(ErrorCode::kMalformedOperand,
                "register name nibble " + std::to_string(name));
  }
  return RegisterRef{static_cast<isa::RegName>(name),
                     static_cast<std::uint8_t>(byte & 0x0F)};
}

namespace {

std::size_t operand_width(OperandKind kind) {
  switch (kind) {
    case OperandKind::kRegister: return 1;
    case OperandKind::kImmediate:
    case OperandKind::kAddress: return 4;
    case OperandKind::kArrayEntry: return 5;
    case OperandKind::kArraySlice: return 6;
  }
  return 0;
}

RegisterRef index_register(const isa::IndexOperand& idx) {
  const auto* reg = std::get_if<RegisterRef>(&idx);
  if (reg == nullptr) {
    throw Error(ErrorCode::kNotLowered, "immediate array index");
  }
  return *reg;
}

RegisterRef read_register(ByteReader& in) {
  const auto at = static_cast<std::int64_t>(in.offset());
  try {
    return decode_register(in.u8());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedOperand) {
      throw Error(e.code(), "bad register byte", at);
    }
    throw;
  }
}

}  // namespace

std::size_t encoded_size(isa::Opcode opcode) {
  std::size_t size = 1;
  for (const auto kind : isa::signature(opcode)) size += operand_width(kind);
  return size;
}

Bytes encode(const isa::Subroutine& sub) {
  ByteWriter out;
  for (const auto b : kMagic) out.u8(b);
  out.u8(sub.version.major);
  out.u8(sub.version.minor);
  out.i32(sub.app_id);
  out.u32(static_cast<std::uint32_t>(sub.instructions.size()));

  for (std::size_t i = 0; i < sub.instructions.size(); ++i) {
    const auto& instr = sub.instructions[i];
    if (!isa::is_binary_ready(instr)) {
      throw Error(ErrorCode::kNotLowered,
                  std::string(isa::mnemonic(instr.opcode)) +
                      " has operands that are not in binary form",
                  static_cast<std::int64_t>(i));
    }
    out.u8(static_cast<std::uint8_t>(instr.opcode));
    for (const auto& op : instr.operands) {
      switch (isa::kind_of(op)) {
        case OperandKind::kRegister:
          out.u8(encode_register(std::get<RegisterRef>(op)));
          break;
        case OperandKind::kImmediate:
          out.i32(std::get<isa::Immediate>(op).value);
          break;
        case OperandKind::kAddress:
          out.i32(std::get<isa::Address>(op).id);
          break;
        case OperandKind::kArrayEntry: {
          const auto& e = std::get<isa::ArrayEntry>(op);
          out.i32(e.address.id);
          out.u8(encode_register(index_register(e.index)));
          break;
        }
        case OperandKind::kArraySlice: {
          const auto& s = std::get<isa::ArraySlice>(op);
          out.i32(s.address.id);
          out.u8(encode_register(index_register(s.start)));
          out.u8(encode_register(index_register(s.stop)));
          break;
        }
      }
    }
  }
  return out.take();
}

isa::Subroutine decode(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  const auto magic = in.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw Error(ErrorCode::kBadMagic, "expected NQSM", 0);
  }
  isa::Subroutine sub;
  sub.version.major = in.u8();
  sub.version.minor = in.u8();
  if (sub.version.major != kSupportedMajor) {
    throw Error(ErrorCode::kBadVersion,
                "major version " + std::to_string(sub.version.major), 4);
  }
  sub.app_id = in.i32();
  const std::uint32_t count = in.u32();

  const auto& registry = isa::Registry::instance();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto at = static_cast<std::int64_t>(in.offset());
    const isa::OpcodeInfo* meta = registry.find(in.u8());
    if (meta == nullptr) {
      throw Error(ErrorCode::kUnknownOpcode, "unknown opcode byte", at);
    }
    isa::Instruction instr{meta->opcode, {}};
    for (const auto kind : meta->signature) {
      switch (kind) {
        case OperandKind::kRegister:
          instr.operands.emplace_back(read_register(in));
          break;
        case OperandKind::kImmediate:
          instr.operands.emplace_back(isa::Immediate{in.i32()});
          break;
        case OperandKind::kAddress:
          instr.operands.emplace_back(isa::Address{in.i32()});
          break;
        case OperandKind::kArrayEntry: {
          const isa::Address address{in.i32()};
          instr.operands.emplace_back(
              isa::ArrayEntry{address, read_register(in)});
          break;
        }
        case OperandKind::kArraySlice: {
          const isa::Address address{in.i32()};
          const RegisterRef start = read_register(in);
          const RegisterRef stop = read_register(in);
          instr.operands.emplace_back(isa::ArraySlice{address, start, stop});
          break;
        }
      }
    }
    sub.instructions.push_back(std::move(instr));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kTrailingBytes,
                std::to_string(in.remaining()) + " bytes after the last instruction",
                static_cast<std::int64_t>(in.offset()));
  }
  isa::check_subroutine(sub);
  return sub;
}

}  // namespace nqasm::codec
