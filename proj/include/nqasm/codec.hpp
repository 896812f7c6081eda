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

// Binary (.nqbin) form of a subroutine.
//
//   header:  "NQSM" | major u8 | minor u8 | app_id i32 | count u32
//   body:    per instruction, opcode u8 followed by its operands
//
//   REGISTER     1 byte, name in the high nibble (C=0 R=1 Q=2 M=3), index low
//   IMMEDIATE    i32
//   ADDRESS      i32
//   ARRAY_ENTRY  i32 address, register byte
//   ARRAY_SLICE  i32 address, start register byte, stop register byte
//
// All multi-byte fields are little-endian.

#ifndef NQASM_CODEC_HPP_
#define NQASM_CODEC_HPP_

#include <cstdint>
#include <span>

#include "nqasm/bytes.hpp"
#include "nqasm/isa.hpp"

namespace nqasm::codec {

inline constexpr std::uint8_t kMagic[4] = {'N', 'Q', 'S', 'M'};
inline constexpr std::size_t kHeaderSize = 14;
inline constexpr std::uint8_t kSupportedMajor = 1;

std::uint8_t encode_register(isa::RegisterRef reg);
// Throws kMalformedOperand for name nibbles above 3.
isa::RegisterRef decode_register(std::uint8_t byte);

// Size in bytes of one encoded instruction with this opcode.
std::size_t encoded_size(isa::Opcode opcode);

// Throws kNotLowered when an instruction still carries text-form operands.
Bytes encode(const isa::Subroutine& sub);

// Throws kBadMagic, kBadVersion, kUnknownOpcode, kTruncated, kTrailingBytes
// and kMalformedOperand; error locations are byte offsets.
isa::Subroutine decode(std::span<const std::uint8_t> bytes);

}  // namespace nqasm::codec

#endif  // NQASM_CODEC_HPP_
