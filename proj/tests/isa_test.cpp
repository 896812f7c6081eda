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

#include "nqasm/isa.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "nqasm/error.hpp"

namespace nqasm::isa {
namespace {

using K = OperandKind;

TEST(IsaTest, SignaturesOfRepresentativeOpcodes) {
  const auto add = signature(Opcode::kAdd);
  EXPECT_EQ(std::vector<K>(add.begin(), add.end()),
            (std::vector<K>{K::kRegister, K::kRegister, K::kRegister}));
  const auto epr = signature(Opcode::kCreateEpr);
  EXPECT_EQ(std::vector<K>(epr.begin(), epr.end()),
            std::vector<K>(5, K::kRegister));
  const auto jmp = signature(Opcode::kJmp);
  EXPECT_EQ(std::vector<K>(jmp.begin(), jmp.end()), std::vector<K>{K::kImmediate});
  const auto recv = signature(Opcode::kRecvEpr);
  EXPECT_EQ(recv.size(), 4u);
  const auto wait = signature(Opcode::kWaitAll);
  EXPECT_EQ(std::vector<K>(wait.begin(), wait.end()), std::vector<K>{K::kArraySlice});
}

TEST(IsaTest, UnknownOpcodeId) {
  EXPECT_EQ(Registry::instance().find(std::uint8_t{0x00}), nullptr);
  try {
    opcode_from_id(0x7F);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownOpcode);
  }
}

TEST(IsaTest, IdRangesPartitionFlavors) {
  std::set<int> ids;
  for (const auto& meta : Registry::instance().all()) {
    const int id = static_cast<int>(meta.opcode);
    EXPECT_TRUE(ids.insert(id).second) << meta.mnemonic;
    Flavor by_range = id < 0x30 ? Flavor::kCore
                      : id < 0x60 ? Flavor::kVanilla
                                  : Flavor::kNv;
    EXPECT_LT(id, 0x80);
    EXPECT_EQ(flavor_of(meta.opcode), by_range) << meta.mnemonic;
  }
}

TEST(IsaTest, FlavorMembership) {
  EXPECT_EQ(flavor_of(Opcode::kMeas), Flavor::kCore);
  EXPECT_EQ(flavor_of(Opcode::kCphase), Flavor::kVanilla);
  EXPECT_EQ(flavor_of(Opcode::kCxDir), Flavor::kNv);
  std::set<std::string_view> vanilla, nv;
  for (const auto& meta : Registry::instance().all()) {
    if (meta.flavor == Flavor::kVanilla) vanilla.insert(meta.mnemonic);
    if (meta.flavor == Flavor::kNv) nv.insert(meta.mnemonic);
  }
  EXPECT_EQ(vanilla, (std::set<std::string_view>{"init", "x", "y", "z", "h", "s",
                                                  "k", "t", "rot_x", "rot_y",
                                                  "rot_z", "cnot", "cphase"}));
  EXPECT_EQ(nv, (std::set<std::string_view>{"init", "rot_x", "rot_y", "rot_z",
                                             "cx_dir", "cy_dir"}));
}

TEST(IsaTest, SharedMnemonicsResolveByFlavor) {
  const auto& reg = Registry::instance();
  EXPECT_EQ(reg.find("rot_x", Flavor::kVanilla)->opcode, Opcode::kRotX);
  EXPECT_EQ(reg.find("rot_x", Flavor::kNv)->opcode, Opcode::kNvRotX);
  EXPECT_EQ(reg.find("cx_dir", Flavor::kVanilla)->opcode, Opcode::kCxDir);
  EXPECT_EQ(reg.find("h", Flavor::kNv)->opcode, Opcode::kH);
  EXPECT_EQ(reg.find("nope"), nullptr);
}

TEST(IsaTest, AngleValue) {
  EXPECT_DOUBLE_EQ(angle_value({1, 1}), std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(angle_value({0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(angle_value({-1, 1}), -std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(angle_value({3, 30}), 3 * std::numbers::pi / (1 << 30));
  try {
    angle_value({1, 31});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAngleOverflow);
  }
}

TEST(IsaTest, AngleDoublingIsExact) {
  for (std::int32_t n = -50; n <= 50; ++n) {
    for (std::uint32_t d = 0; d < 30; ++d) {
      if (std::abs(static_cast<std::int64_t>(n) * 2) > INT32_MAX) continue;
      EXPECT_TRUE(same_angle({n, d}, {2 * n, d + 1}));
    }
  }
  EXPECT_FALSE(same_angle({1, 1}, {1, 2}));
  EXPECT_EQ(reduce({4, 3}), (AngleSpec{1, 1}));
  EXPECT_EQ(reduce({0, 7}), (AngleSpec{0, 0}));
}

TEST(IsaTest, CheckSubroutineRejectsBadBranch) {
  Subroutine sub;
  sub.instructions.push_back({Opcode::kJmp, {Immediate{2}}});
  try {
    check_subroutine(sub);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBranchOutOfRange);
  }
  sub.instructions[0].operands[0] = Immediate{1};
  EXPECT_NO_THROW(check_subroutine(sub));
}

TEST(IsaTest, CheckSubroutineRejectsMixedFlavors) {
  Subroutine sub;
  const auto q = make_register('Q', 0);
  sub.instructions.push_back({Opcode::kH, {q}});
  sub.instructions.push_back({Opcode::kNvRotX, {q, Immediate{1}, Immediate{1}}});
  try {
    check_subroutine(sub);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongFlavor);
  }
}

TEST(IsaTest, RegisterConstruction) {
  EXPECT_EQ(to_string(make_register('M', 3)), "M3");
  EXPECT_THROW(make_register('X', 5), Error);
  EXPECT_THROW(make_register('R', 16), Error);
}

TEST(IsaTest, TableMentionsEveryMnemonic) {
  const std::string table = isa_table();
  for (const auto& meta : Registry::instance().all()) {
    EXPECT_NE(table.find(std::string(meta.mnemonic)), std::string::npos);
  }
}

}  // namespace
}  // namespace nqasm::isa
