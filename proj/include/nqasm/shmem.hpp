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

// Per-application classical memory of the QNPU: a register file plus
// fixed-length arrays of nullable int32 entries, and the read-only copy the
// application layer sees.

#ifndef NQASM_SHMEM_HPP_
#define NQASM_SHMEM_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "nqasm/isa.hpp"

namespace nqasm::shmem {

using Entry = std::optional<std::int32_t>;

class ArrayStore {
 public:
  explicit ArrayStore(std::size_t length) : entries_(length) {}

  std::size_t length() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  friend class SharedMemory;
  std::vector<Entry> entries_;
};

enum class Quantifier { kAll, kAny };

struct SliceBounds {
  std::int32_t address = 0;
  std::int32_t start = 0;
  std::int32_t stop = 0;
};

class SharedMemory {
 public:
  // Registers start at 0.
  std::int32_t reg_get(isa::RegisterRef ref) const;
  void reg_set(isa::RegisterRef ref, std::int32_t value);

  // Throws kAddressInUse.
  void array_new(std::int32_t address, std::size_t length);
  // Throws kNoSuchArray, kIndexOutOfRange.
  void array_store(std::int32_t address, std::int32_t index, std::int32_t value);
  // Also throws kNullEntry.
  std::int32_t array_load(std::int32_t address, std::int32_t index) const;
  void array_undef(std::int32_t address, std::int32_t index);
  Entry array_entry(std::int32_t address, std::int32_t index) const;

  bool entry_defined(std::int32_t address, std::int32_t index) const;
  // Empty slices: kAll -> true, kAny -> false. Throws kIndexOutOfRange when
  // start > stop or stop > length.
  bool slice_defined(const SliceBounds& slice, Quantifier quantifier) const;

  // Writes a contiguous run of entries in one step, so no observer can see a
  // partially written run.
  void array_write_block(std::int32_t address, std::int32_t start,
                         const std::vector<std::int32_t>& values);

  bool has_array(std::int32_t address) const;
  const ArrayStore& array(std::int32_t address) const;
  const std::map<std::int32_t, ArrayStore>& arrays() const { return arrays_; }

 private:
  ArrayStore& mutable_array(std::int32_t address);
  std::size_t checked_index(const ArrayStore& store, std::int32_t address,
                            std::int32_t index) const;

  std::array<std::array<std::int32_t, isa::kRegistersPerName>,
             isa::kRegisterNames>
      registers_{};
  std::map<std::int32_t, ArrayStore> arrays_;
};

// Read-only snapshot of the registers and arrays an application asked for via
// ret_reg / ret_arr. There is no way to write through a view; a new view is
// produced at each update point.
class AppView {
 public:
  AppView() = default;
  // Rebuilds a snapshot received over the protocol.
  AppView(std::map<isa::RegisterRef, std::int32_t> registers,
          std::map<std::int32_t, std::vector<Entry>> arrays)
      : registers_(std::move(registers)), arrays_(std::move(arrays)) {}

  std::optional<std::int32_t> reg(isa::RegisterRef ref) const;
  const std::vector<Entry>* array(std::int32_t address) const;

  const std::map<isa::RegisterRef, std::int32_t>& registers() const {
    return registers_;
  }
  const std::map<std::int32_t, std::vector<Entry>>& arrays() const {
    return arrays_;
  }

  friend bool operator==(const AppView&, const AppView&) = default;

 private:
  friend AppView app_view_update(const AppView&, const SharedMemory&,
                                 const std::set<isa::RegisterRef>&,
                                 const std::set<std::int32_t>&);
  std::map<isa::RegisterRef, std::int32_t> registers_;
  std::map<std::int32_t, std::vector<Entry>> arrays_;
};

// New snapshot: the listed items take their current values, everything else
// is carried over from `previous`.
AppView app_view_update(const AppView& previous, const SharedMemory& mem,
                        const std::set<isa::RegisterRef>& registers,
                        const std::set<std::int32_t>& arrays);

}  // namespace nqasm::shmem

#endif  // NQASM_SHMEM_HPP_
