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

#include "nqasm/shmem.hpp"

#include <algorithm>
#include <string>

#include "nqasm/error.hpp"

namespace nqasm::shmem {

std::int32_t SharedMemory::reg_get(isa::RegisterRef ref) const {
  return registers_[static_cast<std::size_t>(ref.name)][ref.index];
}

void SharedMemory::reg_set(isa::RegisterRef ref, std::int32_t value) {
  registers_[static_cast<std::size_t>(ref.name)][ref.index] = value;
}

void SharedMemory::array_new(std::int32_t address, std::size_t length) {
  if (!arrays_.emplace(address, ArrayStore(length)).second) {
    throw Error(ErrorCode::kAddressInUse, "@" + std::to_string(address));
  }
}

bool SharedMemory::has_array(std::int32_t address) const {
  return arrays_.contains(address);
}

const ArrayStore& SharedMemory::array(std::int32_t address) const {
  const auto it = arrays_.find(address);
  if (it == arrays_.end()) {
    throw Error(ErrorCode::kNoSuchArray, "@" + std::to_string(address));
  }
  return it->second;
}

ArrayStore& SharedMemory::mutable_array(std::int32_t address) {
  return const_cast<ArrayStore&>(std::as_const(*this).array(address));
}

std::size_t SharedMemory::checked_index(const ArrayStore& store,
                                        std::int32_t address,
                                        std::int32_t index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= store.length()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "@" + std::to_string(address) + "[" + std::to_string(index) +
                    "] of length " + std::to_string(store.length()));
  }
  return static_cast<std::size_t>(index);
}

void SharedMemory::array_store(std::int32_t address, std::int32_t index,
                               std::int32_t value) {
  auto& store = mutable_array(address);
  store.entries_[checked_index(store, address, index)] = value;
}

std::int32_t SharedMemory::array_load(std::int32_t address,
                                      std::int32_t index) const {
  const Entry e = array_entry(address, index);
  if (!e) {
    throw Error(ErrorCode::kNullEntry, "@" + std::to_string(address) + "[" +
                                           std::to_string(index) + "] is null");
  }
  return *e;
}

void SharedMemory::array_undef(std::int32_t address, std::int32_t index) {
  auto& store = mutable_array(address);
  store.entries_[checked_index(store, address, index)].reset();
}

Entry SharedMemory::array_entry(std::int32_t address,
                                std::int32_t index) const {
  const auto& store = array(address);
  return store.entries_[checked_index(store, address, index)];
}

bool SharedMemory::entry_defined(std::int32_t address,
                                 std::int32_t index) const {
  return array_entry(address, index).has_value();
}

bool SharedMemory::slice_defined(const SliceBounds& slice,
                                 Quantifier quantifier) const {
  const auto& store = array(slice.address);
  if (slice.start < 0 || slice.start > slice.stop ||
      static_cast<std::size_t>(slice.stop) > store.length()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "@" + std::to_string(slice.address) + "[" +
                    std::to_string(slice.start) + ":" +
                    std::to_string(slice.stop) + "] of length " +
                    std::to_string(store.length()));
  }
  const auto first = store.entries_.begin() + slice.start;
  const auto last = store.entries_.begin() + slice.stop;
  auto defined = [](const Entry& e) { return e.has_value(); };
  return quantifier == Quantifier::kAll ? std::all_of(first, last, defined)
                                        : std::any_of(first, last, defined);
}

void SharedMemory::array_write_block(std::int32_t address, std::int32_t start,
                                     const std::vector<std::int32_t>& values) {
  auto& store = mutable_array(address);
  if (start < 0 || static_cast<std::size_t>(start) + values.size() > store.length()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "block of " + std::to_string(values.size()) + " at @" +
                    std::to_string(address) + "[" + std::to_string(start) + "]");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    store.entries_[static_cast<std::size_t>(start) + i] = values[i];
  }
}

std::optional<std::int32_t> AppView::reg(isa::RegisterRef ref) const {
  const auto it = registers_.find(ref);
  if (it == registers_.end()) return std::nullopt;
  return it->second;
}

const std::vector<Entry>* AppView::array(std::int32_t address) const {
  const auto it = arrays_.find(address);
  return it == arrays_.end() ? nullptr : &it->second;
}

AppView app_view_update(const AppView& previous, const SharedMemory& mem,
                        const std::set<isa::RegisterRef>& registers,
                        const std::set<std::int32_t>& arrays) {
  AppView next = previous;
  for (const auto& r : registers) next.registers_[r] = mem.reg_get(r);
  for (const auto a : arrays) next.arrays_[a] = mem.array(a).entries();
  return next;
}

}  // namespace nqasm::shmem
