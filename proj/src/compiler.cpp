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

#include "nqasm/compiler.hpp"

#include <algorithm>
#include <string>

#include "nqasm/dataflow.hpp"
#include "nqasm/error.hpp"

namespace nqasm::compiler {

using isa::Address;
using isa::ArrayEntry;
using isa::Immediate;
using isa::Instruction;
using isa::Opcode;
using isa::Operand;
using isa::RegisterRef;
using isa::Subroutine;

namespace {

const RegisterRef kScratchA = isa::make_register('C', 15);
const RegisterRef kScratchB = isa::make_register('C', 14);

Instruction rot(Opcode op, RegisterRef q, std::int32_t n, std::int32_t d) {
  return {op, {q, Immediate{n}, Immediate{d}}};
}

Instruction unary(Opcode op, RegisterRef q) { return {op, {q}}; }

bool is_branch(const Instruction& in) { return isa::info(in).branch_target >= 0; }

std::int32_t target_of(const Instruction& in) {
  return std::get<Immediate>(in.operands.at(isa::info(in).branch_target)).value;
}

void set_target(Instruction& in, std::int32_t t) {
  in.operands.at(isa::info(in).branch_target) = Immediate{t};
}

std::set<std::size_t> branch_targets(const Subroutine& sub) {
  std::set<std::size_t> out;
  for (const auto& in : sub.instructions) {
    if (is_branch(in)) out.insert(static_cast<std::size_t>(target_of(in)));
  }
  return out;
}

bool is_init(Opcode op) { return op == Opcode::kInit || op == Opcode::kNvInit; }

bool is_gate(Opcode op) {
  return isa::Registry::instance().info(op).group == isa::Group::kGate;
}

bool is_single_qubit_gate(Opcode op) {
  const auto& info = isa::Registry::instance().info(op);
  return info.group == isa::Group::kGate && info.qubit_operands == 1 && !is_init(op);
}

bool is_two_qubit_gate(Opcode op) {
  const auto& info = isa::Registry::instance().info(op);
  return info.group == isa::Group::kGate && info.qubit_operands == 2;
}

bool is_quantum(const Instruction& in) { return isa::info(in).qubit_operands > 0; }

std::optional<std::int32_t> const_of(const dataflow::Value& v) {
  if (v.kind == dataflow::Value::Kind::kConst) return v.value;
  return std::nullopt;
}

std::optional<int> qubit_const(const dataflow::Analysis& an, std::size_t i,
                               const Operand& op) {
  if (!an.state_before[i]) return std::nullopt;
  return const_of(dataflow::operand_value(*an.state_before[i], op));
}

isa::AngleSpec angle_of(const Instruction& in, std::size_t first) {
  return {std::get<Immediate>(in.operands.at(first)).value,
          static_cast<std::uint32_t>(std::get<Immediate>(in.operands.at(first + 1)).value)};
}

Opcode nv_rotation(isa::Axis axis) {
  switch (axis) {
    case isa::Axis::kX: return Opcode::kNvRotX;
    case isa::Axis::kY: return Opcode::kNvRotY;
    case isa::Axis::kZ: break;
  }
  return Opcode::kNvRotZ;
}

void for_each_register(const Instruction& in, const auto& fn) {
  auto idx = [&fn](const isa::IndexOperand& i) {
    if (const auto* r = std::get_if<RegisterRef>(&i)) fn(*r);
  };
  for (const auto& op : in.operands) {
    if (const auto* r = std::get_if<RegisterRef>(&op)) fn(*r);
    if (const auto* e = std::get_if<ArrayEntry>(&op)) idx(e->index);
    if (const auto* s = std::get_if<isa::ArraySlice>(&op)) {
      idx(s->start);
      idx(s->stop);
    }
  }
}

std::optional<std::int32_t> array_address(const Operand& op) {
  if (const auto* a = std::get_if<Address>(&op)) return a->id;
  if (const auto* e = std::get_if<ArrayEntry>(&op)) return e->address.id;
  if (const auto* s = std::get_if<isa::ArraySlice>(&op)) return s->address.id;
  return std::nullopt;
}

[[noreturn]] void unsupported(std::size_t i, const std::string& what) {
  throw Error(ErrorCode::kUnsupportedProgram,
              "instruction " + std::to_string(i) + ": " + what);
}

// Lowers one subroutine against (and updating) a placement.
class Lowerer {
 public:
  Lowerer(const UnitModule& um, const CompileOptions& options, Placement& placement,
          const Subroutine& src)
      : um_(um),
        options_(options),
        pl_(placement),
        src_(src),
        an_(dataflow::analyze(src)),
        targets_(branch_targets(src)),
        comm_(um.communication_qubit()) {
    if (um.profile != Profile::kNv || comm_ < 0) {
      throw Error(ErrorCode::kWrongFlavor, "placement needs an NV unit module");
    }
    if (um.size() > kMaxPositions) {
      throw Error(ErrorCode::kUnsupportedProgram,
                  "unit module larger than " + std::to_string(kMaxPositions));
    }
    if (pl_.occupant.size() != static_cast<std::size_t>(um.size())) {
      pl_.occupant.assign(static_cast<std::size_t>(um.size()), -1);
    }
    for (std::size_t i = 0; i < src.instructions.size(); ++i) {
      const auto& in = src.instructions[i];
      if (is_branch(in)) has_branches_ = true;
      for_each_register(in, [&](RegisterRef r) {
        const bool q = r.name == isa::RegName::kQ && r.index >= 16 - um.size();
        if (q || r == kScratchA || r == kScratchB) {
          unsupported(i, isa::to_string(r) + " is reserved by the NV compiler");
        }
      });
    }
    new_index_.assign(src.instructions.size() + 1, 0);
    for (int p = 0; p < um.size(); ++p) {
      out_.push_back({Opcode::kSet, {position_register(p), Immediate{p}}});
    }
  }

  const dataflow::Analysis& analysis() const { return an_; }
  const Placement& placement() const { return pl_; }
  int comm() const { return comm_; }
  int moves() const { return moves_; }

  std::optional<int> qubit(std::size_t i, std::size_t operand) const {
    return qubit_const(an_, i, src_.instructions[i].operands.at(operand));
  }

  void step(std::size_t i) {
    const auto& in = src_.instructions[i];
    if (!an_.state_before[i]) {
      new_index_[i] = out_.size();
      return;  // unreachable: dropped
    }
    if (targets_.contains(i) || is_branch(in)) flush_all();
    new_index_[i] = out_.size();
    const auto op = in.opcode;
    if (op == Opcode::kQalloc) {
      const int v = virtual_id(i, 0);
      if (pl_.position.contains(v)) unsupported(i, "qubit " + std::to_string(v) + " allocated twice");
      const int p = pl_.occupant[comm_] < 0 ? comm_ : free_storage(i);
      place(v, p);
      out_.push_back(unary(Opcode::kQalloc, position_register(p)));
    } else if (op == Opcode::kQfree) {
      const int v = placed(i, 0);
      pending_.erase(v);
      out_.push_back(unary(Opcode::kQfree, reg_of(v)));
      pl_.occupant[static_cast<std::size_t>(pl_.position[v])] = -1;
      pl_.position.erase(v);
    } else if (is_init(op)) {
      const int v = placed(i, 0);
      pending_.erase(v);
      out_.push_back(unary(Opcode::kNvInit, reg_of(v)));
    } else if (is_single_qubit_gate(op)) {
      const int v = placed(i, 0);
      Instruction g = in;
      g.operands[0] = reg_of(v);
      auto seq = isa::flavor_of(op) == isa::Flavor::kNv ? std::vector<Instruction>{g}
                                                        : nv_gate_sequence(g);
      if (options_.sink_rotations && pl_.position[v] != comm_) {
        auto& buf = pending_[v];
        buf.insert(buf.end(), seq.begin(), seq.end());
      } else {
        out_.insert(out_.end(), seq.begin(), seq.end());
      }
    } else if (is_two_qubit_gate(op)) {
      lower_two_qubit(i, in);
    } else if (op == Opcode::kMeas) {
      const int v = placed(i, 0);
      ensure_comm(i, v);
      out_.push_back({Opcode::kMeas, {reg_of(v), in.operands[1]}});
    } else if (op == Opcode::kCreateEpr || op == Opcode::kRecvEpr) {
      lower_epr(i, in);
    } else {
      if (is_branch(in)) copied_branches_.push_back(out_.size());
      out_.push_back(in);
      if (isa::info(in).group == isa::Group::kWait) pl_.pending_epr.clear();
    }
  }

  Subroutine finish() {
    new_index_.back() = out_.size();
    flush_all();
    for (const auto k : copied_branches_) {
      auto& in = out_[k];
      set_target(in, static_cast<std::int32_t>(new_index_.at(static_cast<std::size_t>(target_of(in)))));
    }
    Subroutine out{src_.version, src_.app_id, std::move(out_)};
    isa::check_subroutine(out);
    return out;
  }

 private:
  int virtual_id(std::size_t i, std::size_t operand) const {
    const auto v = qubit(i, operand);
    if (!v) unsupported(i, "qubit operand is not a compile-time constant");
    if (!um_.contains(*v)) {
      throw Error(ErrorCode::kQubitOutOfRange,
                  "instruction " + std::to_string(i) + ": qubit " + std::to_string(*v));
    }
    return *v;
  }

  int placed(std::size_t i, std::size_t operand) const {
    const int v = virtual_id(i, operand);
    if (!pl_.position.contains(v)) {
      throw Error(ErrorCode::kQubitNotAllocated,
                  "instruction " + std::to_string(i) + ": qubit " + std::to_string(v));
    }
    return v;
  }

  RegisterRef reg_of(int v) const { return position_register(pl_.position.at(v)); }

  void place(int v, int p) {
    pl_.position[v] = p;
    pl_.occupant[static_cast<std::size_t>(p)] = v;
  }

  void relocate(int v, int p) {
    pl_.occupant[static_cast<std::size_t>(pl_.position[v])] = -1;
    place(v, p);
  }

  int free_storage(std::size_t i) const {
    for (const auto& q : um_.qubits) {
      if (q.type == QubitType::kStorage && pl_.occupant[static_cast<std::size_t>(q.id)] < 0) {
        return q.id;
      }
    }
    throw Error(ErrorCode::kNoFreeStorage,
                "instruction " + std::to_string(i) + ": no free storage qubit");
  }

  void flush(int v) {
    const auto it = pending_.find(v);
    if (it == pending_.end()) return;
    for (auto g : it->second) {
      g.operands[0] = reg_of(v);
      out_.push_back(std::move(g));
    }
    pending_.erase(it);
  }

  void flush_all() {
    while (!pending_.empty()) flush(pending_.begin()->first);
  }

  void evict(std::size_t i, int w) {
    if (pl_.pending_epr.contains(w)) unsupported(i, "would move an EPR qubit before waiting on it");
    if (has_branches_) unsupported(i, "moves are not supported in subroutines with branches");
    const int s = free_storage(i);
    flush(w);
    const auto c = position_register(comm_);
    const auto st = position_register(s);
    out_.push_back(unary(Opcode::kQalloc, st));
    for (auto& g : move_sequence(c, st, true)) out_.push_back(std::move(g));
    out_.push_back(unary(Opcode::kQfree, c));
    relocate(w, s);
    ++moves_;
  }

  void ensure_comm(std::size_t i, int v) {
    if (pl_.position.at(v) == comm_) return;
    if (pl_.pending_epr.contains(v)) unsupported(i, "would move an EPR qubit before waiting on it");
    if (const int w = pl_.occupant[static_cast<std::size_t>(comm_)]; w >= 0) evict(i, w);
    if (has_branches_) unsupported(i, "moves are not supported in subroutines with branches");
    const auto c = position_register(comm_);
    const auto st = reg_of(v);
    out_.push_back(unary(Opcode::kQalloc, c));
    for (auto& g : move_sequence(c, st, false)) out_.push_back(std::move(g));
    out_.push_back(unary(Opcode::kQfree, st));
    relocate(v, comm_);
    ++moves_;
    flush(v);
  }

  void lower_two_qubit(std::size_t i, const Instruction& in) {
    const int a = placed(i, 0);
    const int b = placed(i, 1);
    if (a == b) unsupported(i, "two-qubit gate on a single qubit");
    const bool nv = isa::flavor_of(in.opcode) == isa::Flavor::kNv;
    if (nv) {
      ensure_comm(i, a);  // control must be the communication qubit
    } else if (pl_.position[a] != comm_ && pl_.position[b] != comm_) {
      ensure_comm(i, a);
    }
    flush(a);
    flush(b);
    Instruction g = in;
    g.operands[0] = reg_of(a);
    g.operands[1] = reg_of(b);
    if (nv) {
      out_.push_back(std::move(g));
      return;
    }
    const int comm_operand = pl_.position[a] == comm_ ? 0 : 1;
    for (auto& x : nv_gate_sequence(g, comm_operand)) out_.push_back(std::move(x));
  }

  void lower_epr(std::size_t i, const Instruction& in) {
    const auto& st = *an_.state_before[i];
    const bool create = in.opcode == Opcode::kCreateEpr;
    const auto qarr = const_of(dataflow::operand_value(st, in.operands.at(2)));
    if (!qarr) unsupported(i, "qubit-id array address is not a compile-time constant");
    std::optional<std::int32_t> pairs;
    if (create) {
      const auto args = const_of(dataflow::operand_value(st, in.operands.at(3)));
      if (args) {
        const auto n = st.entry(*args, 1);
        if (n.kind == dataflow::Value::Kind::kConst) pairs = n.value;
        if (n.kind == dataflow::Value::Kind::kNull) pairs = st.length(*qarr);
      }
    } else {
      pairs = st.length(*qarr);
    }
    if (!pairs) unsupported(i, "number of pairs is not a compile-time constant");
    if (*pairs != 1) unsupported(i, "the NV target takes one pair per request");
    const auto v = const_of(st.entry(*qarr, 0));
    if (!v) unsupported(i, "EPR qubit id is not a compile-time constant");
    if (!um_.contains(*v)) {
      throw Error(ErrorCode::kQubitOutOfRange,
                  "instruction " + std::to_string(i) + ": qubit " + std::to_string(*v));
    }
    if (pl_.position.contains(*v)) unsupported(i, "EPR target qubit is already allocated");
    if (const int w = pl_.occupant[static_cast<std::size_t>(comm_)]; w >= 0) evict(i, w);
    out_.push_back({Opcode::kSet, {kScratchA, Immediate{comm_}}});
    out_.push_back({Opcode::kSet, {kScratchB, Immediate{0}}});
    out_.push_back({Opcode::kStore, {kScratchA, ArrayEntry{Address{*qarr}, kScratchB}}});
    out_.push_back(in);
    place(*v, comm_);
    pl_.pending_epr.insert(*v);
  }

  const UnitModule& um_;
  const CompileOptions& options_;
  Placement& pl_;
  const Subroutine& src_;
  dataflow::Analysis an_;
  std::set<std::size_t> targets_;
  int comm_;
  bool has_branches_ = false;
  int moves_ = 0;
  std::vector<Instruction> out_;
  std::vector<std::size_t> new_index_;
  std::vector<std::size_t> copied_branches_;
  std::map<int, std::vector<Instruction>> pending_;
};

// Hoists the measurement of the communication-qubit occupant above a run of
// operations on other qubits, if instruction i starts such a run.
std::optional<Subroutine> try_hoist(const Subroutine& cur, std::size_t i,
                                    const Lowerer& low,
                                    const std::set<std::size_t>& targets) {
  const auto& code = cur.instructions;
  const auto& an = low.analysis();
  const auto& in = code[i];
  if (!an.state_before[i]) return std::nullopt;
  if (!is_single_qubit_gate(in.opcode) && in.opcode != Opcode::kMeas) return std::nullopt;
  const auto& pl = low.placement();
  const auto t = low.qubit(i, 0);
  if (!t || !pl.position.contains(*t) || pl.position.at(*t) == low.comm()) return std::nullopt;
  const int e = pl.occupant[static_cast<std::size_t>(low.comm())];
  if (e < 0 || e == *t || pl.pending_epr.contains(e)) return std::nullopt;

  std::set<RegisterRef> read;
  std::set<RegisterRef> written;
  for (std::size_t j = i; j < code.size(); ++j) {
    if (targets.contains(j)) return std::nullopt;
    const auto& x = code[j];
    const auto q = is_quantum(x) ? low.qubit(j, 0) : std::nullopt;
    const bool allowed = is_single_qubit_gate(x.opcode) || is_init(x.opcode) ||
                         x.opcode == Opcode::kMeas || x.opcode == Opcode::kQfree;
    if (!allowed || !q) return std::nullopt;
    if (*q != e) {
      for (const auto& r : isa::registers_read(x)) read.insert(r);
      if (const auto w = isa::register_written(x)) written.insert(*w);
      continue;
    }
    if (x.opcode != Opcode::kMeas || j == i) return std::nullopt;
    for (const auto& r : isa::registers_read(x)) {
      if (written.contains(r)) return std::nullopt;
    }
    const auto w = isa::register_written(x);
    if (w && (read.contains(*w) || written.contains(*w))) return std::nullopt;
    std::size_t last = j;
    if (j + 1 < code.size() && code[j + 1].opcode == Opcode::kQfree &&
        !targets.contains(j + 1) && low.qubit(j + 1, 0) == e) {
      last = j + 1;
    }
    Subroutine out = cur;
    auto& oc = out.instructions;
    std::rotate(oc.begin() + static_cast<std::ptrdiff_t>(i),
                oc.begin() + static_cast<std::ptrdiff_t>(j),
                oc.begin() + static_cast<std::ptrdiff_t>(last + 1));
    return out;
  }
  return std::nullopt;
}

// Sum of two angles in units of pi/2^d, reduced to (-2pi, 2pi]. Empty when
// the result is a multiple of 2pi (identity up to global phase).
std::optional<isa::AngleSpec> add_angles(isa::AngleSpec a, isa::AngleSpec b) {
  const std::uint32_t d = std::max(a.d, b.d);
  std::int64_t n = (static_cast<std::int64_t>(a.n) << (d - a.d)) +
                   (static_cast<std::int64_t>(b.n) << (d - b.d));
  const std::int64_t two_pi = std::int64_t{2} << d;
  if (n % two_pi == 0) return std::nullopt;
  const std::int64_t four_pi = 2 * two_pi;
  n %= four_pi;
  if (n < 0) n += four_pi;
  if (n > two_pi) n -= four_pi;
  isa::AngleSpec out{0, d};
  while (out.d > 0 && n % 2 == 0) {
    n /= 2;
    --out.d;
  }
  out.n = static_cast<std::int32_t>(n);
  return out;
}

bool is_rotation(const Instruction& in) {
  const auto& info = isa::info(in);
  return info.axis.has_value() && info.qubit_operands == 1;
}

void erase_instruction(Subroutine& sub, std::size_t idx) {
  auto& code = sub.instructions;
  code.erase(code.begin() + static_cast<std::ptrdiff_t>(idx));
  for (auto& in : code) {
    if (is_branch(in) && static_cast<std::size_t>(target_of(in)) > idx) {
      set_target(in, target_of(in) - 1);
    }
  }
}

bool peephole_once(Subroutine& sub) {
  auto& code = sub.instructions;
  const auto targets = branch_targets(sub);
  for (std::size_t j = 0; j < code.size(); ++j) {
    if (!is_rotation(code[j])) continue;
    const auto qj = std::get<RegisterRef>(code[j].operands[0]);
    const auto angle = angle_of(code[j], 1);
    if (!add_angles(angle, {0, 0})) {
      erase_instruction(sub, j);
      return true;
    }
    for (std::size_t k = j; k-- > 0;) {
      if (targets.contains(k + 1)) break;
      const auto& x = code[k];
      bool touches = false;
      for_each_register(x, [&](RegisterRef r) { touches |= r == qj; });
      if (x.opcode == code[j].opcode && touches) {
        const auto merged = add_angles(angle_of(x, 1), angle);
        if (merged) {
          code[k] = rot(x.opcode, qj, merged->n, static_cast<std::int32_t>(merged->d));
          erase_instruction(sub, j);
        } else {
          erase_instruction(sub, j);
          erase_instruction(sub, k);
        }
        return true;
      }
      if (touches || !is_gate(x.opcode) || is_init(x.opcode)) break;
    }
  }
  return false;
}

gates::Matrix embed(const gates::Matrix& g, const std::vector<int>& targets, int n) {
  const int dim = 1 << n;
  const int k = static_cast<int>(targets.size());
  gates::Matrix full = gates::Matrix::Zero(dim, dim);
  auto bit = [n](int q) { return n - 1 - q; };
  for (int in = 0; in < dim; ++in) {
    int sub_in = 0;
    for (int t = 0; t < k; ++t) sub_in = (sub_in << 1) | ((in >> bit(targets[t])) & 1);
    for (int sub_out = 0; sub_out < (1 << k); ++sub_out) {
      int out = in;
      for (int t = 0; t < k; ++t) {
        const int b = (sub_out >> (k - 1 - t)) & 1;
        out = (out & ~(1 << bit(targets[t]))) | (b << bit(targets[t]));
      }
      full(out, in) += g(sub_out, sub_in);
    }
  }
  return full;
}

}  // namespace

RegisterRef position_register(int position) {
  if (position < 0 || position >= kMaxPositions) {
    throw Error(ErrorCode::kQubitOutOfRange, "position " + std::to_string(position));
  }
  return isa::make_register('Q', 15 - position);
}

CompileOptions CompileOptions::from_mode(Mode mode) {
  if (mode == Mode::kAdhoc) return {};
  return {true, true, true};
}

std::vector<Instruction> nv_gate_sequence(const Instruction& gate, int comm_operand) {
  const auto q = std::get<RegisterRef>(gate.operands.at(0));
  switch (gate.opcode) {
    case Opcode::kInit: return {unary(Opcode::kNvInit, q)};
    case Opcode::kX: return {rot(Opcode::kNvRotX, q, 1, 0)};
    case Opcode::kY: return {rot(Opcode::kNvRotY, q, 1, 0)};
    case Opcode::kZ: return {rot(Opcode::kNvRotZ, q, 1, 0)};
    case Opcode::kH: return {rot(Opcode::kNvRotY, q, 1, 1), rot(Opcode::kNvRotX, q, 1, 0)};
    case Opcode::kS: return {rot(Opcode::kNvRotZ, q, 1, 1)};
    case Opcode::kT: return {rot(Opcode::kNvRotZ, q, 1, 2)};
    // K = Rz(pi) Rx(pi/2) up to phase
    case Opcode::kK: return {rot(Opcode::kNvRotX, q, 1, 1), rot(Opcode::kNvRotZ, q, 1, 0)};
    case Opcode::kRotX:
    case Opcode::kRotY:
    case Opcode::kRotZ: {
      Instruction out = gate;
      out.opcode = nv_rotation(*isa::info(gate).axis);
      return {out};
    }
    case Opcode::kCnot:
    case Opcode::kCphase: {
      if (comm_operand != 0 && comm_operand != 1) {
        throw Error(ErrorCode::kUnsupportedProgram,
                    std::string(isa::mnemonic(gate.opcode)) + " needs the communication qubit");
      }
      const auto b = std::get<RegisterRef>(gate.operands.at(1));
      const auto c = comm_operand == 0 ? q : b;
      const auto s = comm_operand == 0 ? b : q;
      const Instruction cx{Opcode::kCxDir, {c, s, Immediate{1}, Immediate{1}}};
      if (gate.opcode == Opcode::kCphase) {
        return {rot(Opcode::kNvRotY, s, 1, 1), cx, rot(Opcode::kNvRotZ, c, -1, 1),
                rot(Opcode::kNvRotX, s, -1, 1), rot(Opcode::kNvRotY, s, -1, 1)};
      }
      if (comm_operand == 0) {
        return {cx, rot(Opcode::kNvRotZ, c, -1, 1), rot(Opcode::kNvRotX, s, -1, 1)};
      }
      // Control on storage: conjugate by Hadamard-like rotations. The
      // published sequence ends with +pi/2 on S, which is not a CNOT.
      return {rot(Opcode::kNvRotY, c, 1, 1), rot(Opcode::kNvRotX, c, 1, 0),
              rot(Opcode::kNvRotY, s, 1, 1), cx,
              rot(Opcode::kNvRotZ, c, -1, 1), rot(Opcode::kNvRotX, s, -1, 1),
              rot(Opcode::kNvRotY, s, -1, 1), rot(Opcode::kNvRotY, c, 1, 1),
              rot(Opcode::kNvRotX, c, 1, 0)};
    }
    default:
      break;
  }
  throw Error(ErrorCode::kWrongFlavor,
              std::string(isa::mnemonic(gate.opcode)) + " is not a vanilla gate");
}

std::vector<Instruction> move_sequence(RegisterRef comm, RegisterRef storage,
                                       bool to_storage) {
  const Instruction cx{Opcode::kCxDir, {comm, storage, Immediate{1}, Immediate{1}}};
  return {unary(Opcode::kNvInit, to_storage ? storage : comm),
          rot(Opcode::kNvRotY, comm, -1, 1),
          cx,
          rot(Opcode::kNvRotX, comm, -1, 1),
          rot(Opcode::kNvRotZ, storage, 1, 1),
          cx,
          rot(Opcode::kNvRotY, comm, 1, 1)};
}

NvSession::NvSession(UnitModule um, CompileOptions options)
    : um_(std::move(um)), options_(options), placement_(um_.size()) {
  if (um_.profile != Profile::kNv) {
    throw Error(ErrorCode::kWrongFlavor, "NV session on a non-NV unit module");
  }
}

std::optional<int> NvSession::position(int virtual_id) const {
  const auto it = placement_.position.find(virtual_id);
  if (it == placement_.position.end()) return std::nullopt;
  return it->second;
}

Subroutine NvSession::translate(const Subroutine& sub, CompileStats* stats) {
  isa::check_subroutine(sub);
  Subroutine src = options_.reorder ? reorder_commuting_measurements(sub, um_, placement_) : sub;
  Placement work = placement_;
  Lowerer low(um_, options_, work, src);
  for (std::size_t i = 0; i < src.instructions.size(); ++i) low.step(i);
  Subroutine out = low.finish();
  if (options_.peephole) out = peephole(out);
  placement_ = std::move(work);
  if (stats) stats->moves += low.moves();
  return out;
}

Subroutine translate_vanilla_to_nv(const Subroutine& sub, const UnitModule& um,
                                   const CompileOptions& options, CompileStats* stats) {
  if (isa::subroutine_flavor(sub) == isa::Flavor::kNv) {
    throw Error(ErrorCode::kWrongFlavor, "input must be vanilla");
  }
  if (um.profile != Profile::kNv) {
    throw Error(ErrorCode::kWrongFlavor, "target unit module is not NV");
  }
  NvSession session(um, options);
  return session.translate(sub, stats);
}

Subroutine translate_vanilla_to_nv(const Subroutine& sub, const UnitModule& um,
                                   Mode mode, CompileStats* stats) {
  return translate_vanilla_to_nv(sub, um, CompileOptions::from_mode(mode), stats);
}

Subroutine insert_moves_nv(const Subroutine& sub, const UnitModule& um,
                           CompileStats* stats) {
  NvSession session(um, {});
  return session.translate(sub, stats);
}

Subroutine reorder_commuting_measurements(const Subroutine& sub, const UnitModule& um) {
  return reorder_commuting_measurements(sub, um, Placement(um.size()));
}

Subroutine reorder_commuting_measurements(const Subroutine& sub, const UnitModule& um,
                                          const Placement& start) {
  Subroutine cur = sub;
  const CompileOptions plain;
  // Each hoist moves a measurement strictly earlier, so this terminates.
  for (;;) {
    Placement pl = start;
    std::optional<Subroutine> next;
    try {
      Lowerer low(um, plain, pl, cur);
      const auto targets = branch_targets(cur);
      for (std::size_t i = 0; i < cur.instructions.size() && !next; ++i) {
        next = try_hoist(cur, i, low, targets);
        if (!next) low.step(i);
      }
    } catch (const Error&) {
      return cur;  // not lowerable; leave the order alone
    }
    if (!next) return cur;
    cur = std::move(*next);
  }
}

Subroutine peephole(const Subroutine& sub) {
  Subroutine out = sub;
  while (peephole_once(out)) {
  }
  return out;
}

gates::Matrix gate_matrix(const Instruction& in) {
  auto angle = [&in](std::size_t first) { return isa::angle_value(angle_of(in, first)); };
  switch (in.opcode) {
    case Opcode::kX: return gates::pauli_x();
    case Opcode::kY: return gates::pauli_y();
    case Opcode::kZ: return gates::pauli_z();
    case Opcode::kH: return gates::hadamard();
    case Opcode::kS: return gates::phase_s();
    case Opcode::kK: return gates::k_gate();
    case Opcode::kT: return gates::t_gate();
    case Opcode::kRotX:
    case Opcode::kNvRotX: return gates::rot_x(angle(1));
    case Opcode::kRotY:
    case Opcode::kNvRotY: return gates::rot_y(angle(1));
    case Opcode::kRotZ:
    case Opcode::kNvRotZ: return gates::rot_z(angle(1));
    case Opcode::kCnot: return gates::cnot();
    case Opcode::kCphase: return gates::cphase();
    case Opcode::kCxDir: return gates::ec_x(angle(2));
    case Opcode::kCyDir: return gates::ec_y(angle(2));
    default: break;
  }
  throw Error(ErrorCode::kNotAGateBlock,
              std::string(isa::mnemonic(in.opcode)) + " is not a unitary gate");
}

gates::Matrix block_unitary(const std::vector<Instruction>& instructions,
                            const std::vector<RegisterRef>& qubits) {
  const int n = static_cast<int>(qubits.size());
  gates::Matrix u = gates::identity(n);
  for (const auto& in : instructions) {
    const auto g = gate_matrix(in);
    std::vector<int> targets;
    for (int k = 0; k < isa::info(in).qubit_operands; ++k) {
      const auto* r = std::get_if<RegisterRef>(&in.operands.at(static_cast<std::size_t>(k)));
      const auto it = r ? std::find(qubits.begin(), qubits.end(), *r) : qubits.end();
      if (it == qubits.end()) {
        throw Error(ErrorCode::kNotAGateBlock, "qubit operand outside the block's qubit set");
      }
      targets.push_back(static_cast<int>(it - qubits.begin()));
    }
    u = embed(g, targets, n) * u;
  }
  return u;
}

GateCounts gate_counts(const Subroutine& sub, const UnitModule& um) {
  GateCounts c;
  const auto& code = sub.instructions;
  const auto an = dataflow::analyze(sub);
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (!an.state_before[i]) continue;
    const auto& in = code[i];
    const auto& info = isa::info(in);
    if (info.group != isa::Group::kGate && in.opcode != Opcode::kMeas) continue;
    std::vector<int> qs;
    for (int k = 0; k < info.qubit_operands; ++k) {
      const auto v = qubit_const(an, i, in.operands.at(static_cast<std::size_t>(k)));
      if (!v && um.profile == Profile::kNv) {
        unsupported(i, "qubit operand is not a compile-time constant");
      }
      qs.push_back(v.value_or(0));
    }
    const auto name = um.gate_name(in.opcode, qs);
    if (name.empty()) continue;
    c.duration_ns += um.params(name).duration_ns;
    if (info.qubit_operands == 2) ++c.two_qubit_ops;
    if (in.opcode == Opcode::kNvInit && i + 5 < code.size() &&
        code[i + 1].opcode == Opcode::kNvRotY && code[i + 2].opcode == Opcode::kCxDir) {
      const auto cr = std::get<RegisterRef>(code[i + 2].operands[0]);
      const auto sr = std::get<RegisterRef>(code[i + 2].operands[1]);
      const auto x = std::get<RegisterRef>(in.operands[0]);
      if (x == cr || x == sr) {
        const auto expect = move_sequence(cr, sr, x == sr);
        if (std::equal(expect.begin(), expect.begin() + 6, code.begin() + static_cast<std::ptrdiff_t>(i))) {
          ++c.moves;
        }
      }
    }
  }
  return c;
}

std::vector<Diagnostic> validate(const Subroutine& sub, const UnitModule& um, bool strict) {
  std::vector<Diagnostic> out;
  const auto& code = sub.instructions;
  auto add = [&out](Severity s, std::size_t i, const char* code_name, std::string msg) {
    out.push_back({s, static_cast<std::int64_t>(i), code_name, std::move(msg)});
  };
  const auto an = dataflow::analyze(sub);
  std::map<std::int32_t, std::size_t> declared;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code[i].opcode == Opcode::kArray) {
      declared.try_emplace(std::get<Address>(code[i].operands[1]).id, i);
    }
  }
  const bool nv = um.profile == Profile::kNv;
  const bool vanilla_source = isa::subroutine_flavor(sub) != isa::Flavor::kNv;
  for (std::size_t i = 0; i < code.size(); ++i) {
    const auto& in = code[i];
    const auto& info = isa::info(in);
    if (is_branch(in)) {
      const auto t = target_of(in);
      if (t < 0 || static_cast<std::size_t>(t) > code.size()) {
        add(Severity::kError, i, "BranchOutOfRange", "target " + std::to_string(t));
      }
    }
    if (in.opcode != Opcode::kArray) {
      for (const auto& op : in.operands) {
        const auto a = array_address(op);
        if (!a) continue;
        const auto it = declared.find(*a);
        if (it != declared.end() && it->second > i) {
          add(Severity::kError, i, "ArrayBeforeDeclaration",
              "@" + std::to_string(*a) + " is declared at instruction " + std::to_string(it->second));
        }
      }
    }
    if (nv && vanilla_source) {
      for_each_register(in, [&](RegisterRef r) {
        const bool q = r.name == isa::RegName::kQ && r.index >= 16 - std::min(um.size(), kMaxPositions);
        if (q || r == kScratchA || r == kScratchB) {
          add(Severity::kWarning, i, "ReservedRegister",
              isa::to_string(r) + " is reserved by the NV compiler");
        }
      });
    }
    if (isa::flavor_of(in.opcode) == isa::Flavor::kNv && !nv) {
      add(Severity::kError, i, "WrongFlavor", "NV instruction on a generic unit module");
      continue;
    }
    if (info.qubit_operands == 0) continue;
    std::vector<std::optional<int>> qs;
    bool out_of_range = false;
    for (int k = 0; k < info.qubit_operands; ++k) {
      const auto v = qubit_const(an, i, in.operands.at(static_cast<std::size_t>(k)));
      if (v && !um.contains(*v)) {
        add(Severity::kError, i, "QubitOutOfRange", "qubit " + std::to_string(*v));
        out_of_range = true;
      }
      qs.push_back(v);
    }
    if (out_of_range || !nv) continue;
    if (!strict && isa::flavor_of(in.opcode) != isa::Flavor::kNv) continue;
    const int comm = um.communication_qubit();
    auto is_comm = [&](const std::optional<int>& q) { return q && *q == comm; };
    auto is_storage = [&](const std::optional<int>& q) { return q && *q != comm; };
    if (in.opcode == Opcode::kMeas && is_storage(qs[0])) {
      add(Severity::kError, i, "MeasureRequiresCommQubit",
          "qubit " + std::to_string(*qs[0]) + " is a storage qubit");
    }
    if (info.qubit_operands == 2 && qs[0] && qs[1]) {
      const bool nv_gate = isa::flavor_of(in.opcode) == isa::Flavor::kNv;
      const bool ok = nv_gate ? is_comm(qs[0]) && um.has_edge(*qs[0], *qs[1])
                              : um.has_edge(*qs[0], *qs[1]);
      if (!ok) {
        add(Severity::kError, i, "GateNotSupportedOnPair",
            std::string(info.mnemonic) + " on (" + std::to_string(*qs[0]) + "," +
                std::to_string(*qs[1]) + ")");
      }
    }
    if (info.qubit_operands == 1 && qs[0] && isa::flavor_of(in.opcode) == isa::Flavor::kNv) {
      const auto name = um.gate_name(in.opcode, {*qs[0]});
      if (!name.empty() && !um.supports(*qs[0], name)) {
        add(Severity::kError, i, "GateNotSupportedOnQubit",
            name + " on qubit " + std::to_string(*qs[0]));
      }
    }
  }
  return out;
}

}  // namespace nqasm::compiler
