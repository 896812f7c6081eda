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


#include "nqasm/qnpu.hpp"

#include <algorithm>
#include <cmath>

#include "nqasm/codec.hpp"
#include "nqasm/error.hpp"

namespace nqasm::qnpu {

using isa::Opcode;
using isa::RegisterRef;

namespace {

std::int32_t wrap(std::int32_t a, std::int32_t b, bool subtract) {
  const auto ua = static_cast<std::uint32_t>(a);
  const auto ub = static_cast<std::uint32_t>(b);
  return static_cast<std::int32_t>(subtract ? ua - ub : ua + ub);
}

std::string text_of(const isa::Instruction& in) {
  std::string s(isa::mnemonic(in.opcode));
  for (const auto& op : in.operands) s += " " + isa::to_string(op);
  return s;
}

std::array<isa::Axis, 3> pmr_axes(Opcode op) {
  using isa::Axis;
  switch (op) {
    case Opcode::kPmrXyx: return {Axis::kX, Axis::kY, Axis::kX};
    case Opcode::kPmrZxz: return {Axis::kZ, Axis::kX, Axis::kZ};
    default: return {Axis::kY, Axis::kZ, Axis::kY};
  }
}

gates::Matrix axis_rotation(isa::Axis axis, double angle) {
  switch (axis) {
    case isa::Axis::kX: return gates::rot_x(angle);
    case isa::Axis::kY: return gates::rot_y(angle);
    case isa::Axis::kZ: break;
  }
  return gates::rot_z(angle);
}

[[noreturn]] void fail(ErrorCode code, const std::string& what, std::size_t pc) {
  throw Error(code, "instruction " + std::to_string(pc) + ": " + what);
}

}  // namespace

// ---------------------------------------------------------------- Qnpu

Qnpu::Qnpu(Network& net, NodeConfig config)
    : net_(net), config_(std::move(config)),
      owner_(static_cast<std::size_t>(config_.hardware.size()), -1) {}

Qnpu::App& Qnpu::app(int id) {
  const auto it = apps_.find(id);
  if (it == apps_.end()) {
    throw Error(ErrorCode::kNoSuchApp, "node " + config_.name + ": no app " + std::to_string(id));
  }
  return it->second;
}

const Qnpu::App& Qnpu::app(int id) const { return const_cast<Qnpu*>(this)->app(id); }

int Qnpu::register_app(const AppSpec& spec) {
  const auto& hw = config_.hardware;
  if (spec.qubits < 1 || spec.qubits > hw.size()) {
    throw Error(ErrorCode::kResources, "requested " + std::to_string(spec.qubits) +
                                           " qubits on a " + std::to_string(hw.size()) +
                                           "-qubit node");
  }
  std::vector<int> pool;
  if (hw.profile == Profile::kNv) {
    const int comm = hw.communication_qubit();
    if (owner_[static_cast<std::size_t>(comm)] >= 0) {
      throw Error(ErrorCode::kResources, "communication qubit is in use by another app");
    }
    pool.push_back(comm);
  }
  for (const auto& q : hw.qubits) {
    if (static_cast<int>(pool.size()) == spec.qubits) break;
    if (owner_[static_cast<std::size_t>(q.id)] < 0 &&
        std::find(pool.begin(), pool.end(), q.id) == pool.end()) {
      pool.push_back(q.id);
    }
  }
  if (static_cast<int>(pool.size()) < spec.qubits) {
    throw Error(ErrorCode::kResources, "not enough free qubits");
  }
  std::map<std::int32_t, EprSocketBinding> sockets;
  for (const auto& s : spec.sockets) {
    if (!net_.has_node(s.remote_node) || s.remote_node == id()) {
      throw Error(ErrorCode::kNoSuchSocket,
                  "socket " + std::to_string(s.socket_id) + ": unknown remote node " +
                      std::to_string(s.remote_node));
    }
    bool taken = sockets.contains(s.socket_id);
    for (const auto& [other_id, other] : apps_) taken = taken || other.sockets.contains(s.socket_id);
    if (taken) {
      throw Error(ErrorCode::kSocketInUse, "EPR socket " + std::to_string(s.socket_id) + " in use");
    }
    sockets[s.socket_id] = s;
  }

  const int app_id = next_app_++;
  App a;
  a.id = app_id;
  a.um = hw.profile == Profile::kNv ? UnitModule::nv(spec.qubits, hw.noise)
                                    : UnitModule::generic(spec.qubits, hw.noise);
  a.pool = pool;
  a.sockets = std::move(sockets);
  if (hw.profile == Profile::kNv) a.session = std::make_unique<compiler::NvSession>(a.um);
  for (const int q : pool) owner_[static_cast<std::size_t>(q)] = app_id;
  apps_.emplace(app_id, std::move(a));
  return app_id;
}

void Qnpu::submit(int app_id, isa::Subroutine sub, std::int32_t message_id) {
  App& a = app(app_id);
  isa::check_subroutine(sub, true);
  const auto flavor = isa::subroutine_flavor(sub);
  if (hardware().profile == Profile::kNv) {
    // Gate-free code is ambiguous: it goes through the translator until the
    // app has shown that it compiles for NV itself.
    if (flavor == isa::Flavor::kNv) a.precompiled = true;
    if (flavor == isa::Flavor::kVanilla || (flavor == isa::Flavor::kCore && !a.precompiled)) {
      compiler::CompileStats cs;
      sub = a.session->translate(sub, &cs);
      stats_.moves += cs.moves;
    }
  } else if (flavor == isa::Flavor::kNv) {
    throw Error(ErrorCode::kWrongFlavor, "NV subroutine on node " + name());
  }
  a.queue.push_back(Running{std::move(sub), message_id});
  if (!a.running) schedule(a);
}

void Qnpu::schedule(App& a) {
  if (!a.running) {
    if (a.queue.empty()) return;
    a.running = std::move(a.queue.front());
    a.queue.pop_front();
  }
  if (a.running->scheduled) return;
  a.running->scheduled = true;
  const int id = a.id;
  net_.scheduler().at(std::max(clock_ns_, net_.scheduler().now()), config_.id,
                      [this, id] { resume(id); });
}

void Qnpu::resume(int app_id) {
  const auto it = apps_.find(app_id);
  if (it == apps_.end() || !it->second.running) return;  // stopped meanwhile
  App& a = it->second;
  Running& r = *a.running;
  r.scheduled = false;
  r.blocked = false;
  clock_ns_ = std::max(clock_ns_, net_.scheduler().now());
  while (r.pc < r.sub.instructions.size()) {
    if (!execute(a, r)) {
      r.blocked = true;
      a.view = shmem::app_view_update(a.view, a.mem, a.ret_regs, a.ret_arrays);
      if (on_update_) on_update_(a.id, r.message_id, a.view);
      return;
    }
  }
  finish(a);
}

void Qnpu::finish(App& a) {
  a.view = shmem::app_view_update(a.view, a.mem, a.ret_regs, a.ret_arrays);
  a.ret_regs.clear();
  a.ret_arrays.clear();
  const std::int32_t message_id = a.running->message_id;
  a.running.reset();
  stats_.end_time_ns = std::max(stats_.end_time_ns, clock_ns_);
  const int id = a.id;
  const shmem::AppView view = a.view;
  net_.scheduler().at(clock_ns_, config_.id, [this, id, message_id, view] {
    if (on_done_) on_done_(id, message_id, view);
  });
  schedule(a);
}

void Qnpu::notify(int app_id) {
  const auto it = apps_.find(app_id);
  if (it == apps_.end() || !it->second.running) return;
  Running& r = *it->second.running;
  if (!r.blocked) return;
  if (!wait_satisfied(it->second, r.sub.instructions.at(r.pc))) return;
  schedule(it->second);
}

void Qnpu::stop_app(int app_id) {
  App& a = app(app_id);
  for (const auto& [pos, q] : a.backend) {
    if (net_.simulator().exists(q)) net_.simulator().free_qubit(q);
  }
  for (const int q : a.pool) owner_[static_cast<std::size_t>(q)] = -1;
  net_.drop_requests(id(), app_id);
  apps_.erase(app_id);
}

bool Qnpu::busy(int app_id) const {
  const App& a = app(app_id);
  return a.running.has_value() || !a.queue.empty();
}

int Qnpu::free_qubits() const {
  return static_cast<int>(std::count(owner_.begin(), owner_.end(), -1));
}

int Qnpu::allocated_qubits(int app_id) const {
  return static_cast<int>(app(app_id).backend.size());
}

const UnitModule& Qnpu::unit_module(int app_id) const { return app(app_id).um; }
const shmem::SharedMemory& Qnpu::memory(int app_id) const { return app(app_id).mem; }
const shmem::AppView& Qnpu::view(int app_id) const { return app(app_id).view; }

std::optional<qsim::QubitId> Qnpu::backend_qubit(int app_id, int virtual_id) const {
  const App& a = app(app_id);
  // Vanilla code translated here addresses positions chosen by the session.
  if (a.session) {
    if (const auto pos = a.session->position(virtual_id)) {
      const auto q = a.backend.find(*pos);
      if (q != a.backend.end()) return q->second;
    }
  }
  const auto p = a.position.find(virtual_id);
  if (p == a.position.end()) return std::nullopt;
  const auto q = a.backend.find(p->second);
  if (q == a.backend.end()) return std::nullopt;
  return q->second;
}

std::vector<BlockedWait> Qnpu::blocked() const {
  std::vector<BlockedWait> out;
  for (const auto& [id, a] : apps_) {
    if (a.running && a.running->blocked) {
      out.push_back({config_.id, id, a.running->pc,
                     text_of(a.running->sub.instructions.at(a.running->pc))});
    }
  }
  return out;
}

double Qnpu::advance(double duration_ns) {
  clock_ns_ = std::max(clock_ns_, net_.scheduler().now()) + duration_ns;
  return clock_ns_;
}

std::int32_t Qnpu::value(const App& a, const isa::Operand& op) const {
  if (const auto* r = std::get_if<RegisterRef>(&op)) return a.mem.reg_get(*r);
  if (const auto* i = std::get_if<isa::Immediate>(&op)) return i->value;
  if (const auto* ad = std::get_if<isa::Address>(&op)) return ad->id;
  throw Error(ErrorCode::kSignatureMismatch, "operand " + isa::to_string(op) + " has no value");
}

std::int32_t Qnpu::index(const App& a, const isa::IndexOperand& idx) const {
  if (const auto* r = std::get_if<RegisterRef>(&idx)) return a.mem.reg_get(*r);
  return std::get<isa::Immediate>(idx).value;
}

int Qnpu::resolve_qubit(const App& a, const isa::Operand& op, std::size_t pc) const {
  const int v = value(a, op);
  const auto it = a.position.find(v);
  if (it == a.position.end()) fail(ErrorCode::kQubitNotAllocated, "qubit " + std::to_string(v), pc);
  return it->second;
}

int Qnpu::map_virtual(App& a, int v, bool epr) {
  if (a.position.contains(v)) {
    throw Error(ErrorCode::kQubitBusy, "virtual qubit " + std::to_string(v) + " is in use");
  }
  int p = -1;
  if (a.um.profile == Profile::kNv) {
    // NV code addresses unit-module positions directly.
    if (!a.um.contains(v)) {
      throw Error(ErrorCode::kQubitOutOfRange, "qubit " + std::to_string(v));
    }
    if (a.backend.contains(v)) {
      throw Error(ErrorCode::kQubitBusy, "position " + std::to_string(v) + " is in use");
    }
    if (epr && v != a.um.communication_qubit()) {
      throw Error(ErrorCode::kNotCommunicationQubit,
                  "EPR qubit " + std::to_string(v) + " is not the communication qubit");
    }
    p = v;
  } else {
    if (v < 0) throw Error(ErrorCode::kQubitOutOfRange, "qubit " + std::to_string(v));
    for (int i = 0; i < a.um.size(); ++i) {
      if (!a.backend.contains(i)) {
        p = i;
        break;
      }
    }
    if (p < 0) throw Error(ErrorCode::kResources, "no free qubit in the unit module");
  }
  a.position[v] = p;
  return p;
}

void Qnpu::release_position(App& a, int position) {
  const auto it = a.backend.find(position);
  if (it != a.backend.end()) {
    if (net_.simulator().exists(it->second)) net_.simulator().free_qubit(it->second);
    a.backend.erase(it);
  }
  std::erase_if(a.position, [position](const auto& kv) { return kv.second == position; });
}

bool Qnpu::wait_satisfied(const App& a, const isa::Instruction& in) const {
  if (in.opcode == Opcode::kWaitSingle) {
    const auto& e = std::get<isa::ArrayEntry>(in.operands.at(0));
    return a.mem.entry_defined(e.address.id, index(a, e.index));
  }
  const auto& s = std::get<isa::ArraySlice>(in.operands.at(0));
  const shmem::SliceBounds b{s.address.id, index(a, s.start), index(a, s.stop)};
  return a.mem.slice_defined(
      b, in.opcode == Opcode::kWaitAll ? shmem::Quantifier::kAll : shmem::Quantifier::kAny);
}

void Qnpu::gate(App& a, const isa::Instruction& in, std::size_t pc) {
  const auto& info = isa::info(in);
  std::vector<int> pos;
  for (int k = 0; k < info.qubit_operands; ++k) {
    pos.push_back(resolve_qubit(a, in.operands.at(static_cast<std::size_t>(k)), pc));
  }
  if (a.um.profile == Profile::kNv && pos.size() == 2) {
    if (pos[0] != a.um.communication_qubit()) {
      fail(ErrorCode::kNotCommunicationQubit, "control of " + text_of(in) + " is not the communication qubit", pc);
    }
    if (!a.um.has_edge(pos[0], pos[1])) fail(ErrorCode::kQubitOutOfRange, "no edge for " + text_of(in), pc);
  }
  const std::string gname = a.um.gate_name(in.opcode, pos);
  const GateParams& gp = a.um.params(gname);
  ++stats_.gates[gname];
  if (pos.size() == 2) ++stats_.two_qubit_gates;
  auto& sim = net_.simulator();
  if (in.opcode == Opcode::kInit || in.opcode == Opcode::kNvInit) {
    sim.init_qubit(a.backend.at(pos[0]), gp.fidelity, gp.duration_ns);
  } else {
    std::vector<qsim::QubitId> qs;
    for (const int p : pos) qs.push_back(a.backend.at(p));
    sim.apply(compiler::gate_matrix(in), qs, gp.fidelity, gp.duration_ns);
  }
  advance(gp.duration_ns);
}

void Qnpu::measure(App& a, const isa::Instruction& in, std::size_t pc) {
  const int p = resolve_qubit(a, in.operands.at(0), pc);
  if (a.um.profile == Profile::kNv && p != a.um.communication_qubit()) {
    fail(ErrorCode::kNotCommunicationQubit, "measurement needs the communication qubit", pc);
  }
  auto& sim = net_.simulator();
  const qsim::QubitId q = a.backend.at(p);
  if (a.pmr) {
    // Folded into the measurement: ideal and instantaneous.
    for (const auto& [axis, angle] : *a.pmr) {
      const std::array<qsim::QubitId, 1> one{q};
      sim.apply(axis_rotation(axis, isa::angle_value(angle)), one, 1.0);
    }
    a.pmr.reset();
  }
  const GateParams& gp = a.um.params(gate_names::kMeasure);
  ++stats_.gates[gate_names::kMeasure];
  // Randomness per (node, app, result register, occurrence), so programs
  // that only differ in measurement order stay comparable under one seed.
  const auto target = std::get<RegisterRef>(in.operands.at(1));
  const std::uint64_t key = (static_cast<std::uint64_t>(config_.id) << 48) ^
                            (static_cast<std::uint64_t>(a.id) << 32) ^
                            (static_cast<std::uint64_t>(codec::encode_register(target)) << 24) ^
                            static_cast<std::uint64_t>(a.measurements[target]++);
  const int bit = sim.measure_keyed(q, key, a.um.noise.prob_error_meas_0,
                                    a.um.noise.prob_error_meas_1, gp.duration_ns);
  advance(gp.duration_ns);
  a.mem.reg_set(target, bit);
}

void Qnpu::submit_epr(App& a, const isa::Instruction& in) {
  const bool create = in.opcode == Opcode::kCreateEpr;
  const auto& ops = in.operands;
  EntRequest req;
  req.create = create;
  req.node = id();
  req.app = a.id;
  const std::int32_t remote = value(a, ops.at(0));
  req.socket_id = value(a, ops.at(1));
  req.qubit_array = value(a, ops.at(2));
  req.entinfo_array = value(a, ops.at(create ? 4 : 3));
  const auto sock = a.sockets.find(req.socket_id);
  if (sock == a.sockets.end() || sock->second.remote_node != remote) {
    throw Error(ErrorCode::kNoSuchSocket, "no EPR socket " + std::to_string(req.socket_id) +
                                              " to node " + std::to_string(remote));
  }
  req.remote_node = remote;
  req.remote_socket = sock->second.remote_socket;
  if (!a.mem.has_array(req.qubit_array) || !a.mem.has_array(req.entinfo_array)) {
    throw Error(ErrorCode::kNoSuchArray, "EPR request names a missing array");
  }
  if (create) {
    req.args_array = value(a, ops.at(3));
    const auto type = a.mem.array_entry(*req.args_array, kArgType);
    const auto pairs = a.mem.array_entry(*req.args_array, kArgPairs);
    req.type = static_cast<EntType>(type.value_or(0));
    if (req.type != EntType::kCreateKeep && req.type != EntType::kMeasureDirectly) {
      throw Error(ErrorCode::kMalformedOperand, "unknown entanglement type " + std::to_string(*type));
    }
    req.pairs = pairs ? *pairs
                      : static_cast<int>(a.mem.array(req.qubit_array).length());
    if (req.pairs < 1) throw Error(ErrorCode::kMalformedOperand, "pair count must be >= 1");
  }
  req.submitted_ns = clock_ns_;
  net_.submit_request(std::move(req));
}

bool Qnpu::execute(App& a, Running& r) {
  const std::size_t pc = r.pc;
  const auto& in = r.sub.instructions[pc];
  const auto& ops = in.operands;
  auto& mem = a.mem;
  auto reg0 = [&]() { return std::get<RegisterRef>(ops.at(0)); };
  std::size_t next = pc + 1;
  const auto& info = isa::info(in);
  if (info.branch_target >= 0) {
    const auto target = std::get<isa::Immediate>(ops.at(static_cast<std::size_t>(info.branch_target))).value;
    if (target < 0 || static_cast<std::size_t>(target) > r.sub.instructions.size()) {
      fail(ErrorCode::kInvalidBranch, "branch target " + std::to_string(target), pc);
    }
    bool taken = false;
    switch (in.opcode) {
      case Opcode::kJmp: taken = true; break;
      case Opcode::kBez: taken = value(a, ops[0]) == 0; break;
      case Opcode::kBnz: taken = value(a, ops[0]) != 0; break;
      case Opcode::kBeq: taken = value(a, ops[0]) == value(a, ops[1]); break;
      case Opcode::kBne: taken = value(a, ops[0]) != value(a, ops[1]); break;
      case Opcode::kBlt: taken = value(a, ops[0]) < value(a, ops[1]); break;
      case Opcode::kBge: taken = value(a, ops[0]) >= value(a, ops[1]); break;
      default: break;
    }
    if (taken) next = static_cast<std::size_t>(target);
    r.pc = next;
    return true;
  }
  switch (in.opcode) {
    case Opcode::kAdd:
    case Opcode::kSub:
      mem.reg_set(reg0(), wrap(value(a, ops[1]), value(a, ops[2]), in.opcode == Opcode::kSub));
      break;
    case Opcode::kAddm:
    case Opcode::kSubm: {
      const std::int64_t m = value(a, ops[3]);
      if (m <= 0) fail(ErrorCode::kBadModulus, "modulus " + std::to_string(m), pc);
      const std::int64_t x = value(a, ops[1]);
      const std::int64_t y = value(a, ops[2]);
      std::int64_t v = (in.opcode == Opcode::kAddm ? x + y : x - y) % m;
      if (v < 0) v += m;
      mem.reg_set(reg0(), static_cast<std::int32_t>(v));
      break;
    }
    case Opcode::kSet:
      mem.reg_set(reg0(), value(a, ops[1]));
      break;
    case Opcode::kStore: {
      const auto& e = std::get<isa::ArrayEntry>(ops[1]);
      mem.array_store(e.address.id, index(a, e.index), value(a, ops[0]));
      break;
    }
    case Opcode::kLoad: {
      const auto& e = std::get<isa::ArrayEntry>(ops[1]);
      mem.reg_set(reg0(), mem.array_load(e.address.id, index(a, e.index)));
      break;
    }
    case Opcode::kUndef: {
      const auto& e = std::get<isa::ArrayEntry>(ops[0]);
      mem.array_undef(e.address.id, index(a, e.index));
      break;
    }
    case Opcode::kLea:
      mem.reg_set(reg0(), std::get<isa::Address>(ops[1]).id);
      break;
    case Opcode::kArray: {
      const std::int32_t n = value(a, ops[0]);
      if (n < 0) fail(ErrorCode::kIndexOutOfRange, "negative array length", pc);
      mem.array_new(std::get<isa::Address>(ops[1]).id, static_cast<std::size_t>(n));
      break;
    }
    case Opcode::kQalloc: {
      const int p = map_virtual(a, value(a, ops[0]), false);
      a.backend[p] = net_.simulator().new_qubit();
      break;
    }
    case Opcode::kQfree:
      release_position(a, resolve_qubit(a, ops[0], pc));
      break;
    case Opcode::kWaitAll:
    case Opcode::kWaitAny:
    case Opcode::kWaitSingle:
      if (!wait_satisfied(a, in)) return false;
      break;
    case Opcode::kRetReg:
      a.ret_regs.insert(reg0());
      break;
    case Opcode::kRetArr:
      a.ret_arrays.insert(std::get<isa::Address>(ops[0]).id);
      break;
    case Opcode::kMeas:
      measure(a, in, pc);
      break;
    case Opcode::kPmrXyx:
    case Opcode::kPmrZxz:
    case Opcode::kPmrYzy: {
      const auto axes = pmr_axes(in.opcode);
      std::array<std::pair<isa::Axis, isa::AngleSpec>, 3> rot;
      for (std::size_t k = 0; k < 3; ++k) {
        const auto n = std::get<isa::Immediate>(ops[2 * k]).value;
        const auto d = std::get<isa::Immediate>(ops[2 * k + 1]).value;
        if (d < 0) fail(ErrorCode::kAngleOverflow, "negative angle exponent", pc);
        rot[k] = {axes[k], isa::AngleSpec{n, static_cast<std::uint32_t>(d)}};
      }
      a.pmr = rot;
      break;
    }
    case Opcode::kCreateEpr:
    case Opcode::kRecvEpr:
      submit_epr(a, in);
      break;
    default:
      if (info.group != isa::Group::kGate) {
        fail(ErrorCode::kUnknownOpcode, std::string(info.mnemonic) + " is not executable", pc);
      }
      gate(a, in, pc);
      break;
  }
  r.pc = next;
  return true;
}

// ---------------------------------------------------------------- Network

Network::Network(std::vector<NodeConfig> nodes, std::vector<LinkConfig> links,
                 std::uint64_t seed, qsim::TwoQubitNoise two_qubit_noise)
    : sim_(seed, two_qubit_noise), links_(std::move(links)) {
  for (auto& n : nodes) {
    const int id = n.id;
    n.hardware.check();
    if (nodes_.contains(id)) throw Error(ErrorCode::kConfig, "duplicate node id " + std::to_string(id));
    nodes_.emplace(id, std::unique_ptr<Qnpu>(new Qnpu(*this, std::move(n))));
  }
  for (const auto& l : links_) {
    if (!nodes_.contains(l.a) || !nodes_.contains(l.b) || l.a == l.b) {
      throw Error(ErrorCode::kConfig, "link (" + std::to_string(l.a) + "," +
                                          std::to_string(l.b) + ") names an unknown node");
    }
    if (l.link_fidelity < 0.25 || l.link_fidelity > 1.0 || l.cycle_time_ns < 0) {
      throw Error(ErrorCode::kConfig, "link parameters out of range");
    }
  }
}

Network::~Network() = default;

Qnpu& Network::node(int id) {
  const auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::kConfig, "no node " + std::to_string(id));
  return *it->second;
}

const Qnpu& Network::node(int id) const { return const_cast<Network*>(this)->node(id); }

std::vector<int> Network::node_ids() const {
  std::vector<int> out;
  for (const auto& kv : nodes_) out.push_back(kv.first);
  return out;
}

const LinkConfig* Network::link(int a, int b) const {
  for (const auto& l : links_) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return &l;
  }
  return nullptr;
}

std::vector<BlockedWait> Network::blocked() const {
  std::vector<BlockedWait> out;
  for (const auto& [id, n] : nodes_) {
    auto b = n->blocked();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<std::array<int, 3>> Network::entinfo_arrays() const {
  std::vector<std::array<int, 3>> out;
  auto add = [&out](const EntRequest& r) { out.push_back({r.node, r.app, r.entinfo_array}); };
  for (const auto& r : pending_) add(r);
  for (const auto& [k, m] : active_) {
    add(m.first);
    add(m.second);
  }
  return out;
}

void Network::submit_request(EntRequest req) {
  pending_.push_back(std::move(req));
  try_match();
}

void Network::drop_requests(int node, int app) {
  std::erase_if(pending_, [&](const EntRequest& r) { return r.node == node && r.app == app; });
}

void Network::try_match() {
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    const EntRequest& c = pending_[i];
    if (!c.create) continue;
    for (std::size_t j = 0; j < pending_.size(); ++j) {
      const EntRequest& r = pending_[j];
      if (r.create || r.node != c.remote_node || r.remote_node != c.node ||
          r.socket_id != c.remote_socket || r.remote_socket != c.socket_id) {
        continue;
      }
      const LinkConfig* l = link(c.node, r.node);
      if (!l) {
        throw Error(ErrorCode::kNoSuchSocket, "no link between nodes " + std::to_string(c.node) +
                                                  " and " + std::to_string(r.node));
      }
      EntRequest create = c;
      EntRequest recv = r;
      recv.pairs = create.pairs;
      recv.type = create.type;
      pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
      pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
      for (const auto* side : {&create, &recv}) {
        const auto& mem = node(side->node).memory(side->app);
        if (mem.array(side->entinfo_array).length() <
            static_cast<std::size_t>(kEntInfoWidth * create.pairs)) {
          throw Error(ErrorCode::kBadQubitArray, "entanglement-info array too short for " +
                                                     std::to_string(create.pairs) + " pairs");
        }
        if (create.type == EntType::kCreateKeep &&
            mem.array(side->qubit_array).length() < static_cast<std::size_t>(create.pairs)) {
          throw Error(ErrorCode::kBadQubitArray, "qubit-id array shorter than the pair count");
        }
      }
      const std::uint64_t match = next_match_++;
      active_[match] = {create, recv};
      const double t0 = std::max({create.submitted_ns, recv.submitted_ns, scheduler_.now()});
      for (int k = 0; k < create.pairs; ++k) {
        scheduler_.at(t0 + (k + 1) * l->cycle_time_ns, std::min(c.node, r.node),
                      [this, match, k] {
                        const auto it = active_.find(match);
                        if (it == active_.end()) return;
                        const auto [cr, rc] = it->second;
                        deliver(cr, rc, k, match);
                      });
      }
      try_match();
      return;
    }
  }
}

void Network::deliver(const EntRequest& create, const EntRequest& recv, int k,
                      std::uint64_t match_id) {
  if (k + 1 == create.pairs) active_.erase(match_id);
  Qnpu& na = node(create.node);
  Qnpu& nb = node(recv.node);
  if (!na.has_app(create.app) || !nb.has_app(recv.app)) return;  // an app stopped
  const LinkConfig& l = *link(create.node, recv.node);
  const auto [qa, qb] = sim_.make_epr_pair(l.link_fidelity, l.cycle_time_ns);
  struct Side {
    Qnpu& n;
    const EntRequest& req;
    qsim::QubitId q;
  };
  for (Side s : {Side{na, create, qa}, Side{nb, recv, qb}}) {
    Qnpu::App& a = s.n.app(s.req.app);
    std::int32_t slot2 = 0;
    if (create.type == EntType::kCreateKeep) {
      const auto v = a.mem.array_entry(s.req.qubit_array, k);
      if (!v) {
        throw Error(ErrorCode::kBadQubitArray,
                    "qubit-id array entry " + std::to_string(k) + " is null");
      }
      const int p = s.n.map_virtual(a, *v, true);
      a.backend[p] = s.q;
      slot2 = *v;
    } else {
      const auto& noise = s.n.hardware().noise;
      slot2 = sim_.measure(s.q, noise.prob_error_meas_0, noise.prob_error_meas_1);
      sim_.free_qubit(s.q);
    }
    ++s.n.stats_.pairs;
    const std::vector<std::int32_t> record{
        k,
        0,
        slot2,
        s.req.remote_node,
        s.req.socket_id,
        static_cast<std::int32_t>(std::lround(l.link_fidelity * 1e4)),
        static_cast<std::int32_t>(std::lround(l.cycle_time_ns / 1e3)),
        0,
        0,
        0};
    a.mem.array_write_block(s.req.entinfo_array, kEntInfoWidth * k, record);
  }
  na.notify(create.app);
  nb.notify(recv.app);
}

}  // namespace nqasm::qnpu
