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


#include "nqasm/host.hpp"

#include <regex>
#include <set>
#include <sstream>

#include "nqasm/codec.hpp"

namespace nqasm::host {

using nlohmann::json;

// ---------------------------------------------------------------- config

void NetworkConfig::check() const {
  std::set<int> ids;
  std::set<std::string> names;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second) throw Error(ErrorCode::kConfig, "duplicate node id " + std::to_string(n.id));
    if (!names.insert(n.name).second) throw Error(ErrorCode::kConfig, "duplicate node name " + n.name);
    n.hardware.check();
  }
  for (const auto& l : links) {
    if (!names.contains(l.a) || !names.contains(l.b) || l.a == l.b) {
      throw Error(ErrorCode::kConfig, "link " + l.a + "-" + l.b + " names an unknown node");
    }
  }
  if (classical_latency_ns < 0) throw Error(ErrorCode::kConfig, "negative classical latency");
}

const NodeSpec& NetworkConfig::node(const std::string& name) const {
  for (const auto& n : nodes) {
    if (n.name == name) return n;
  }
  throw Error(ErrorCode::kConfig, "no node named " + name);
}

bool NetworkConfig::has_node(const std::string& name) const {
  for (const auto& n : nodes) {
    if (n.name == name) return true;
  }
  return false;
}

NetworkConfig network_config_from_json(const json& j) {
  try {
    NetworkConfig c;
    int index = 0;
    for (const auto& n : j.at("nodes")) {
      NodeSpec s;
      s.name = n.at("name").get<std::string>();
      s.id = n.value("id", index);
      s.hardware = unit_module_from_json(n);
      c.nodes.push_back(std::move(s));
      ++index;
    }
    for (const auto& l : j.value("links", json::array())) {
      LinkSpec s;
      const auto ends = l.at("nodes").get<std::vector<std::string>>();
      if (ends.size() != 2) throw Error(ErrorCode::kConfig, "a link joins two nodes");
      s.a = ends[0];
      s.b = ends[1];
      s.link_fidelity = l.value("link_fidelity", 1.0);
      s.cycle_time_ns = l.value("cycle_time_ns", 1e5);
      c.links.push_back(std::move(s));
    }
    c.classical_latency_ns = j.value("classical_latency_ns", 0.0);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.check();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("network config: ") + e.what());
  }
}

json to_json(const NetworkConfig& config) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : config.nodes) {
    json node = nqasm::to_json(n.hardware);
    node["name"] = n.name;
    node["id"] = n.id;
    j["nodes"].push_back(std::move(node));
  }
  j["links"] = json::array();
  for (const auto& l : config.links) {
    j["links"].push_back({{"nodes", {l.a, l.b}},
                          {"link_fidelity", l.link_fidelity},
                          {"cycle_time_ns", l.cycle_time_ns}});
  }
  j["classical_latency_ns"] = config.classical_latency_ns;
  if (config.seed) j["seed"] = *config.seed;
  return j;
}

// ---------------------------------------------------------------- Program

Program& Program::operator=(Program&& other) noexcept {
  if (this != &other) {
    if (handle_) handle_.destroy();
    handle_ = std::exchange(other.handle_, {});
  }
  return *this;
}

Program::~Program() {
  if (handle_) handle_.destroy();
}

// ---------------------------------------------------------------- Runner

class Runner {
 public:
  Runner(const NetworkConfig& config, std::uint64_t seed, const RunOptions& options)
      : config_(config), net_(qnpu_nodes(config), qnpu_links(config), seed, options.two_qubit_noise) {
    if (options.deadline_ns) net_.scheduler().set_deadline(options.deadline_ns);
    for (const auto& n : config.nodes) {
      auto& q = net_.node(n.id);
      const std::string name = n.name;
      // The final view travels as a MemoryUpdate right before Done.
      q.on_done([this, name](int app, std::int32_t id, const shmem::AppView& view) {
        from_qnpu(name, app, {id, protocol::MemoryUpdate{app, view}});
        from_qnpu(name, app, {id, protocol::Done{}});
      });
      q.on_memory_update([this, name](int app, std::int32_t id, const shmem::AppView& view) {
        from_qnpu(name, app, {id, protocol::MemoryUpdate{app, view}});
      });
    }
  }

  RunResult run(const std::map<std::string, Driver>& drivers) {
    for (const auto& [name, driver] : drivers) {
      const auto& spec = config_.node(name);
      contexts_[name] = std::unique_ptr<Context>(new Context(*this, name));
      programs_[name] = driver(*contexts_[name]);
      net_.scheduler().at(0.0, spec.id, [this, name] {
        resume(name, programs_[name].handle());
      });
    }
    net_.scheduler().run();

    DeadlockReport report;
    for (const auto& [name, p] : programs_) {
      if (p.done()) continue;
      const Context& c = *contexts_[name];
      std::string what = "running";
      if (c.awaiting_done_) what = "Done of message " + std::to_string(*c.awaiting_done_);
      if (c.awaiting_peer_) what = "classical message from " + *c.awaiting_peer_;
      report.drivers.emplace_back(name, what);
    }
    if (!report.drivers.empty()) {
      report.waits = net_.blocked();
      throw DeadlockError(std::move(report));
    }

    RunResult out;
    for (const auto& n : config_.nodes) {
      NodeResult r;
      if (contexts_.contains(n.name)) r.outputs = contexts_[n.name]->outputs();
      r.stats = net_.node(n.id).stats();
      r.end_time_ns = std::max(r.stats.end_time_ns, finished_at_[n.name]);
      out.end_time_ns = std::max(out.end_time_ns, r.end_time_ns);
      out.nodes[n.name] = std::move(r);
    }
    out.trace = std::move(trace_);
    return out;
  }

  // Application layer -> QNPU. Replies that are immediate (registration)
  // are delivered before this returns.
  void to_qnpu(Context& ctx, const protocol::Message& msg) {
    const Bytes frame = protocol::encode_message(msg);
    const auto decoded = protocol::decode_message(frame);
    const auto& spec = config_.node(ctx.node_);
    auto& q = net_.node(spec.id);
    int app = -1;
    std::visit([&app](const auto& p) {
      if constexpr (requires { p.app_id; }) app = p.app_id;
    }, decoded.payload);
    const std::size_t entry = trace_.size();
    trace_.push_back({ctx.node_, app, true, protocol::type_of(decoded), decoded.message_id, now()});

    if (const auto* reg = std::get_if<protocol::RegisterApp>(&decoded.payload)) {
      protocol::Message reply{decoded.message_id, protocol::RegisterAppOk{}};
      try {
        const int id = q.register_app({reg->qubits, reg->sockets});
        reply.payload = protocol::RegisterAppOk{id};
        owners_[{spec.id, id}] = &ctx;
        trace_[entry].app_id = id;
      } catch (const Error& e) {
        reply.payload = protocol::RegisterAppErr{e.code()};
      }
      const int id = trace_[entry].app_id;
      deliver(ctx, id, reply);
    } else if (const auto* sub = std::get_if<protocol::SubroutineMsg>(&decoded.payload)) {
      if (!q.has_app(sub->app_id)) {
        throw Error(ErrorCode::kNoSuchApp, "node " + ctx.node_ + ": no app " + std::to_string(sub->app_id));
      }
      auto s = codec::decode(sub->subroutine);
      if (s.app_id != sub->app_id) {
        throw Error(ErrorCode::kNoSuchApp, "subroutine app id " + std::to_string(s.app_id) +
                                               " does not match message app id " +
                                               std::to_string(sub->app_id));
      }
      q.submit(sub->app_id, std::move(s), decoded.message_id);
    } else if (const auto* stop = std::get_if<protocol::StopApp>(&decoded.payload)) {
      q.stop_app(stop->app_id);
    } else {
      throw Error(ErrorCode::kProtocolOrder, std::string(protocol::to_string(protocol::type_of(decoded))) +
                                                 " is not sent by the application layer");
    }
  }

  void from_qnpu(const std::string& node, int app, const protocol::Message& msg) {
    const auto it = owners_.find({config_.node(node).id, app});
    if (it == owners_.end()) return;
    deliver(*it->second, app, msg);
  }

  void deliver(Context& ctx, int app, const protocol::Message& msg) {
    const Bytes frame = protocol::encode_message(msg);
    trace_.push_back({ctx.node_, app, false, protocol::type_of(msg), msg.message_id, now()});
    ctx.deliver_from_qnpu(frame);
  }

  void resume(const std::string& name, std::coroutine_handle<> h) {
    h.resume();
    auto& p = programs_[name];
    if (auto err = p.handle().promise().error) {
      p.handle().promise().error = nullptr;
      std::rethrow_exception(err);
    }
    if (p.done()) {
      finished_at_[name] = now();
      Context& c = *contexts_[name];
      if (!c.stopped_) c.stop();
    }
  }

  double now() const { return const_cast<qnpu::Network&>(net_).scheduler().now(); }
  qnpu::Network& network() { return net_; }
  const NetworkConfig& config() const { return config_; }
  Context* context(const std::string& name) {
    const auto it = contexts_.find(name);
    return it == contexts_.end() ? nullptr : it->second.get();
  }

 private:
  static std::vector<qnpu::NodeConfig> qnpu_nodes(const NetworkConfig& c) {
    c.check();
    std::vector<qnpu::NodeConfig> out;
    for (const auto& n : c.nodes) out.push_back({n.id, n.name, n.hardware});
    return out;
  }
  static std::vector<qnpu::LinkConfig> qnpu_links(const NetworkConfig& c) {
    std::vector<qnpu::LinkConfig> out;
    for (const auto& l : c.links) {
      out.push_back({c.node(l.a).id, c.node(l.b).id, l.link_fidelity, l.cycle_time_ns});
    }
    return out;
  }

  const NetworkConfig& config_;
  qnpu::Network net_;
  std::map<std::string, std::unique_ptr<Context>> contexts_;
  std::map<std::string, Program> programs_;
  std::map<std::string, double> finished_at_;
  std::map<std::pair<int, int>, Context*> owners_;
  std::vector<TraceEntry> trace_;
};

// ---------------------------------------------------------------- Context

int Context::node_id() const { return runner_.config().node(node_).id; }

int Context::node_id(const std::string& name) const { return runner_.config().node(name).id; }

double Context::now() const { return runner_.now(); }

int Context::register_app(int qubits, const std::vector<SocketSpec>& sockets) {
  if (registered() || stopped_) {
    throw Error(ErrorCode::kProtocolOrder, node_ + ": RegisterApp sent twice");
  }
  protocol::RegisterApp msg;
  msg.qubits = qubits;
  for (const auto& s : sockets) {
    if (!runner_.config().has_node(s.remote)) {
      throw Error(ErrorCode::kNoSuchSocket, "socket " + std::to_string(s.socket_id) +
                                                ": unknown node " + s.remote);
    }
    msg.sockets.push_back({s.socket_id, node_id(s.remote), s.remote_socket, s.min_fidelity});
  }
  reply_.reset();
  runner_.to_qnpu(*this, {next_message_id_++, std::move(msg)});
  if (!reply_) throw Error(ErrorCode::kProtocolOrder, "no reply to RegisterApp");
  const auto reply = std::move(*reply_);
  reply_.reset();
  if (const auto* err = std::get_if<protocol::RegisterAppErr>(&reply.payload)) {
    throw Error(err->error_code, node_ + ": registration refused");
  }
  app_id_ = std::get<protocol::RegisterAppOk>(reply.payload).app_id;
  return app_id_;
}

const UnitModule& Context::unit_module() const {
  if (!registered()) throw Error(ErrorCode::kProtocolOrder, "app not registered");
  return runner_.network().node(node_id()).unit_module(app_id_);
}

const UnitModule& Context::hardware() const {
  return runner_.config().node(node_).hardware;
}

void Context::RunAwaiter::await_suspend(std::coroutine_handle<> h) {
  if (!ctx->registered()) {
    throw Error(ErrorCode::kProtocolOrder, ctx->node_ + ": Subroutine before RegisterAppOK");
  }
  if (ctx->stopped_) {
    throw Error(ErrorCode::kNoSuchApp, ctx->node_ + ": Subroutine after StopApp");
  }
  const std::int32_t id = ctx->next_message_id_++;
  sub.app_id = ctx->app_id_;
  ctx->awaiting_done_ = id;
  ctx->waiting_ = h;
  ctx->runner_.to_qnpu(*ctx, {id, protocol::SubroutineMsg{ctx->app_id_, codec::encode(sub)}});
}

shmem::AppView Context::RunAwaiter::await_resume() { return ctx->view_; }

void Context::deliver_from_qnpu(const Bytes& frame) {
  auto msg = protocol::decode_message(frame);
  switch (protocol::type_of(msg)) {
    case protocol::MessageType::kRegisterAppOk:
    case protocol::MessageType::kRegisterAppErr:
      reply_ = std::move(msg);
      break;
    case protocol::MessageType::kMemoryUpdate:
      view_ = std::get<protocol::MemoryUpdate>(msg.payload).view;
      ++memory_updates_;
      break;
    case protocol::MessageType::kDone:
      if (awaiting_done_ == msg.message_id) {
        awaiting_done_.reset();
        resume();
      }
      break;
    default:
      throw Error(ErrorCode::kProtocolOrder, "unexpected message from the QNPU");
  }
}

void Context::send(const std::string& peer, Bytes message) {
  Context* other = runner_.context(peer);
  if (!other) throw Error(ErrorCode::kConfig, node_ + ": no driver on node " + peer);
  if (other->stopped_) throw Error(ErrorCode::kPeerClosed, node_ + ": " + peer + " has stopped");
  if (stopped_) throw Error(ErrorCode::kPeerClosed, node_ + " has stopped");
  const std::string from = node_;
  ++other->in_flight_[from];
  runner_.network().scheduler().after(runner_.config().classical_latency_ns, other->node_id(),
                                      [other, from, m = std::move(message)]() mutable {
                                        other->deliver_classical(from, std::move(m));
                                      });
}

void Context::send_ints(const std::string& peer, const std::vector<std::int32_t>& values) {
  ByteWriter w;
  for (const auto v : values) w.i32(v);
  send(peer, w.take());
}

std::vector<std::int32_t> decode_ints(const Bytes& message) {
  if (message.size() % 4 != 0) throw Error(ErrorCode::kTruncated, "integer message");
  ByteReader r(message);
  std::vector<std::int32_t> out;
  while (r.remaining() > 0) out.push_back(r.i32());
  return out;
}

void Context::deliver_classical(const std::string& from, Bytes message) {
  --in_flight_[from];
  inbox_[from].push_back(std::move(message));
  if (awaiting_peer_ == from) {
    awaiting_peer_.reset();
    resume();
  }
}

bool Context::RecvAwaiter::await_ready() const {
  const auto it = ctx->inbox_.find(peer);
  if (it != ctx->inbox_.end() && !it->second.empty()) return true;
  const Context* other = ctx->runner_.context(peer);
  return other == nullptr || (other->stopped_ && ctx->in_flight(peer) == 0);
}

void Context::RecvAwaiter::await_suspend(std::coroutine_handle<> h) {
  ctx->awaiting_peer_ = peer;
  ctx->waiting_ = h;
}

Bytes Context::RecvAwaiter::await_resume() {
  auto& q = ctx->inbox_[peer];
  if (q.empty()) throw Error(ErrorCode::kPeerClosed, ctx->node_ + ": " + peer + " has stopped");
  Bytes m = std::move(q.front());
  q.pop_front();
  return m;
}

void Context::stop() {
  if (stopped_) return;
  if (registered()) runner_.to_qnpu(*this, {next_message_id_++, protocol::StopApp{app_id_}});
  stopped_ = true;
  // Wake peers blocked on us so their recv fails instead of hanging.
  for (const auto& n : runner_.config().nodes) {
    Context* other = runner_.context(n.name);
    if (other && other->awaiting_peer_ == node_ && other->inbox_[node_].empty() &&
        other->in_flight(node_) == 0) {
      other->awaiting_peer_.reset();
      runner_.network().scheduler().after(0.0, other->node_id(), [other] { other->resume(); });
    }
  }
}

void Context::resume() {
  auto h = std::exchange(waiting_, {});
  if (h) runner_.resume(node_, h);
}

double Context::peek_fidelity(int virtual_id, const qsim::Vector& psi) const {
  const auto q = runner_.network().node(node_id()).backend_qubit(app_id_, virtual_id);
  if (!q) throw Error(ErrorCode::kQubitNotAllocated, "qubit " + std::to_string(virtual_id));
  const std::array<qsim::QubitId, 1> qs{*q};
  return runner_.network().simulator().fidelity(qs, psi);
}

// ---------------------------------------------------------------- results

json RunResult::to_json() const {
  json j;
  j["end_time_ns"] = end_time_ns;
  j["nodes"] = json::object();
  for (const auto& [name, r] : nodes) {
    j["nodes"][name] = {{"outputs", r.outputs},
                        {"end_time_ns", r.end_time_ns},
                        {"gates", r.stats.gates},
                        {"two_qubit_gates", r.stats.two_qubit_gates},
                        {"moves", r.stats.moves},
                        {"pairs", r.stats.pairs}};
  }
  return j;
}

std::string DeadlockReport::describe() const {
  std::ostringstream s;
  s << "deadlock:";
  const char* sep = " ";
  for (const auto& [name, what] : drivers) {
    s << sep << "driver " << name << " waits for " << what;
    sep = "; ";
  }
  for (const auto& w : waits) {
    s << sep << "node " << w.node << " app " << w.app << " blocked at instruction "
      << w.instruction << " (" << w.text << ")";
    sep = "; ";
  }
  return s.str();
}

RunResult run_network(const NetworkConfig& config, const std::map<std::string, Driver>& drivers,
                      std::uint64_t seed, const RunOptions& options) {
  for (const auto& [name, d] : drivers) {
    if (!config.has_node(name)) throw Error(ErrorCode::kConfig, "driver for unknown node " + name);
  }
  Runner runner(config, seed, options);
  return runner.run(drivers);
}

bool trace_conforms(const std::vector<TraceEntry>& trace, std::string* why) {
  using protocol::MessageType;
  std::map<std::pair<std::string, int>, std::string> letters;
  std::map<std::pair<std::string, int>, std::vector<std::int32_t>> ids;
  std::vector<std::pair<std::string, int>> order;
  for (const auto& e : trace) {
    const auto key = std::make_pair(e.node, e.app_id);
    if (!letters.contains(key)) order.push_back(key);
    char c = '?';
    switch (e.type) {
      case MessageType::kRegisterApp: c = 'R'; break;
      case MessageType::kRegisterAppOk: c = 'O'; break;
      case MessageType::kRegisterAppErr: c = 'E'; break;
      case MessageType::kSubroutine: c = 'S'; ids[key].push_back(e.message_id); break;
      case MessageType::kMemoryUpdate: c = 'U'; break;
      case MessageType::kDone: c = 'D'; ids[key].push_back(e.message_id); break;
      case MessageType::kStopApp: c = 'X'; break;
    }
    letters[key] += c;
  }
  static const std::regex kPattern("^(RE|RO(SU*D)*X)$");
  for (const auto& key : order) {
    const auto& s = letters[key];
    bool ok = std::regex_match(s, kPattern);
    // Each Done names the subroutine just before it.
    const auto& v = ids[key];
    for (std::size_t i = 0; ok && i + 1 < v.size(); i += 2) ok = v[i] == v[i + 1];
    if (!ok) {
      if (why) *why = key.first + " app " + std::to_string(key.second) + ": " + s;
      return false;
    }
  }
  return true;
}

}  // namespace nqasm::host
