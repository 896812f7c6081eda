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


#include "nqasm/apps.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "nqasm/assembler.hpp"
#include "nqasm/error.hpp"

namespace nqasm::apps {

using nlohmann::json;
using host::decode_ints;

namespace {

constexpr const char* kHeader = "# NETQASM 1.0\n# APPID 0\n";

int mod8(int v) { return ((v % 8) + 8) % 8; }

std::int32_t reg(const shmem::AppView& view, char name, int index) {
  const auto v = view.reg(isa::make_register(name, index));
  if (!v) {
    throw Error(ErrorCode::kNullEntry,
                std::string("register ") + name + std::to_string(index) + " was not returned");
  }
  return *v;
}

json view_json(const shmem::AppView& view) {
  json j;
  j["registers"] = json::object();
  for (const auto& [r, v] : view.registers()) j["registers"][isa::to_string(r)] = v;
  j["arrays"] = json::object();
  for (const auto& [addr, entries] : view.arrays()) {
    json a = json::array();
    for (const auto& e : entries) a.push_back(e ? json(*e) : json(nullptr));
    j["arrays"][std::to_string(addr)] = std::move(a);
  }
  return j;
}

std::int32_t first_int(const Bytes& message) {
  const auto v = decode_ints(message);
  if (v.empty()) throw Error(ErrorCode::kTruncated, "empty classical message");
  return v[0];
}

std::uint64_t derive(std::uint64_t seed, int shot, int stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shot), static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// ---- teleportation

host::Program teleport_sender(host::Context& ctx, TeleportParams p) {
  // On NV the state has to leave the communication qubit for the EPR half.
  const int qubits = ctx.hardware().profile == Profile::kNv ? 3 : 2;
  ctx.register_app(qubits, {{0, p.receiver, 0, 0}});
  AppCompiler comp(ctx, p.flavoring);
  const auto view = co_await ctx.run(
      comp(vanilla(teleport_sender_source(p.state, ctx.node_id(p.receiver)))));
  const int m1 = reg(view, 'M', 0);
  const int m2 = reg(view, 'M', 1);
  ctx.output("m1", m1);
  ctx.output("m2", m2);
  ctx.output("compiled_moves", comp.moves());
  ctx.output("duration_ns", ctx.now());
  ctx.send_ints(p.receiver, {m1, m2});
}

host::Program teleport_receiver(host::Context& ctx, TeleportParams p) {
  ctx.register_app(ctx.hardware().profile == Profile::kNv ? 2 : 1, {{0, p.sender, 0, 0}});
  AppCompiler comp(ctx, p.flavoring);
  std::ostringstream recv;
  recv << "array 1 @0\narray 10 @1\nstore 0 @0[0]\n"
       << "recv_epr " << ctx.node_id(p.sender) << " 0 @0 @1\n"
       << "wait_all @1[0:10]\n";
  co_await ctx.run(comp(vanilla(recv.str())));
  const auto bits = decode_ints(co_await ctx.recv(p.sender));
  if (bits.size() != 2) throw Error(ErrorCode::kTruncated, "expected two correction bits");
  std::string fix = "set Q0 0\n";
  if (bits[1] != 0) fix += "x Q0\n";
  if (bits[0] != 0) fix += "z Q0\n";
  co_await ctx.run(comp(vanilla(fix)));
  ctx.output("fidelity", ctx.peek_fidelity(comp.qubit(0), pauli_state(p.state)));
  ctx.output("compiled_moves", comp.moves());
}

// ---- blind computation, trap rounds

std::string client_epr_source(int server, int base, int theta, bool dummy) {
  std::ostringstream s;
  s << "array 1 @" << base << "\narray 20 @" << base + 1 << "\narray 10 @" << base + 2 << "\n"
    << "store 0 @" << base << "[0]\n"
    << "create_epr " << server << " 0 @" << base << " @" << base + 1 << " @" << base + 2 << "\n"
    << "wait_all @" << base + 2 << "[0:10]\n"
    << "set Q0 0\n";
  if (!dummy) s << "rot_z Q0 " << mod8(theta) << " 2\nh Q0\n";
  s << "meas Q0 M0\nqfree Q0\nret_reg M0\n";
  return s.str();
}

std::string server_measure_source(int q, int delta) {
  std::ostringstream s;
  s << "set Q" << q << " " << q << "\n";
  if (q == 0) s << "set Q1 1\ncphase Q0 Q1\n";
  s << "rot_z Q" << q << " " << mod8(delta) << " 2\nh Q" << q << "\nmeas Q" << q
    << " M0\nqfree Q" << q << "\nret_reg M0\n";
  return s.str();
}

host::Program bqc_client(host::Context& ctx, BqcRound r) {
  ctx.register_app(1, {{0, r.server, 0, 0}});
  AppCompiler comp(ctx, r.flavoring);
  const int server = ctx.node_id(r.server);
  const auto v1 = co_await ctx.run(comp(vanilla(client_epr_source(server, 0, r.theta1, r.trap == 2))));
  const auto v2 = co_await ctx.run(comp(vanilla(client_epr_source(server, 3, r.theta2, r.trap == 1))));
  // Outcome of the remote state preparation, or the dummy bit.
  const int p1 = reg(v1, 'M', 0);
  const int p2 = reg(v2, 'M', 0);

  const int delta1 = r.trap == 2 ? r.alpha : r.alpha - r.theta1 + 4 * p1;
  ctx.send_ints(r.server, {mod8(delta1)});
  const int m1 = first_int(co_await ctx.recv(r.server));
  int delta2 = 0;
  if (r.trap == 1) {
    delta2 = r.beta;
  } else {
    const int sign = (r.trap == 0 && m1 != 0) ? -1 : 1;
    delta2 = sign * (r.beta - r.theta2 + 4 * p2);
  }
  ctx.send_ints(r.server, {mod8(delta2)});
  const int m2 = first_int(co_await ctx.recv(r.server));

  ctx.output("m1", m1);
  ctx.output("m2", m2);
  if (r.trap == 1) {
    ctx.output("trap_failed", m1 != (r.alpha / 4 + p2) % 2);
  } else if (r.trap == 2) {
    ctx.output("trap_failed", m2 != (r.beta / 4 + p1) % 2);
  }
}

host::Program bqc_server(host::Context& ctx, BqcRound r) {
  // On NV a spare storage slot lets qubit 0 return to the communication
  // qubit for its measurement while qubit 1 waits.
  ctx.register_app(ctx.hardware().profile == Profile::kNv ? 3 : 2, {{0, r.client, 0, 0}});
  AppCompiler comp(ctx, r.flavoring);
  const int client = ctx.node_id(r.client);
  std::ostringstream recv;
  recv << "array 1 @0\narray 10 @1\nstore 0 @0[0]\n"
       << "recv_epr " << client << " 0 @0 @1\nwait_all @1[0:10]\n"
       << "array 1 @2\narray 10 @3\nstore 1 @2[0]\n"
       << "recv_epr " << client << " 0 @2 @3\nwait_all @3[0:10]\n";
  co_await ctx.run(comp(vanilla(recv.str())));
  const int delta1 = first_int(co_await ctx.recv(r.client));
  const auto v1 = co_await ctx.run(comp(vanilla(server_measure_source(0, delta1))));
  ctx.send_ints(r.client, {reg(v1, 'M', 0)});
  const int delta2 = first_int(co_await ctx.recv(r.client));
  const auto v2 = co_await ctx.run(comp(vanilla(server_measure_source(1, delta2))));
  ctx.send_ints(r.client, {reg(v2, 'M', 0)});
  ctx.output("compiled_moves", comp.moves());
}

// ---- script

struct ScriptProgram {
  int qubits = 1;
  std::vector<host::SocketSpec> sockets;
  std::vector<isa::Subroutine> subroutines;
  std::vector<std::string> files;
};

host::Program script_driver(host::Context& ctx, ScriptProgram prog) {
  ctx.register_app(prog.qubits, prog.sockets);
  json results = json::array();
  for (std::size_t i = 0; i < prog.subroutines.size(); ++i) {
    auto view = co_await ctx.run(prog.subroutines[i]);
    json entry = view_json(view);
    entry["file"] = prog.files[i];
    results.push_back(std::move(entry));
  }
  ctx.output("results", std::move(results));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Standard error of the mean.
double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

Flavoring Flavoring::from_name(const std::string& name) {
  if (name == "vanilla") return vanilla();
  if (name == "num") return nv_num();
  if (name == "um") return nv_um();
  if (name == "nv") return nv_optimized();
  throw Error(ErrorCode::kConfig, "unknown flavor '" + name + "' (vanilla, num, um, nv)");
}

AppCompiler::AppCompiler(const host::Context& ctx, Flavoring flavoring) {
  const auto& um = ctx.unit_module();
  if (flavoring.nv && um.profile == Profile::kNv) {
    session_ = std::make_unique<compiler::NvSession>(um, flavoring.options);
  }
}

isa::Subroutine AppCompiler::operator()(const isa::Subroutine& sub) {
  if (!session_) return sub;
  compiler::CompileStats stats;
  auto out = session_->translate(sub, &stats);
  moves_ += stats.moves;
  if (isa::subroutine_flavor(out) == isa::Flavor::kNv) {
    sent_nv_ = true;
  } else if (!sent_nv_) {
    return sub;
  }
  return out;
}

int AppCompiler::qubit(int v) const {
  if (session_) {
    if (const auto p = session_->position(v)) return *p;
  }
  return v;
}

isa::Subroutine vanilla(const std::string& body) {
  return assembler::assemble(std::string(kHeader) + body);
}

qsim::Vector pauli_state(int index) {
  using C = std::complex<double>;
  const double h = 1.0 / std::sqrt(2.0);
  qsim::Vector v(2);
  switch (index) {
    case 0: v << 1.0, 0.0; break;
    case 1: v << 0.0, 1.0; break;
    case 2: v << h, h; break;
    case 3: v << h, -h; break;
    case 4: v << h, C(0.0, h); break;
    case 5: v << h, C(0.0, -h); break;
    default: throw Error(ErrorCode::kConfig, "Pauli state index " + std::to_string(index));
  }
  return v;
}

std::string pauli_preparation(int index) {
  static const char* kPrep[kPauliStates] = {
      "", "x Q0\n", "h Q0\n", "x Q0\nh Q0\n", "h Q0\ns Q0\n", "x Q0\nh Q0\ns Q0\n"};
  if (index < 0 || index >= kPauliStates) {
    throw Error(ErrorCode::kConfig, "Pauli state index " + std::to_string(index));
  }
  return kPrep[index];
}

std::string teleport_sender_source(int state, int receiver_node) {
  std::ostringstream s;
  s << "array 1 @0\narray 20 @1\narray 10 @2\nstore 1 @0[0]\n"
    << "set Q0 0\nqalloc Q0\ninit Q0\n"
    << pauli_preparation(state)
    << "create_epr " << receiver_node << " 0 @0 @1 @2\n"
    << "wait_all @2[0:10]\n"
    << "set Q1 1\ncnot Q0 Q1\nh Q0\nmeas Q0 M0\nqfree Q0\nmeas Q1 M1\nqfree Q1\n"
    << "ret_reg M0\nret_reg M1\n";
  return s.str();
}

std::map<std::string, host::Driver> teleport(const TeleportParams& params) {
  std::map<std::string, host::Driver> out;
  out[params.sender] = [params](host::Context& c) { return teleport_sender(c, params); };
  out[params.receiver] = [params](host::Context& c) { return teleport_receiver(c, params); };
  return out;
}

std::map<std::string, host::Driver> bqc(const BqcRound& round) {
  if (round.trap < 0 || round.trap > 2) {
    throw Error(ErrorCode::kConfig, "trap must be 0, 1 or 2");
  }
  std::map<std::string, host::Driver> out;
  out[round.client] = [round](host::Context& c) { return bqc_client(c, round); };
  out[round.server] = [round](host::Context& c) { return bqc_server(c, round); };
  return out;
}

std::map<std::string, host::Driver> script(const json& spec, const std::filesystem::path& base) {
  std::map<std::string, host::Driver> out;
  try {
    for (const auto& [node, p] : spec.at("programs").items()) {
      ScriptProgram prog;
      prog.qubits = p.value("qubits", 1);
      for (const auto& s : p.value("sockets", json::array())) {
        prog.sockets.push_back({s.at("id").get<std::int32_t>(), s.at("remote").get<std::string>(),
                                s.value("remote_id", s.at("id").get<std::int32_t>()),
                                s.value("min_fidelity", 0)});
      }
      for (const auto& f : p.at("subroutines")) {
        const auto file = f.get<std::string>();
        prog.subroutines.push_back(assembler::assemble(read_file(base / file)));
        prog.files.push_back(file);
      }
      out[node] = [prog](host::Context& c) { return script_driver(c, prog); };
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("script app: ") + e.what());
  }
  return out;
}

std::uint64_t shot_seed(std::uint64_t seed, int shot) { return derive(seed, shot, 0); }

std::string config_digest(const host::NetworkConfig& network, const json& app) {
  const json canonical = {{"network", host::to_json(network)}, {"app", app}};
  const std::string text = canonical.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kConfig, "SHA-256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

json run_app(const RunRequest& request) {
  request.network.check();
  if (request.shots < 1) throw Error(ErrorCode::kConfig, "shots must be >= 1");
  const auto& app = request.app;
  const std::string kind = app.value("app", std::string());
  const std::string flavor = app.value("flavor", std::string("vanilla"));
  const auto flavoring = Flavoring::from_name(flavor);

  json report;
  report["app"] = kind;
  report["flavor"] = flavor;
  report["seed"] = request.seed;
  report["shots"] = request.shots;
  report["config_digest"] = config_digest(request.network, app);

  json shots = json::array();
  std::vector<double> fidelities, trap_errors, durations, moves;
  double logical_time_ns = 0.0;
  json gates = json::object();
  json node_moves = json::object();
  for (int shot = 0; shot < request.shots; ++shot) {
    const auto seed = shot_seed(request.seed, shot);
    std::mt19937_64 app_rng(derive(request.seed, shot, 1));
    std::map<std::string, host::Driver> drivers;
    json params;
    std::string sender;
    if (kind == "teleport") {
      TeleportParams p;
      p.flavoring = flavoring;
      p.sender = app.value("sender", p.sender);
      p.receiver = app.value("receiver", p.receiver);
      p.state = app.contains("state") ? app.at("state").get<int>() : shot % kPauliStates;
      params["state"] = p.state;
      sender = p.sender;
      drivers = teleport(p);
    } else if (kind == "bqc") {
      BqcRound r;
      r.flavoring = flavoring;
      r.client = app.value("client", r.client);
      r.server = app.value("server", r.server);
      const auto rounds = app.value("rounds", std::string("trap"));
      const int combo = shot % 4;
      r.theta1 = combo & 1;
      r.theta2 = combo >> 1;
      if (rounds == "trap") {
        r.trap = 1 + (shot / 4) % 2;
        r.alpha = 4 * static_cast<int>(app_rng() & 1);
        r.beta = 4 * static_cast<int>(app_rng() & 1);
      } else if (rounds == "computation") {
        r.trap = 0;
        r.alpha = app.value("alpha", 0);
        r.beta = app.value("beta", 0);
      } else {
        throw Error(ErrorCode::kConfig, "rounds must be 'trap' or 'computation'");
      }
      params = {{"theta1", r.theta1}, {"theta2", r.theta2}, {"alpha", r.alpha},
                {"beta", r.beta}, {"trap", r.trap}};
      drivers = bqc(r);
    } else if (kind == "script") {
      drivers = script(app, request.app_dir);
    } else {
      throw Error(ErrorCode::kConfig, "unknown app '" + kind + "' (teleport, bqc, script)");
    }

    const auto result = host::run_network(request.network, drivers, seed);
    logical_time_ns += result.end_time_ns;
    for (const auto& [name, node] : result.nodes) {
      for (const auto& [gate, count] : node.stats.gates) {
        auto& g = gates[name];
        g[gate] = (g.is_object() ? g.value(gate, 0) : 0) + count;
      }
      int compiled = 0;
      if (node.outputs.contains("compiled_moves")) compiled = node.outputs["compiled_moves"].get<int>();
      node_moves[name] = node_moves.value(name, 0) + node.stats.moves + compiled;
    }
    json entry = result.to_json();
    entry.erase("trace");
    entry["shot"] = shot;
    entry["seed"] = seed;
    if (!params.is_null()) entry["params"] = params;
    if (kind == "teleport") {
      const auto& rx = result.nodes.at(app.value("receiver", std::string("bob")));
      const auto& tx = result.nodes.at(sender);
      fidelities.push_back(rx.outputs.at("fidelity").get<double>());
      durations.push_back(tx.outputs.at("duration_ns").get<double>());
      moves.push_back(tx.outputs.at("compiled_moves").get<double>() + tx.stats.moves);
    } else if (kind == "bqc") {
      const auto& client = result.nodes.at(app.value("client", std::string("client")));
      if (client.outputs.contains("trap_failed")) {
        trap_errors.push_back(client.outputs.at("trap_failed").get<bool>() ? 1.0 : 0.0);
      }
    }
    shots.push_back(std::move(entry));
  }

  json summary = json::object();
  summary["total_logical_time_ns"] = logical_time_ns;
  summary["gate_counts"] = std::move(gates);
  summary["moves"] = std::move(node_moves);
  if (!fidelities.empty()) {
    summary["fidelity_mean"] = mean(fidelities);
    summary["fidelity_se"] = std_error(fidelities);
    summary["sender_duration_ns_mean"] = mean(durations);
    summary["sender_moves_mean"] = mean(moves);
  }
  if (!trap_errors.empty()) {
    summary["trap_rounds"] = trap_errors.size();
    summary["trap_error_rate"] = mean(trap_errors);
    summary["trap_error_se"] = std_error(trap_errors);
  }
  report["summary"] = std::move(summary);
  report["results"] = std::move(shots);
  return report;
}

}  // namespace nqasm::apps
