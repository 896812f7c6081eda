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


// nqasm: assembler, disassembler, NV compiler and network simulator.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nqasm/apps.hpp"
#include "nqasm/assembler.hpp"
#include "nqasm/codec.hpp"
#include "nqasm/compiler.hpp"
#include "nqasm/error.hpp"
#include "nqasm/host.hpp"
#include "nqasm/isa.hpp"
#include "nqasm/unit_module.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiagnostic = 1;
constexpr int kExitDeadlock = 2;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nqasm::Error(nqasm::ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_bytes(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw nqasm::Error(nqasm::ErrorCode::kIo, "cannot write " + path.string());
  out << data;
  if (!out) throw nqasm::Error(nqasm::ErrorCode::kIo, "write failed: " + path.string());
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw nqasm::Error(nqasm::ErrorCode::kConfig, path.string() + ": " + e.what());
  }
}

// Text sources are assembled; anything starting with the binary magic is
// decoded.
nqasm::isa::Subroutine load_program(const fs::path& path, nqasm::assembler::ResolveReport* report) {
  const std::string data = read_text(path);
  const nqasm::Bytes bytes(data.begin(), data.end());
  try {
    return nqasm::codec::decode(bytes);
  } catch (const nqasm::Error& e) {
    if (e.code() != nqasm::ErrorCode::kBadMagic) throw;
  }
  return nqasm::assembler::assemble(data, {}, report);
}

void print_warnings(const std::string& file, const std::vector<nqasm::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << file << ": " << nqasm::to_string(d) << "\n";
}

int cmd_assemble(const std::string& in, const std::string& out) {
  nqasm::assembler::ResolveReport report;
  const auto sub = nqasm::assembler::assemble(read_text(in), {}, &report);
  print_warnings(in, report.warnings);
  const auto bytes = nqasm::codec::encode(sub);
  write_bytes(out, std::string(bytes.begin(), bytes.end()));
  std::cout << "instructions: " << sub.instructions.size() << "\n"
            << "set insertions: " << report.set_insertions << "\n"
            << "lea insertions: " << report.lea_insertions << "\n"
            << "bytes: " << bytes.size() << "\n";
  return kExitOk;
}

int cmd_disassemble(const std::string& in, const std::string& out) {
  const std::string data = read_text(in);
  const auto text = nqasm::assembler::print(nqasm::codec::decode(nqasm::Bytes(data.begin(), data.end())));
  if (out.empty()) {
    std::cout << text;
  } else {
    write_bytes(out, text);
  }
  return kExitOk;
}

struct CompileArgs {
  std::string flavor = "nv";
  std::string unit_module;
  bool adhoc = false;
  bool optimized = false;
  std::string in;
  std::string out;
};

int cmd_compile(const CompileArgs& a) {
  const auto um = nqasm::unit_module_from_json(read_json(a.unit_module));
  nqasm::assembler::ResolveReport report;
  const auto sub = load_program(a.in, &report);
  print_warnings(a.in, report.warnings);

  nqasm::isa::Subroutine result = sub;
  if (a.flavor == "nv") {
    if (um.profile != nqasm::Profile::kNv) {
      throw nqasm::Error(nqasm::ErrorCode::kWrongFlavor,
                         "--flavor nv needs an NV unit module, got profile '" +
                             std::string(nqasm::to_string(um.profile)) + "'");
    }
    const auto diags = nqasm::compiler::validate(sub, um, false);
    print_warnings(a.in, diags);
    if (nqasm::has_errors(diags)) return kExitDiagnostic;
    const auto mode = a.optimized ? nqasm::compiler::Mode::kOptimized : nqasm::compiler::Mode::kAdhoc;
    result = nqasm::compiler::translate_vanilla_to_nv(sub, um, mode);
  } else if (a.flavor == "vanilla") {
    const auto diags = nqasm::compiler::validate(sub, um);
    print_warnings(a.in, diags);
    if (nqasm::has_errors(diags)) return kExitDiagnostic;
  } else {
    throw nqasm::Error(nqasm::ErrorCode::kConfig, "unknown flavor '" + a.flavor + "' (nv, vanilla)");
  }

  const auto text = nqasm::assembler::print(result);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_bytes(a.out, text);
  }
  const auto counts = nqasm::compiler::gate_counts(result, um);
  std::cout << "two_qubit_ops: " << counts.two_qubit_ops << "\n"
            << "moves: " << counts.moves << "\n"
            << "duration_ns: " << std::setprecision(17) << counts.duration_ns << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string network;
  std::string app;
  std::optional<std::uint64_t> seed;
  int shots = 0;
  std::string report;
  std::string csv;
  std::string flavor;
  std::optional<double> two_qubit_fidelity;
};

std::uint64_t pick_seed(const RunArgs& a, const nqasm::host::NetworkConfig& config) {
  if (a.seed) return *a.seed;
  if (const char* env = std::getenv("NQASM_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw nqasm::Error(nqasm::ErrorCode::kConfig, std::string("NQASM_SEED is not a number: ") + env);
    }
  }
  return config.seed.value_or(0);
}

std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void write_csv(const fs::path& path, const json& report) {
  // One row per shot; columns are the scalar outputs of every node.
  std::vector<std::pair<std::string, std::string>> columns;
  if (!report["results"].empty()) {
    for (const auto& [node, r] : report["results"][0]["nodes"].items()) {
      for (const auto& [key, v] : r["outputs"].items()) {
        if (v.is_primitive()) columns.emplace_back(node, key);
      }
    }
  }
  std::ostringstream s;
  s << "shot,seed,end_time_ns";
  for (const auto& [node, key] : columns) s << "," << node << "." << key;
  s << "\n";
  for (const auto& shot : report["results"]) {
    s << shot["shot"].dump() << "," << shot["seed"].dump() << "," << shot["end_time_ns"].dump();
    for (const auto& [node, key] : columns) {
      const auto& outputs = shot["nodes"][node]["outputs"];
      s << "," << (outputs.contains(key) ? csv_cell(outputs[key]) : "");
    }
    s << "\n";
  }
  write_bytes(path, s.str());
}

int cmd_run(const RunArgs& a) {
  const fs::path app_dir = a.app;
  const fs::path network_path = a.network.empty() ? app_dir / "network.json" : fs::path(a.network);
  json network = read_json(network_path);
  if (a.two_qubit_fidelity) {
    for (auto& node : network.at("nodes")) {
      if (node.value("profile", std::string("generic")) == "nv") {
        node["two_qubit_fidelity"] = *a.two_qubit_fidelity;
      }
    }
  }
  json app = read_json(app_dir / "app.json");
  if (!a.flavor.empty()) app["flavor"] = a.flavor;

  nqasm::apps::RunRequest request;
  request.network = nqasm::host::network_config_from_json(network);
  request.app = app;
  request.app_dir = app_dir;
  request.seed = pick_seed(a, request.network);
  request.shots = a.shots > 0 ? a.shots : app.value("shots", 1);

  const json report = nqasm::apps::run_app(request);
  const std::string text = report.dump(2) + "\n";
  if (a.report.empty()) {
    std::cout << text;
  } else {
    write_bytes(a.report, text);
  }
  if (!a.csv.empty()) write_csv(a.csv, report);

  const auto& summary = report["summary"];
  std::cerr << "shots: " << request.shots << "  seed: " << request.seed << "\n";
  if (summary.contains("fidelity_mean")) {
    std::cerr << "mean fidelity: " << summary["fidelity_mean"].get<double>() << " +- "
              << summary["fidelity_se"].get<double>() << "\n";
  }
  if (summary.contains("trap_error_rate")) {
    std::cerr << "trap error rate: " << summary["trap_error_rate"].get<double>() << " +- "
              << summary["trap_error_se"].get<double>() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"NetQASM toolchain and simulator"};
  cli.require_subcommand(1);

  std::string in, out;
  auto* assemble = cli.add_subcommand("assemble", "text -> binary");
  assemble->add_option("input", in, "source file")->required();
  assemble->add_option("-o,--output", out, "binary output")->required();

  auto* disassemble = cli.add_subcommand("disassemble", "binary -> canonical text");
  disassemble->add_option("input", in, "binary file")->required();
  disassemble->add_option("-o,--output", out, "text output (default stdout)");

  CompileArgs ca;
  auto* compile = cli.add_subcommand("compile", "translate vanilla code for a unit module");
  compile->add_option("--flavor", ca.flavor, "target flavor: nv or vanilla")->capture_default_str();
  compile->add_option("--unit-module", ca.unit_module, "unit module JSON")->required();
  auto* adhoc = compile->add_flag("--adhoc,--adhoc-order", ca.adhoc, "lowering only, program order");
  compile->add_flag("--optimized", ca.optimized, "measurement reordering, peephole, rotation sinking")
      ->excludes(adhoc);
  compile->add_option("input", ca.in, "vanilla source or binary")->required();
  compile->add_option("-o,--output", ca.out, "NV text output (default stdout)");

  RunArgs ra;
  auto* run = cli.add_subcommand("run", "run an application on a simulated network");
  run->add_option("--network", ra.network, "network config JSON (default <app>/network.json)");
  run->add_option("--app", ra.app, "application directory with app.json")->required();
  run->add_option("--seed", ra.seed, "run seed (default $NQASM_SEED, then the config seed)");
  run->add_option("--shots", ra.shots, "number of shots (default from app.json, else 1)");
  run->add_option("--report", ra.report, "JSON report path (default stdout)");
  run->add_option("--csv", ra.csv, "also write one CSV row per shot");
  run->add_option("--flavor", ra.flavor, "override the app flavor: vanilla, num, um, nv");
  run->add_option("--two-qubit-fidelity", ra.two_qubit_fidelity,
                  "override the two-qubit gate fidelity of NV nodes");

  cli.add_subcommand("isa", "print the instruction table");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitDiagnostic;
  }

  try {
    if (*assemble) return cmd_assemble(in, out);
    if (*disassemble) return cmd_disassemble(in, out);
    if (*compile) {
      in = ca.in;
      return cmd_compile(ca);
    }
    if (*run) return cmd_run(ra);
    std::cout << nqasm::isa::isa_table();
    return kExitOk;
  } catch (const nqasm::host::DeadlockError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDeadlock;
  } catch (const nqasm::Error& e) {
    std::cerr << (in.empty() ? std::string() : in + ":");
    if (e.location()) std::cerr << *e.location() << ":";
    std::cerr << (in.empty() ? "" : " ") << "error: " << e.what() << "\n";
    return kExitDiagnostic;
  }
}
