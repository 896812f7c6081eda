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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "nqasm/apps.hpp"
#include "nqasm/assembler.hpp"
#include "nqasm/codec.hpp"
#include "nqasm/compiler.hpp"
#include "nqasm/error.hpp"
#include "nqasm/host.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::bytes to_bytes(const nqasm::Bytes& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

nqasm::compiler::Mode parse_mode(const std::string& mode) {
  if (mode == "adhoc") return nqasm::compiler::Mode::kAdhoc;
  if (mode == "optimized") return nqasm::compiler::Mode::kOptimized;
  throw nqasm::Error(nqasm::ErrorCode::kConfig, "mode must be 'adhoc' or 'optimized'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "nqasm core bindings; JSON crosses the boundary as text";

  static py::exception<nqasm::Error> error(m, "NqasmError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nqasm::Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(nqasm::to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("assemble",
        [](const std::string& text) {
          return to_bytes(nqasm::codec::encode(nqasm::assembler::assemble(text)));
        },
        py::arg("text"), "Assemble source text to the binary encoding.");
  m.def("canonical",
        [](const std::string& text, bool lower_operands) {
          return nqasm::assembler::print(
              nqasm::assembler::assemble(text, {.lower_operands = lower_operands}));
        },
        py::arg("text"), py::arg("lower_operands") = true,
        "Resolved listing in canonical text form.");
  m.def("disassemble",
        [](const py::bytes& data) {
          const std::string s = data;
          return nqasm::assembler::print(nqasm::codec::decode(nqasm::Bytes(s.begin(), s.end())));
        },
        py::arg("data"));
  m.def("compile_nv",
        [](const std::string& text, const std::string& unit_module, const std::string& mode) {
          const auto um = nqasm::unit_module_from_json(json::parse(unit_module));
          const auto sub = nqasm::assembler::assemble(text);
          const auto out = nqasm::compiler::translate_vanilla_to_nv(sub, um, parse_mode(mode));
          const auto counts = nqasm::compiler::gate_counts(out, um);
          py::dict stats;
          stats["two_qubit_ops"] = counts.two_qubit_ops;
          stats["moves"] = counts.moves;
          stats["duration_ns"] = counts.duration_ns;
          return py::make_tuple(nqasm::assembler::print(out), stats);
        },
        py::arg("text"), py::arg("unit_module"), py::arg("mode") = "optimized",
        "Translate a vanilla program to the NV flavor; returns (listing, stats).");
  m.def("run_app",
        [](const std::string& network, const std::string& app, const std::string& app_dir,
           std::uint64_t seed, int shots) {
          nqasm::apps::RunRequest r;
          r.network = nqasm::host::network_config_from_json(json::parse(network));
          r.app = json::parse(app);
          r.app_dir = app_dir;
          r.seed = seed;
          r.shots = shots;
          py::gil_scoped_release release;
          return nqasm::apps::run_app(r).dump();
        },
        py::arg("network"), py::arg("app"), py::arg("app_dir") = ".", py::arg("seed") = 0,
        py::arg("shots") = 1, "Run an app; returns the report as JSON text.");
  m.def("config_digest", [](const std::string& network, const std::string& app) {
    return nqasm::apps::config_digest(nqasm::host::network_config_from_json(json::parse(network)),
                                      json::parse(app));
  });
}
