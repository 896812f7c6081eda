# Copyright 2026 The nqasm Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the nqasm assembler, compiler and network simulator."""

import json
from pathlib import Path

from ._core import (NqasmError, assemble, canonical, config_digest,
                    disassemble)
from . import _core

__all__ = ["NqasmError", "assemble", "canonical", "disassemble", "compile_nv",
           "run_app", "run", "config_digest"]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def compile_nv(text, unit_module, mode="optimized"):
    """Vanilla listing to NV listing. unit_module is a dict or JSON text."""
    return _core.compile_nv(text, _text(unit_module), mode)


def run_app(network, app, app_dir=".", seed=0, shots=1):
    """Run with in-memory configs; returns the report as a dict."""
    return json.loads(_core.run_app(_text(network), _text(app), str(app_dir),
                                    seed, shots))


def run(app_dir, seed=0, shots=None, network=None, flavor=None):
    """Same as `nqasm run --app app_dir`."""
    app_dir = Path(app_dir)
    net = json.loads(Path(network or app_dir / "network.json").read_text())
    app = json.loads((app_dir / "app.json").read_text())
    if flavor:
        app["flavor"] = flavor
    if shots is None:
        shots = app.get("shots", 1)
    return run_app(net, app, app_dir, seed, shots)
