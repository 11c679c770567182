# Copyright 2026 The kprop Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the kprop emulator, agent and log analysis."""

import json
import os

from kprop._kprop import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_TIMEOUT,
    ConfigError,
    Error,
    MalformedEntry,
    cli,
    edges,
    format_millis,
    histogram,
    parse_duration,
)
from kprop import _kprop

__all__ = [
    "EXIT_ERROR", "EXIT_OK", "EXIT_TIMEOUT", "ConfigError", "Error", "MalformedEntry",
    "builtin_spec", "cli", "edges", "format_millis", "histogram", "parse_duration",
    "parse_entry", "records", "run",
]


def builtin_spec(name="deployment-add-delete", seed=0, repeat=1, **params):
    """Run spec (a params.snapshot dict) for a builtin scenario."""
    return json.loads(_kprop.builtin_snapshot_json(name, json.dumps(params), seed, repeat))


def run(spec, run_dir):
    """Runs a spec dict into run_dir and returns the per-repetition summary."""
    return json.loads(_kprop.run_json(json.dumps(spec), os.fspath(run_dir)))


def parse_entry(line):
    """Parses one agent log line into a dict, validating it on the way."""
    return json.loads(_kprop.parse_entry_json(line))


def records(logs, rules, mode="sameop"):
    """Propagation records over the given log files.

    rules is YAML or JSON text in the dependency file format.
    """
    return json.loads(_kprop.records_json([os.fspath(p) for p in logs], rules, mode))
