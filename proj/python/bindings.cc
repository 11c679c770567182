// Copyright 2026 The kprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Structured values cross the boundary as JSON text; the
// kprop package decodes them into plain dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "kprop/aggregator.h"
#include "kprop/cli.h"
#include "kprop/config.h"
#include "kprop/deps.h"
#include "kprop/errors.h"
#include "kprop/log_format.h"
#include "kprop/runner.h"
#include "kprop/store.h"

namespace py = pybind11;

namespace kprop {
namespace {

std::vector<DependencyRule> RulesFromText(const std::string& text) {
  return DependencyRulesFromJson(ParseYaml(text));
}

std::string EntryToJson(const LogEntry& e) {
  std::string line = SerializeEntry(e);
  line.pop_back();  // newline
  return line;
}

py::tuple Cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{"kprop"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = RunCli(argv, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

std::string Run(const std::string& spec_json, const std::string& run_dir) {
  const RunSpec spec = SnapshotFromJson(ParseYaml(spec_json));
  RunResult result;
  {
    py::gil_scoped_release release;
    result = RunScenario(spec, run_dir);
  }
  Value reps = Value::array();
  for (const auto& r : result.repetitions) {
    reps.push_back({{"index", r.index},
                    {"log_path", r.log_path},
                    {"metrics_path", r.metrics_path},
                    {"converged", r.converged},
                    {"failure", r.failure},
                    {"entries_written", r.metrics.entries_written},
                    {"entries_dropped", r.metrics.entries_dropped},
                    {"elapsed_ns", (r.finished - r.started).count()}});
  }
  return Value{{"run_dir", result.run_dir}, {"repetitions", reps}}.dump();
}

std::string BuiltinSnapshot(const std::string& name, const std::string& params_json,
                            std::uint64_t seed, std::uint32_t repeat) {
  RunSpec spec;
  spec.params = ParseYaml(params_json);
  spec.scenario = BuiltinScenario(name, spec.params);
  spec.scenario.repeat = repeat;
  spec.source = "builtin:" + name;
  spec.emulator.seed = seed;
  spec.agent.resources = DefaultResources();
  return SnapshotToJson(spec).dump();
}

std::vector<std::tuple<std::string, std::string, std::size_t>> Edges(
    const std::vector<std::string>& logs, const std::string& rules_text) {
  const MergedLog log = LoadLogs(logs);
  std::vector<std::tuple<std::string, std::string, std::size_t>> out;
  for (const auto& e : ResolveEdges(log.entries, RulesFromText(rules_text))) {
    out.emplace_back(e.parent_uid.str(), e.child_uid.str(), e.rule);
  }
  return out;
}

std::string Records(const std::vector<std::string>& logs, const std::string& rules_text,
                    const std::string& mode_name) {
  const auto mode = ParseMatchMode(mode_name);
  if (!mode) throw ConfigError("mode: expected sameop or causal");
  const MergedLog log = LoadLogs(logs);
  const auto rules = RulesFromText(rules_text);
  const Correlation c = Correlate(log.entries, ResolveEdges(log.entries, rules), *mode);
  Value out = Value::array();
  for (const auto& r : c.records) {
    out.push_back({{"rule", rules[r.edge.rule].Describe()},
                   {"parent_uid", r.edge.parent_uid.str()},
                   {"child_uid", r.edge.child_uid.str()},
                   {"parent_op", OpName(r.parent_op)},
                   {"child_op", OpName(r.child_op)},
                   {"delta_ns", r.delta.count()}});
  }
  return out.dump();
}

std::vector<std::uint64_t> HistogramCounts(const std::vector<std::int64_t>& samples_ns,
                                           std::int64_t bin_ns) {
  std::vector<Duration> samples;
  samples.reserve(samples_ns.size());
  for (auto ns : samples_ns) samples.emplace_back(ns);
  return MakeHistogram(samples, Duration(bin_ns)).counts;
}

}  // namespace
}  // namespace kprop

PYBIND11_MODULE(_kprop, m) {
  using namespace kprop;
  m.doc() = "Change propagation measurement for a control-plane emulator";

  py::register_exception<Error>(m, "Error");
  // Subclasses must be registered after the base so Python sees the hierarchy.
  auto base = m.attr("Error");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<MalformedEntry>(m, "MalformedEntry", base);

  m.def("cli", &Cli, py::arg("args"),
        "Runs the kprop tool in-process. Returns (exit_code, stdout, stderr).");
  m.def("run_json", &Run, py::arg("spec_json"), py::arg("run_dir"));
  m.def("builtin_snapshot_json", &BuiltinSnapshot, py::arg("name"), py::arg("params_json"),
        py::arg("seed") = 0, py::arg("repeat") = 1);
  m.def("parse_entry_json", [](const std::string& line) { return EntryToJson(ParseEntry(line)); },
        py::arg("line"));
  m.def("edges", &Edges, py::arg("logs"), py::arg("rules"));
  m.def("records_json", &Records, py::arg("logs"), py::arg("rules"), py::arg("mode") = "sameop");
  m.def("histogram", &HistogramCounts, py::arg("samples_ns"), py::arg("bin_ns"));
  m.def("format_millis", [](std::int64_t ns) { return FormatMillis(Duration(ns)); },
        py::arg("ns"));
  m.def("parse_duration", [](const std::string& s) { return ParseDuration(s).count(); },
        py::arg("text"), "Duration in nanoseconds.");

  m.attr("EXIT_OK") = kExitOk;
  m.attr("EXIT_ERROR") = kExitError;
  m.attr("EXIT_TIMEOUT") = kExitTimeout;
}
