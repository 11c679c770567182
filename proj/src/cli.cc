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

#include "kprop/cli.h"

#include <glob.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "kprop/aggregator.h"
#include "kprop/config.h"
#include "kprop/deps.h"
#include "kprop/errors.h"
#include "kprop/runner.h"

namespace kprop {
namespace {

/// Inputs shared by every log-reading subcommand.
struct LogInputs {
  std::vector<std::string> logs;
  std::string deps;
  std::string mode = "sameop";
  bool lenient = false;
};

void AddLogOptions(CLI::App* cmd, LogInputs& in) {
  cmd->add_option("--logs", in.logs, "Log files or glob patterns")->required();
  cmd->add_option("--deps", in.deps, "Dependency rule file")->required();
  cmd->add_flag("--lenient", in.lenient, "Skip malformed log lines with a warning");
}

struct Analysis {
  MergedLog log;
  std::vector<DependencyRule> rules;
  std::vector<ObjectEdge> edges;
};

Analysis Load(const LogInputs& in, std::ostream& err) {
  Analysis a;
  const std::vector<std::string> paths = ExpandLogPatterns(in.logs);
  if (paths.empty()) throw ConfigError("no logs match the given --logs patterns");
  a.rules = DependencyRulesFromJson(LoadConfigFile(in.deps));
  a.log = LoadLogs(paths, in.lenient);
  for (const auto& s : a.log.skipped) {
    err << "warning: skipped " << s.path << ":" << s.line << ": " << s.reason << "\n";
  }
  a.edges = ResolveEdges(a.log.entries, a.rules);
  return a;
}

MatchMode ModeOf(const std::string& name) {
  const auto mode = ParseMatchMode(name);
  if (!mode) throw ConfigError("--mode: expected sameop or causal, got \"" + name + "\"");
  return *mode;
}

Op OpOf(const std::string& name) {
  const auto op = ParseOp(name);
  if (!op) throw ConfigError("--op: expected Add, Update or Delete, got \"" + name + "\"");
  return *op;
}

/// Keeps records whose rule matches `filter`, given as an index or as the
/// rule's description, e.g. "Owner(replicasets->pods)".
std::vector<PropagationRecord> FilterRecords(const std::vector<PropagationRecord>& records,
                                             const std::vector<DependencyRule>& rules,
                                             const std::string& rule_filter,
                                             std::optional<Op> op) {
  std::optional<std::size_t> rule_index;
  if (!rule_filter.empty()) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (rules[i].Describe() == rule_filter || std::to_string(i) == rule_filter) {
        rule_index = i;
      }
    }
    if (!rule_index) throw ConfigError("--rule: no rule \"" + rule_filter + "\"");
  }
  std::vector<PropagationRecord> out;
  for (const auto& r : records) {
    if (rule_index && r.edge.rule != *rule_index) continue;
    if (op && r.child_op != *op) continue;
    out.push_back(r);
  }
  return out;
}

void WriteOrPrint(const std::string& path, const std::string& csv, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << csv;
  } else {
    WriteFile(path, csv);
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct RunArgs {
  std::string scenario;
  std::vector<std::string> params;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string clock;
  std::optional<std::uint32_t> repeat;
  std::string emulator;
  std::string agent;
  std::string snapshot;
};

int DoRun(const RunArgs& a, std::ostream& out, std::ostream& err) {
  std::string dir = a.out;
  if (dir.empty()) {
    if (const char* env = std::getenv(kOutDirEnv); env && *env) dir = env;
  }
  if (dir.empty()) {
    err << "error: --out is required (or set " << kOutDirEnv << ")\n";
    return kExitError;
  }

  RunSpec spec;
  if (!a.snapshot.empty()) {
    if (!a.scenario.empty() || !a.params.empty() || !a.emulator.empty() || !a.agent.empty()) {
      throw ConfigError(
          "--from-snapshot cannot be combined with --scenario, --params, --emulator or "
          "--agent");
    }
    spec = LoadSnapshot(a.snapshot);
  } else {
    if (a.scenario.empty()) throw ConfigError("--scenario is required");
    constexpr std::string_view kBuiltin = "builtin:";
    if (a.scenario.rfind(kBuiltin, 0) == 0) {
      for (const auto& kv : a.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw ConfigError("--params: expected key=value, got \"" + kv + "\"");
        }
        spec.params[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      spec.scenario = BuiltinScenario(a.scenario.substr(kBuiltin.size()), spec.params);
    } else {
      if (!a.params.empty()) throw ConfigError("--params only applies to builtin scenarios");
      spec.scenario = LoadScenarioFile(a.scenario);
    }
    spec.source = a.scenario;
    if (!a.emulator.empty()) spec.emulator = EmulatorConfigFromJson(LoadConfigFile(a.emulator));
    if (!a.agent.empty()) spec.agent = AgentConfigFromJson(LoadConfigFile(a.agent));
  }
  if (a.seed) spec.emulator.seed = *a.seed;
  if (!a.clock.empty()) spec.emulator.clock = ParseClockMode(a.clock);
  if (a.repeat) {
    if (*a.repeat < 1) throw ConfigError("--repeat: must be >= 1");
    spec.scenario.repeat = *a.repeat;
  }

  const RunResult result = RunScenario(spec, dir);
  for (const auto& rep : result.repetitions) {
    out << "run-" << rep.index << ": " << (rep.converged ? "converged" : "TIMEOUT")
        << " entries=" << rep.metrics.entries_written
        << " dropped=" << rep.metrics.entries_dropped
        << " elapsed=" << FormatDuration(rep.finished - rep.started) << "\n";
  }
  out << "run directory: " << result.run_dir << "\n";
  if (!result.converged()) {
    err << "error: " << result.repetitions.back().failure << "\n";
    return kExitTimeout;
  }
  return kExitOk;
}

int DoAnalyze(const LogInputs& in, const std::string& csv, std::ostream& out,
              std::ostream& err) {
  const Analysis a = Load(in, err);
  const Correlation c = Correlate(a.log.entries, a.edges, ModeOf(in.mode));

  // (rule, child op) -> deltas
  std::map<std::pair<std::size_t, Op>, std::vector<Duration>> groups;
  for (const auto& r : c.records) groups[{r.edge.rule, r.child_op}].push_back(r.delta);
  std::map<std::size_t, std::size_t> orphans;
  for (const auto& o : c.orphans) ++orphans[o.edge.rule];

  out << "entries: " << a.log.entries.size() << " from " << a.log.paths.size()
      << " file(s), edges: " << a.edges.size() << ", mode: " << in.mode << "\n";
  out << std::left << std::setw(40) << "rule" << std::setw(8) << "op" << std::right
      << std::setw(8) << "count" << std::setw(12) << "min_ms" << std::setw(12) << "median_ms"
      << std::setw(12) << "max_ms" << "\n";
  for (auto& [key, deltas] : groups) {
    std::sort(deltas.begin(), deltas.end());
    out << std::left << std::setw(40) << a.rules[key.first].Describe() << std::setw(8)
        << OpName(key.second) << std::right << std::setw(8) << deltas.size() << std::setw(12)
        << FormatMillis(deltas.front()) << std::setw(12)
        << FormatMillis(deltas[(deltas.size() - 1) / 2]) << std::setw(12)
        << FormatMillis(deltas.back()) << "\n";
  }
  for (const auto& [rule, n] : orphans) {
    out << "orphans " << a.rules[rule].Describe() << ": " << n << "\n";
  }
  if (!csv.empty()) WriteFile(csv, RecordsCsv(c.records, a.log.entries, a.rules));
  return kExitOk;
}

int DoHist(const LogInputs& in, double bin_ms, const std::string& op,
           const std::string& rule, const std::string& csv, std::ostream& out,
           std::ostream& err) {
  if (!(bin_ms > 0)) throw ConfigError("--bin-ms: must be > 0");
  const Analysis a = Load(in, err);
  const Correlation c = Correlate(a.log.entries, a.edges, ModeOf(in.mode));
  std::optional<Op> wanted;
  if (!op.empty()) wanted = OpOf(op);
  const auto records = FilterRecords(c.records, a.rules, rule, wanted);
  const auto width = std::chrono::duration_cast<Duration>(
      std::chrono::duration<double, std::milli>(bin_ms));
  WriteOrPrint(csv, HistogramCsv(MakeHistogram(records, width)), out);
  return kExitOk;
}

int DoCompletion(const LogInputs& in, const std::string& parent_resource,
                 const std::string& parent_name, const std::string& parent_uid,
                 const std::string& op, std::optional<std::uint64_t> expected,
                 const std::string& csv, std::ostream& out, std::ostream& err) {
  const Analysis a = Load(in, err);
  const Op wanted = OpOf(op);
  std::vector<Uid> parents;
  if (!parent_uid.empty()) {
    parents.emplace_back(parent_uid);
  } else {
    std::set<Uid> seen;
    for (const auto& e : a.log.entries) {
      if (e.obj.resource != parent_resource || e.op != wanted) continue;
      if (!parent_name.empty() && e.obj.meta.name != parent_name) continue;
      if (seen.insert(e.obj.meta.uid).second) parents.push_back(e.obj.meta.uid);
    }
    if (parents.empty()) {
      throw ParentEventMissing("no " + std::string(OpName(wanted)) + " entry for " +
                               parent_resource +
                               (parent_name.empty() ? "" : " " + parent_name));
    }
  }
  std::vector<CompletionReport> reports;
  for (const Uid& uid : parents) {
    reports.push_back(Completion(a.log.entries, a.edges, uid, wanted, expected));
  }
  WriteOrPrint(csv, CompletionCsv(reports), out);
  return kExitOk;
}

int DoEdges(const LogInputs& in, const std::string& csv, std::ostream& out,
            std::ostream& err) {
  const Analysis a = Load(in, err);
  std::map<Uid, const ApiObject*> objects;
  for (const auto& e : a.log.entries) objects.try_emplace(e.obj.meta.uid, &e.obj);
  std::string text =
      "rule,parent_resource,parent_name,parent_uid,child_resource,child_name,child_uid\n";
  for (const auto& e : a.edges) {
    const ApiObject* p = objects.at(e.parent_uid);
    const ApiObject* ch = objects.at(e.child_uid);
    text += a.rules[e.rule].Describe() + "," + p->resource + "," + p->meta.name + "," +
            e.parent_uid.str() + "," + ch->resource + "," + ch->meta.name + "," +
            e.child_uid.str() + "\n";
  }
  WriteOrPrint(csv, text, out);
  return kExitOk;
}

struct ValidateArgs {
  std::string deps, scenario, agent, emulator, snapshot;
};

int DoValidate(const ValidateArgs& v, std::ostream& out) {
  int checked = 0;
  if (!v.deps.empty()) {
    const auto rules = DependencyRulesFromJson(LoadConfigFile(v.deps));
    out << v.deps << ": ok (" << rules.size() << " rules)\n";
    ++checked;
  }
  if (!v.scenario.empty()) {
    const Scenario s = LoadScenarioFile(v.scenario);
    out << v.scenario << ": ok (scenario " << s.name << ", " << s.steps.size() << " steps)\n";
    ++checked;
  }
  if (!v.agent.empty()) {
    AgentConfigFromJson(LoadConfigFile(v.agent));
    out << v.agent << ": ok (agent)\n";
    ++checked;
  }
  if (!v.emulator.empty()) {
    EmulatorConfigFromJson(LoadConfigFile(v.emulator));
    out << v.emulator << ": ok (emulator)\n";
    ++checked;
  }
  if (!v.snapshot.empty()) {
    LoadSnapshot(v.snapshot);
    out << v.snapshot << ": ok (snapshot)\n";
    ++checked;
  }
  if (checked == 0) throw ConfigError("nothing to validate");
  return kExitOk;
}

}  // namespace

std::vector<std::string> ExpandLogPatterns(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& pattern : patterns) {
    std::vector<std::string> matches;
    glob_t g{};
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) matches.emplace_back(g.gl_pathv[i]);
    }
    ::globfree(&g);
    if (matches.empty() && std::filesystem::is_regular_file(pattern)) {
      matches.push_back(pattern);
    }
    std::sort(matches.begin(), matches.end());
    for (auto& m : matches) {
      if (seen.insert(m).second) out.push_back(std::move(m));
    }
  }
  return out;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Change propagation measurement for a control-plane emulator", "kprop"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and record agent logs");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file or builtin:<name>");
  run_cmd->add_option("--params", run.params, "Builtin scenario parameters, key=value");
  run_cmd->add_option("--out", run.out, std::string("Run directory (default $") + kOutDirEnv + ")");
  run_cmd->add_option("--seed", run.seed, "Emulator seed");
  run_cmd->add_option("--clock", run.clock, "virtual or real");
  run_cmd->add_option("--repeat", run.repeat, "Number of repetitions");
  run_cmd->add_option("--emulator", run.emulator, "Emulator config file");
  run_cmd->add_option("--agent", run.agent, "Agent config file");
  run_cmd->add_option("--from-snapshot", run.snapshot, "Re-run from a params.snapshot");

  LogInputs analyze_in;
  std::string analyze_csv;
  auto* analyze = app.add_subcommand("analyze", "Summarize propagation delays per rule");
  AddLogOptions(analyze, analyze_in);
  analyze->add_option("--mode", analyze_in.mode, "sameop or causal");
  analyze->add_option("--csv", analyze_csv, "Write propagation records here");

  LogInputs hist_in;
  double bin_ms = 25;
  std::string hist_op, hist_rule, hist_csv;
  auto* hist = app.add_subcommand("hist", "Histogram of propagation delays as CSV");
  AddLogOptions(hist, hist_in);
  hist->add_option("--mode", hist_in.mode, "sameop or causal");
  hist->add_option("--bin-ms", bin_ms, "Bin width in milliseconds")->capture_default_str();
  hist->add_option("--op", hist_op, "Only child entries with this Op");
  hist->add_option("--rule", hist_rule, "Only this rule (index or e.g. Owner(replicasets->pods))");
  hist->add_option("--csv", hist_csv, "Output file (default stdout)");

  LogInputs comp_in;
  std::string parent_resource, parent_name, parent_uid, comp_op = "Add", comp_csv;
  std::optional<std::uint64_t> expected;
  auto* completion = app.add_subcommand("completion", "Time for children to follow a parent");
  AddLogOptions(completion, comp_in);
  auto* presource = completion->add_option("--parent-resource", parent_resource, "Parent resource");
  completion->add_option("--parent-name", parent_name, "Parent name");
  auto* puid = completion->add_option("--parent-uid", parent_uid, "Parent uid");
  presource->excludes(puid);
  completion->add_option("--op", comp_op, "Add, Update or Delete")->capture_default_str();
  completion->add_option("--expected", expected, "Expected child count");
  completion->add_option("--csv", comp_csv, "Output file (default stdout)");

  LogInputs edges_in;
  std::string edges_csv;
  auto* edges = app.add_subcommand("edges", "List resolved object dependencies");
  AddLogOptions(edges, edges_in);
  edges->add_option("--csv", edges_csv, "Output file (default stdout)");

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Check configuration files");
  validate->add_option("--deps", val.deps, "Dependency rule file");
  validate->add_option("--scenario", val.scenario, "Scenario file");
  validate->add_option("--agent", val.agent, "Agent config file");
  validate->add_option("--emulator", val.emulator, "Emulator config file");
  validate->add_option("--snapshot", val.snapshot, "Run parameter snapshot");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run_cmd) return DoRun(run, out, err);
    if (*analyze) return DoAnalyze(analyze_in, analyze_csv, out, err);
    if (*hist) return DoHist(hist_in, bin_ms, hist_op, hist_rule, hist_csv, out, err);
    if (*completion) {
      if (parent_resource.empty() && parent_uid.empty()) {
        throw ConfigError("completion needs --parent-resource or --parent-uid");
      }
      return DoCompletion(comp_in, parent_resource, parent_name, parent_uid, comp_op,
                          expected, comp_csv, out, err);
    }
    if (*edges) return DoEdges(edges_in, edges_csv, out, err);
    if (*validate) return DoValidate(val, out);
  } catch (const ConvergenceTimeout& e) {
    err << "error: " << e.what() << "\n";
    return kExitTimeout;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace kprop
