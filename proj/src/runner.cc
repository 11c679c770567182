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

#include "kprop/runner.h"

#include <algorithm>
#include <filesystem>
#include <map>

#include "kprop/aggregator.h"
#include "kprop/config.h"
#include "kprop/errors.h"

namespace kprop {

using namespace config_internal;
namespace fs = std::filesystem;

namespace {

constexpr int kSnapshotVersion = 1;

std::string StepWhere(std::size_t i) { return "steps[" + std::to_string(i) + "]"; }

// ---------------------------------------------------------------------------
// JSON codecs

Value KeyToJson(const ObjectKey& k) {
  return {{"resource", k.resource}, {"namespace", k.namespace_}, {"name", k.name}};
}

ObjectKey KeyFromJson(const Value& j, const std::string& where) {
  RequireObject(j, where);
  RejectUnknownKeys(j, {"resource", "namespace", "name"}, where);
  ObjectKey k;
  k.resource = GetString(j, "resource", where);
  k.namespace_ = j.contains("namespace") ? GetString(j, "namespace", where) : "default";
  k.name = GetString(j, "name", where);
  return k;
}

Value LabelsToJson(const Labels& labels) {
  Value j = Value::object();
  for (const auto& [k, v] : labels) j[k] = v;
  return j;
}

Value TemplateToJson(const ApiObject& o) {
  Value j = {{"resource", o.resource},
             {"namespace", o.meta.namespace_},
             {"name", o.meta.name}};
  if (!o.meta.labels.empty()) j["labels"] = LabelsToJson(o.meta.labels);
  if (!o.spec.empty()) j["spec"] = o.spec;
  if (!o.status.empty()) j["status"] = o.status;
  return j;
}

ApiObject TemplateFromJson(const Value& j, const std::string& where) {
  RequireObject(j, where);
  RejectUnknownKeys(j, {"resource", "namespace", "name", "labels", "spec", "status"}, where);
  ApiObject o;
  o.resource = GetString(j, "resource", where);
  o.meta.namespace_ = j.contains("namespace") ? GetString(j, "namespace", where) : "default";
  o.meta.name = GetString(j, "name", where);
  o.meta.labels = GetLabels(j, "labels", where);
  auto map_field = [&](const char* key, Value& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_object()) throw ConfigError(where + "." + key + ": expected a map");
    dst = j[key];
  };
  map_field("spec", o.spec);
  map_field("status", o.status);
  return o;
}

Value ConditionToJson(const Condition& c) {
  Value j = {{"kind", std::string(ConditionKindName(c.kind))}};
  if (!c.resource.empty()) j["resource"] = c.resource;
  if (c.kind == Condition::Kind::kLiveCount) {
    if (!c.selector.empty()) j["selector"] = LabelsToJson(c.selector);
    if (c.owner_chain_of) j["ownerChainOf"] = KeyToJson(*c.owner_chain_of);
    j["count"] = c.count;
  } else {
    j["window"] = FormatDuration(c.window);
  }
  return j;
}

Condition ConditionFromJson(const Value& j, const std::string& where) {
  RequireObject(j, where);
  Condition c;
  const std::string kind = GetString(j, "kind", where);
  if (kind == "LiveCount") {
    RejectUnknownKeys(j, {"kind", "resource", "selector", "ownerChainOf", "count"}, where);
    c.kind = Condition::Kind::kLiveCount;
    c.resource = GetString(j, "resource", where);
    c.selector = GetLabels(j, "selector", where);
    if (j.contains("ownerChainOf")) {
      c.owner_chain_of = KeyFromJson(j["ownerChainOf"], where + ".ownerChainOf");
    }
    c.count = GetUnsigned(j, "count", where);
  } else if (kind == "Quiescence") {
    RejectUnknownKeys(j, {"kind", "resource", "window"}, where);
    c.kind = Condition::Kind::kQuiescence;
    if (j.contains("resource")) c.resource = GetString(j, "resource", where);
    if (j.contains("window")) c.window = GetDuration(j, "window", where);
  } else {
    throw ConfigError(where + ".kind: unknown condition \"" + kind +
                      "\" (expected LiveCount or Quiescence)");
  }
  c.Validate(where);
  return c;
}

Value StepToJson(const Step& s) {
  Value j = {{"action", std::string(ActionName(s.action))}};
  switch (s.action) {
    case Step::Action::kCreate:
      j["object"] = TemplateToJson(s.object);
      break;
    case Step::Action::kUpdate:
      j["target"] = KeyToJson(s.target);
      j["payload"] = s.payload;
      break;
    case Step::Action::kDelete:
      j["target"] = KeyToJson(s.target);
      break;
    case Step::Action::kWaitUntil:
      j["condition"] = ConditionToJson(s.condition);
      if (s.timeout) j["timeout"] = FormatDuration(*s.timeout);
      break;
    case Step::Action::kSleep:
      j["duration"] = FormatDuration(s.duration);
      break;
  }
  return j;
}

Step StepFromJson(const Value& j, const std::string& where) {
  RequireObject(j, where);
  const std::string action = GetString(j, "action", where);
  Step s;
  if (action == "Create") {
    RejectUnknownKeys(j, {"action", "object"}, where);
    s.action = Step::Action::kCreate;
    if (!j.contains("object")) throw ConfigError(where + ".object: required field missing");
    s.object = TemplateFromJson(j["object"], where + ".object");
  } else if (action == "Update") {
    RejectUnknownKeys(j, {"action", "target", "payload"}, where);
    s.action = Step::Action::kUpdate;
    if (!j.contains("target")) throw ConfigError(where + ".target: required field missing");
    s.target = KeyFromJson(j["target"], where + ".target");
    if (!j.contains("payload")) throw ConfigError(where + ".payload: required field missing");
    s.payload = j["payload"];
  } else if (action == "Delete") {
    RejectUnknownKeys(j, {"action", "target"}, where);
    s.action = Step::Action::kDelete;
    if (!j.contains("target")) throw ConfigError(where + ".target: required field missing");
    s.target = KeyFromJson(j["target"], where + ".target");
  } else if (action == "WaitUntil") {
    RejectUnknownKeys(j, {"action", "condition", "timeout"}, where);
    s.action = Step::Action::kWaitUntil;
    if (!j.contains("condition")) {
      throw ConfigError(where + ".condition: required field missing");
    }
    s.condition = ConditionFromJson(j["condition"], where + ".condition");
    if (j.contains("timeout")) s.timeout = GetDuration(j, "timeout", where);
  } else if (action == "Sleep") {
    RejectUnknownKeys(j, {"action", "duration"}, where);
    s.action = Step::Action::kSleep;
    s.duration = GetDuration(j, "duration", where);
  } else {
    throw ConfigError(where + ".action: unknown action \"" + action +
                      "\" (expected Create, Update, Delete, WaitUntil or Sleep)");
  }
  s.Validate(where);
  return s;
}

// ---------------------------------------------------------------------------
// Execution

std::uint64_t ParamUnsigned(const Value& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end()) throw BadParams(std::string("missing parameter ") + key);
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) {
    if (it->get<std::int64_t>() >= 0) return it->get<std::uint64_t>();
  } else if (it->is_string()) {
    const std::string s = it->get<std::string>();
    if (!s.empty() && s.size() < 19 &&
        std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return std::stoull(s);
    }
  }
  throw BadParams(std::string("parameter ") + key + " must be an integer >= 0, got " +
                  it->dump());
}

std::string ParamString(const Value& params, const char* key, std::string fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!it->is_string() || it->get<std::string>().empty()) {
    throw BadParams(std::string("parameter ") + key + " must be a non-empty string");
  }
  return it->get<std::string>();
}

/// Runs one repetition's steps against an emulator.
class Execution {
 public:
  Execution(Emulator& emu, const EmulatorConfig& config)
      : emu_(emu), config_(config) {}

  void Run(const Step& step) {
    Store& store = emu_.store();
    Clock& clock = emu_.clock();
    clock.RunDue();
    switch (step.action) {
      case Step::Action::kCreate: {
        ApiObject obj;
        obj.resource = step.object.resource;
        obj.meta.name = step.object.meta.name;
        obj.meta.namespace_ = step.object.meta.namespace_;
        obj.meta.labels = step.object.meta.labels;
        obj.spec = step.object.spec;
        obj.status = step.object.status;
        const ApiObject created = store.Create(std::move(obj));
        known_[KeyOf(created)] = created.meta.uid;
        break;
      }
      case Step::Action::kUpdate: {
        auto current = store.Get(step.target);
        if (!current) throw NotFound(DescribeKey(step.target) + " not found");
        Value view = {{"labels", LabelsToJson(current->meta.labels)},
                      {"spec", current->spec},
                      {"status", current->status}};
        view.merge_patch(step.payload);
        ApiObject next = *current;
        next.meta.labels.clear();
        if (view["labels"].is_object()) {
          for (const auto& [k, v] : view["labels"].items()) {
            if (v.is_string()) next.meta.labels[k] = v.get<std::string>();
          }
        }
        next.spec = view["spec"].is_object() ? view["spec"] : Value::object();
        next.status = view["status"].is_object() ? view["status"] : Value::object();
        store.Update(std::move(next));
        known_[step.target] = current->meta.uid;
        break;
      }
      case Step::Action::kDelete: {
        if (auto current = store.Get(step.target)) known_[step.target] = current->meta.uid;
        store.Delete(step.target.resource, step.target.namespace_, step.target.name);
        break;
      }
      case Step::Action::kWaitUntil: {
        const Duration limit =
            step.timeout ? *step.timeout
                         : DefaultWaitDeadline(step.condition, Count(step.condition),
                                               config_);
        Wait(step.condition, clock.Now() + limit);
        break;
      }
      case Step::Action::kSleep: {
        const Instant until = clock.Now() + step.duration;
        while (clock.Now() < until) clock.RunUntil(until);
        clock.RunDue();
        break;
      }
    }
  }

  /// Waits for the scenario's convergence condition.
  void Converge(const Condition& c) {
    const Duration limit = c.kind == Condition::Kind::kQuiescence
                               ? std::max<Duration>(std::chrono::seconds(1), c.window * 10)
                               : DefaultWaitDeadline(c, Count(c), config_);
    Wait(c, emu_.clock().Now() + limit);
  }

  /// Lets in-flight deliveries of already-committed events reach watchers.
  void DrainDeliveries() {
    Clock& clock = emu_.clock();
    if (auto last = emu_.store().last_commit_time()) {
      const Instant target = *last + config_.delivery_latency;
      while (clock.Now() < target) clock.RunUntil(target);
    }
    clock.RunDue();
  }

 private:
  static std::string DescribeKey(const ObjectKey& k) {
    return k.resource + " " + k.namespace_ + "/" + k.name;
  }

  std::uint64_t Count(const Condition& c) {
    std::optional<Uid> root;
    if (c.owner_chain_of) {
      if (auto live = emu_.store().Get(*c.owner_chain_of)) {
        root = known_[*c.owner_chain_of] = live->meta.uid;
      } else if (auto it = known_.find(*c.owner_chain_of); it != known_.end()) {
        root = it->second;
      } else {
        return 0;
      }
    }
    std::uint64_t n = 0;
    for (const auto& obj : emu_.store().List(c.resource)) {
      if (!c.selector.empty() && !SelectorMatches(c.selector, obj.meta.labels)) continue;
      if (root && !emu_.store().HasAncestor(obj.meta.uid, *root)) continue;
      ++n;
    }
    return n;
  }

  /// Earliest time the condition can hold given no further commits, or
  /// nullopt if it holds now.
  std::optional<Instant> Pending(const Condition& c, Instant since) {
    const Instant now = emu_.clock().Now();
    if (c.kind == Condition::Kind::kLiveCount) {
      if (Count(c) == c.count) return std::nullopt;
      return Instant::max();
    }
    std::optional<Instant> last = c.resource.empty()
                                      ? emu_.store().last_commit_time()
                                      : emu_.store().last_commit_time(c.resource);
    const Instant quiet_from = last ? std::max(*last, since) : since;
    const Instant ready = quiet_from + c.window;
    if (now >= ready) return std::nullopt;
    return ready;
  }

  void Wait(const Condition& c, Instant deadline) {
    Clock& clock = emu_.clock();
    const Instant since = clock.Now();
    for (;;) {
      clock.RunDue();
      const auto pending = Pending(c, since);
      if (!pending) return;
      if (clock.Now() >= deadline) {
        std::string what = "condition " + ConditionToJson(c).dump() + " not met within " +
                           FormatDuration(deadline - since);
        if (c.kind == Condition::Kind::kLiveCount) {
          what += " (count " + std::to_string(Count(c)) + ")";
        }
        throw ConvergenceTimeout(what);
      }
      clock.RunUntil(std::min(*pending, deadline));
    }
  }

  Emulator& emu_;
  const EmulatorConfig& config_;
  std::map<ObjectKey, Uid> known_;
};

void RemoveIfPresent(const fs::path& p) {
  std::error_code ec;
  fs::remove(p, ec);
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation

void Condition::Validate(const std::string& where) const {
  if (kind == Kind::kLiveCount && resource.empty()) {
    throw ConfigError(where + ".resource: required for LiveCount");
  }
  if (kind == Kind::kQuiescence && window <= Duration::zero()) {
    throw ConfigError(where + ".window: must be > 0");
  }
}

void Step::Validate(const std::string& where) const {
  switch (action) {
    case Action::kCreate:
      if (object.resource.empty() || object.meta.name.empty()) {
        throw ConfigError(where + ": Create needs object resource and name");
      }
      break;
    case Action::kUpdate:
      if (!payload.is_object()) throw ConfigError(where + ".payload: expected a map");
      for (const auto& [k, v] : payload.items()) {
        if (k != "labels" && k != "spec" && k != "status") {
          throw ConfigError(where + ".payload." + k +
                            ": only labels, spec and status can be patched");
        }
      }
      [[fallthrough]];
    case Action::kDelete:
      if (target.resource.empty() || target.name.empty()) {
        throw ConfigError(where + ": target needs resource and name");
      }
      break;
    case Action::kWaitUntil:
      condition.Validate(where + ".condition");
      if (timeout && *timeout <= Duration::zero()) {
        throw ConfigError(where + ".timeout: must be > 0");
      }
      break;
    case Action::kSleep:
      if (duration < Duration::zero()) throw ConfigError(where + ".duration: must be >= 0");
      break;
  }
}

void Scenario::Validate() const {
  if (steps.empty()) throw ConfigError("scenario " + name + ": steps must not be empty");
  if (repeat < 1) throw ConfigError("scenario " + name + ": repeat must be >= 1");
  for (std::size_t i = 0; i < steps.size(); ++i) steps[i].Validate(StepWhere(i));
  convergence.Validate("convergence");
}

std::string_view ActionName(Step::Action action) {
  switch (action) {
    case Step::Action::kCreate:
      return "Create";
    case Step::Action::kUpdate:
      return "Update";
    case Step::Action::kDelete:
      return "Delete";
    case Step::Action::kWaitUntil:
      return "WaitUntil";
    case Step::Action::kSleep:
      return "Sleep";
  }
  return "?";
}

std::string_view ConditionKindName(Condition::Kind kind) {
  return kind == Condition::Kind::kLiveCount ? "LiveCount" : "Quiescence";
}

// ---------------------------------------------------------------------------
// Scenario files

Value ScenarioToJson(const Scenario& s) {
  Value steps = Value::array();
  for (const auto& step : s.steps) steps.push_back(StepToJson(step));
  return {{"name", s.name},
          {"repeat", s.repeat},
          {"convergence", ConditionToJson(s.convergence)},
          {"steps", std::move(steps)}};
}

Scenario ScenarioFromJson(const Value& j) {
  const std::string where = "scenario";
  RequireObject(j, where);
  RejectUnknownKeys(j, {"name", "repeat", "convergence", "steps"}, where);
  Scenario s;
  s.name = j.contains("name") ? GetString(j, "name", where) : "unnamed";
  if (j.contains("repeat")) {
    const std::uint64_t r = GetUnsigned(j, "repeat", where);
    if (r < 1 || r > 1'000'000) throw ConfigError("scenario.repeat: must be >= 1");
    s.repeat = static_cast<std::uint32_t>(r);
  }
  if (j.contains("convergence")) {
    s.convergence = ConditionFromJson(j["convergence"], "convergence");
  }
  auto steps = j.find("steps");
  if (steps == j.end() || !steps->is_array()) {
    throw ConfigError("scenario.steps: expected a list of steps");
  }
  for (std::size_t i = 0; i < steps->size(); ++i) {
    s.steps.push_back(StepFromJson((*steps)[i], StepWhere(i)));
  }
  s.Validate();
  return s;
}

Scenario LoadScenarioFile(const std::string& path) {
  try {
    return ScenarioFromJson(LoadConfigFile(path));
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + what);
  }
}

std::vector<std::string> BuiltinScenarioNames() { return {"deployment-add-delete"}; }

Scenario BuiltinScenario(const std::string& name, const Value& params) {
  if (name != "deployment-add-delete") {
    throw UnknownScenario("unknown builtin scenario \"" + name + "\"");
  }
  if (!params.is_object()) throw BadParams("parameters must be a map");
  for (const auto& [k, v] : params.items()) {
    if (k != "N" && k != "name" && k != "namespace") {
      throw BadParams("unknown parameter \"" + k + "\" (expected N, name, namespace)");
    }
  }
  const std::uint64_t n = ParamUnsigned(params, "N");
  const std::string app = ParamString(params, "name", "web");
  const std::string ns = ParamString(params, "namespace", "default");

  Scenario s;
  s.name = name;
  const ObjectKey deployment{"deployments", ns, app};

  Step create;
  create.action = Step::Action::kCreate;
  create.object.resource = "deployments";
  create.object.meta.name = app;
  create.object.meta.namespace_ = ns;
  create.object.meta.labels = {{"app", app}};
  create.object.spec = {{"replicas", n},
                        {"selector", {{"app", app}}},
                        {"template", {{"labels", {{"app", app}}}}}};

  Step up;
  up.action = Step::Action::kWaitUntil;
  up.condition.kind = Condition::Kind::kLiveCount;
  up.condition.resource = "pods";
  up.condition.owner_chain_of = deployment;
  up.condition.count = n;

  Step remove;
  remove.action = Step::Action::kDelete;
  remove.target = deployment;

  Step down = up;
  down.condition.count = 0;

  s.steps = {create, up, remove, down};
  s.Validate();
  return s;
}

// ---------------------------------------------------------------------------
// Snapshots

Value SnapshotToJson(const RunSpec& spec) {
  AgentConfig agent = spec.agent;
  agent.output_path.clear();
  agent.metrics_path.clear();
  return {{"version", kSnapshotVersion},
          {"source", spec.source},
          {"params", spec.params},
          {"seed", spec.emulator.seed},
          {"clock", std::string(ClockModeName(spec.emulator.clock))},
          {"scenario", ScenarioToJson(spec.scenario)},
          {"emulator", EmulatorConfigToJson(spec.emulator)},
          {"agent", AgentConfigToJson(agent)}};
}

RunSpec SnapshotFromJson(const Value& j) {
  const std::string where = "snapshot";
  RequireObject(j, where);
  RejectUnknownKeys(j, {"version", "source", "params", "seed", "clock", "scenario",
                        "emulator", "agent"},
                    where);
  if (GetUnsigned(j, "version", where) != kSnapshotVersion) {
    throw ConfigError("snapshot.version: unsupported");
  }
  RunSpec spec;
  spec.source = j.contains("source") ? GetString(j, "source", where) : "";
  spec.params = j.value("params", Value::object());
  if (!j.contains("scenario")) throw ConfigError("snapshot.scenario: required field missing");
  spec.scenario = ScenarioFromJson(j["scenario"]);
  spec.emulator = EmulatorConfigFromJson(j.value("emulator", Value::object()));
  if (j.contains("agent")) spec.agent = AgentConfigFromJson(j["agent"]);
  return spec;
}

RunSpec LoadSnapshot(const std::string& path) {
  try {
    return SnapshotFromJson(LoadConfigFile(path));
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + what);
  }
}

// ---------------------------------------------------------------------------
// Running

Duration DefaultWaitDeadline(const Condition& condition, std::uint64_t current,
                             const EmulatorConfig& emulator) {
  Duration expected{0};
  if (condition.kind == Condition::Kind::kQuiescence) {
    expected = condition.window;
  } else if (condition.count > current) {
    expected = emulator.controllers.creation.TimeForOperations(condition.count - current);
  } else if (condition.count < current) {
    expected = emulator.controllers.deletion.TimeForOperations(current - condition.count);
  }
  // A few hops of watch delivery and reconcile delay per object chain.
  expected += 4 * (emulator.delivery_latency + emulator.controllers.reconcile_debounce);
  return std::max<Duration>(std::chrono::seconds(1), expected * 10);
}

bool RunResult::converged() const {
  return std::all_of(repetitions.begin(), repetitions.end(),
                     [](const RepetitionResult& r) { return r.converged; });
}

RunResult RunScenario(const RunSpec& input, const std::string& run_dir) {
  RunSpec spec = input;
  spec.scenario.Validate();
  spec.emulator.Validate();
  if (spec.agent.resources.empty()) {
    // Resolve now so the snapshot names exactly what was recorded.
    Clock probe_clock(ClockMode::kVirtual);
    StoreOptions options;
    for (const auto& r : spec.emulator.extra_resources) options.resources.push_back(r);
    spec.agent.resources = Store(probe_clock, options).resources();
  }
  {
    AgentConfig probe = spec.agent;
    probe.output_path = "-";
    probe.Validate();
  }

  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec || !fs::is_directory(run_dir)) {
    throw OutputUnwritable("cannot create run directory \"" + run_dir + "\"");
  }
  const fs::path dir(run_dir);
  RemoveIfPresent(dir / "INCOMPLETE");
  WriteFile((dir / "params.snapshot").string(), SnapshotToJson(spec).dump(2) + "\n");

  RunResult result;
  result.run_dir = run_dir;
  for (std::uint32_t k = 1; k <= spec.scenario.repeat; ++k) {
    RepetitionResult rep;
    rep.index = k;
    rep.log_path = (dir / ("run-" + std::to_string(k) + ".log")).string();
    rep.metrics_path = (dir / ("run-" + std::to_string(k) + ".metrics")).string();
    RemoveIfPresent(rep.log_path);
    RemoveIfPresent(rep.metrics_path);

    EmulatorConfig ec_k = spec.emulator;
    ec_k.seed = spec.emulator.seed + (k - 1);
    Emulator emu(ec_k);
    AgentConfig ac = spec.agent;
    ac.output_path = rep.log_path;
    ac.metrics_path = rep.metrics_path;
    auto agent = Agent::Start(ac, emu.store());
    rep.started = emu.clock().Now();

    Execution exec(emu, ec_k);
    try {
      for (const Step& step : spec.scenario.steps) exec.Run(step);
      exec.Converge(spec.scenario.convergence);
      rep.converged = true;
    } catch (const ConvergenceTimeout& e) {
      rep.failure = e.what();
    } catch (...) {
      agent->Stop();
      throw;
    }
    exec.DrainDeliveries();
    rep.finished = emu.clock().Now();
    rep.metrics = agent->Stop();
    agent.reset();
    const bool failed = !rep.converged;
    result.repetitions.push_back(std::move(rep));
    if (failed) {
      const auto& last = result.repetitions.back();
      WriteFile((dir / "INCOMPLETE").string(),
                "run-" + std::to_string(last.index) + ": convergence timeout: " +
                    last.failure + "\n");
      break;
    }
  }
  return result;
}

RunResult RunScenario(const Scenario& scenario, const EmulatorConfig& emulator,
                      const AgentConfig& agent, const std::string& run_dir) {
  RunSpec spec;
  spec.scenario = scenario;
  spec.emulator = emulator;
  spec.agent = agent;
  spec.source = "scenario:" + scenario.name;
  return RunScenario(spec, run_dir);
}

}  // namespace kprop
