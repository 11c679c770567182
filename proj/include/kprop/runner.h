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

#ifndef KPROP_RUNNER_H_
#define KPROP_RUNNER_H_

// Scenario execution.
//
// A run directory holds:
//   params.snapshot   everything needed to re-run (JSON)
//   run-<k>.log       agent log of repetition k (1-based)
//   run-<k>.metrics   agent metrics of repetition k
//   INCOMPLETE        present only if a repetition timed out
//
// Each repetition gets a fresh emulator seeded with seed + k - 1 and a fresh
// agent that subscribes before the first step runs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kprop/agent.h"
#include "kprop/emulator.h"
#include "kprop/model.h"

namespace kprop {

struct Condition {
  enum class Kind { kLiveCount, kQuiescence };

  Kind kind = Kind::kQuiescence;
  /// LiveCount: the resource counted. Quiescence: the resource watched for
  /// commits; empty means every resource.
  std::string resource;
  /// LiveCount only. Objects must carry every label.
  Labels selector;
  /// LiveCount only. Objects must descend, through owner references, from
  /// the object that had this key when the runner last created or saw it.
  std::optional<ObjectKey> owner_chain_of;
  std::uint64_t count = 0;
  /// Quiescence: no commit for this long.
  Duration window = std::chrono::milliseconds(500);

  void Validate(const std::string& where) const;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Step {
  enum class Action { kCreate, kUpdate, kDelete, kWaitUntil, kSleep };

  Action action = Action::kSleep;
  /// Create: the object to create. Only resource, name, namespace, labels,
  /// spec and status are used.
  ApiObject object;
  /// Update and Delete.
  ObjectKey target;
  /// Update: JSON merge patch over {"labels", "spec", "status"}.
  Value payload = Value::object();
  /// WaitUntil.
  Condition condition;
  /// Sleep.
  Duration duration{0};
  /// WaitUntil: overrides the default deadline.
  std::optional<Duration> timeout;

  void Validate(const std::string& where) const;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Scenario {
  std::string name;
  std::vector<Step> steps;
  /// Checked after the last step; the agent stops once it holds.
  Condition convergence;
  std::uint32_t repeat = 1;

  /// Throws ConfigError naming the offending step.
  void Validate() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

std::string_view ActionName(Step::Action action);
std::string_view ConditionKindName(Condition::Kind kind);

Value ScenarioToJson(const Scenario& s);
/// Throws ConfigError.
Scenario ScenarioFromJson(const Value& j);
Scenario LoadScenarioFile(const std::string& path);

std::vector<std::string> BuiltinScenarioNames();

/// "deployment-add-delete" takes N (required, integer >= 0), name
/// (default "web") and namespace (default "default"). Values may be numbers
/// or strings. Throws UnknownScenario, BadParams.
Scenario BuiltinScenario(const std::string& name, const Value& params);

/// Everything a run depends on. This is what params.snapshot stores.
struct RunSpec {
  Scenario scenario;
  EmulatorConfig emulator;
  /// Empty resources means every resource the emulator serves. Output
  /// paths are ignored; the runner picks them.
  AgentConfig agent;
  /// Where the scenario came from, e.g. "builtin:deployment-add-delete".
  std::string source;
  Value params = Value::object();
};

Value SnapshotToJson(const RunSpec& spec);
/// Throws ConfigError.
RunSpec SnapshotFromJson(const Value& j);
RunSpec LoadSnapshot(const std::string& path);

struct RepetitionResult {
  std::uint32_t index = 0;  // 1-based
  std::string log_path;
  std::string metrics_path;
  bool converged = false;
  std::string failure;  // set when !converged
  AgentMetrics metrics;
  Instant started{};
  Instant finished{};
};

struct RunResult {
  std::string run_dir;
  std::vector<RepetitionResult> repetitions;
  /// True iff every repetition converged.
  bool converged() const;
};

/// Runs every repetition, stopping at the first convergence timeout. The
/// timed-out repetition keeps its partial log and the directory gets an
/// INCOMPLETE marker. Throws ConfigError for invalid input,
/// OutputUnwritable, and store errors raised by a step (e.g. deleting a
/// missing object).
RunResult RunScenario(const RunSpec& spec, const std::string& run_dir);
RunResult RunScenario(const Scenario& scenario, const EmulatorConfig& emulator,
                      const AgentConfig& agent, const std::string& run_dir);

/// Default WaitUntil deadline: max(1s, 10x the time the configured rate
/// models need for the outstanding operations).
Duration DefaultWaitDeadline(const Condition& condition, std::uint64_t current,
                             const EmulatorConfig& emulator);

}  // namespace kprop

#endif  // KPROP_RUNNER_H_
