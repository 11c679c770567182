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

#ifndef KPROP_CONFIG_H_
#define KPROP_CONFIG_H_

// Configuration files.
//
// Every file is YAML (JSON is accepted too, being a YAML subset) and is
// converted to a JSON value before decoding, so the same decoders read both
// hand-written configs and the run-directory parameter snapshot. Decoders
// reject unknown keys; errors are ConfigError with the offending field path.
//
// Durations are strings with a unit suffix ("250ms", "1s", "50us", "10ns",
// "2m") or bare integers, which mean milliseconds.

#include <string>
#include <string_view>
#include <vector>

#include "kprop/agent.h"
#include "kprop/controllers.h"
#include "kprop/deps.h"
#include "kprop/emulator.h"
#include "kprop/model.h"

namespace kprop {

Duration ParseDuration(std::string_view text);
/// Shortest exact form, e.g. "100ms", "1500us", "0s".
std::string FormatDuration(Duration d);

/// Parses YAML (or JSON) text. Quoted scalars stay strings; unquoted
/// integers and booleans become numbers and booleans.
Value ParseYaml(std::string_view text);
Value LoadConfigFile(const std::string& path);

Value RateModelToJson(const RateModel& m);
RateModel RateModelFromJson(const Value& j, const std::string& where);

Value ControllerConfigToJson(const ControllerConfig& c);
ControllerConfig ControllerConfigFromJson(const Value& j, const std::string& where);

Value EmulatorConfigToJson(const EmulatorConfig& c);
EmulatorConfig EmulatorConfigFromJson(const Value& j);

/// The output path is optional here: the runner fills it in per run.
Value AgentConfigToJson(const AgentConfig& c);
AgentConfig AgentConfigFromJson(const Value& j);

/// Accepts a list of rules or {"rules": [...]}. Each rule is
/// {kind, parent, child, selectorField?}. Errors name the rule by position.
std::vector<DependencyRule> DependencyRulesFromJson(const Value& j);
Value DependencyRulesToJson(const std::vector<DependencyRule>& rules);

/// Helpers shared by decoders.
namespace config_internal {
void RequireObject(const Value& j, const std::string& where);
void RejectUnknownKeys(const Value& j, const std::vector<std::string>& allowed,
                       const std::string& where);
std::string GetString(const Value& j, const char* key, const std::string& where);
std::uint64_t GetUnsigned(const Value& j, const char* key, const std::string& where);
Duration GetDuration(const Value& j, const char* key, const std::string& where);
Labels GetLabels(const Value& j, const char* key, const std::string& where);
}  // namespace config_internal

}  // namespace kprop

#endif  // KPROP_CONFIG_H_
