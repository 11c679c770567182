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

#include "kprop/config.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include "kprop/errors.h"

namespace kprop {

using namespace config_internal;

namespace {

bool IsInteger(const std::string& s) {
  static const std::regex re(R"(^[-+]?[0-9]+$)");
  return std::regex_match(s, re);
}

bool IsFloat(const std::string& s) {
  static const std::regex re(R"(^[-+]?([0-9]+\.[0-9]*|\.[0-9]+)([eE][-+]?[0-9]+)?$)");
  return std::regex_match(s, re);
}

Value FromYaml(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Sequence: {
      Value out = Value::array();
      for (const auto& item : node) out.push_back(FromYaml(item));
      return out;
    }
    case YAML::NodeType::Map: {
      Value out = Value::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = FromYaml(kv.second);
      return out;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (IsInteger(s)) {
    try {
      if (s[0] == '-') return std::stoll(s);
      return std::stoull(s[0] == '+' ? s.substr(1) : s);
    } catch (const std::out_of_range&) {
      return s;
    }
  }
  if (IsFloat(s)) return std::stod(s);
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~") return nullptr;
  return s;
}

std::string Join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

}  // namespace

namespace config_internal {

void RequireObject(const Value& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError((where.empty() ? std::string("config") : where) +
                      ": expected a map");
  }
}

void RejectUnknownKeys(const Value& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(Join(where, key) + ": unknown field");
    }
  }
}

std::string GetString(const Value& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(Join(where, key) + ": required field missing");
  if (!it->is_string()) throw ConfigError(Join(where, key) + ": expected a string");
  return it->get<std::string>();
}

std::uint64_t GetUnsigned(const Value& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(Join(where, key) + ": required field missing");
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer() && it->get<std::int64_t>() >= 0) {
    return it->get<std::uint64_t>();
  }
  throw ConfigError(Join(where, key) + ": expected a non-negative integer");
}

Duration GetDuration(const Value& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(Join(where, key) + ": required field missing");
  try {
    if (it->is_number_integer()) {
      return std::chrono::milliseconds(it->get<std::int64_t>());
    }
    if (it->is_string()) return ParseDuration(it->get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(Join(where, key) + ": " + e.what());
  }
  throw ConfigError(Join(where, key) + ": expected a duration");
}

Labels GetLabels(const Value& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return {};
  if (!it->is_object()) throw ConfigError(Join(where, key) + ": expected a map");
  Labels out;
  for (const auto& [k, v] : it->items()) {
    if (!v.is_string()) {
      throw ConfigError(Join(Join(where, key), k) + ": expected a string");
    }
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

}  // namespace config_internal

Duration ParseDuration(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    negative = text[i] == '-';
    ++i;
  }
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
  if (ec != std::errc() || ptr == text.data() + i) {
    throw ConfigError("bad duration \"" + std::string(text) + "\"");
  }
  const std::string_view unit(ptr, text.data() + text.size() - ptr);
  Duration d;
  if (unit.empty() || unit == "ms") {
    d = std::chrono::milliseconds(value);
  } else if (unit == "ns") {
    d = std::chrono::nanoseconds(value);
  } else if (unit == "us") {
    d = std::chrono::microseconds(value);
  } else if (unit == "s") {
    d = std::chrono::seconds(value);
  } else if (unit == "m") {
    d = std::chrono::minutes(value);
  } else if (unit == "h") {
    d = std::chrono::hours(value);
  } else {
    throw ConfigError("bad duration unit in \"" + std::string(text) + "\"");
  }
  return negative ? -d : d;
}

std::string FormatDuration(Duration d) {
  const long long ns = d.count();
  if (ns == 0) return "0s";
  struct Unit {
    long long scale;
    const char* suffix;
  };
  static constexpr Unit kUnits[] = {{3'600'000'000'000LL, "h"},
                                    {60'000'000'000LL, "m"},
                                    {1'000'000'000LL, "s"},
                                    {1'000'000LL, "ms"},
                                    {1'000LL, "us"}};
  for (const auto& u : kUnits) {
    if (ns % u.scale == 0) return std::to_string(ns / u.scale) + u.suffix;
  }
  return std::to_string(ns) + "ns";
}

Value ParseYaml(std::string_view text) {
  try {
    return FromYaml(YAML::Load(std::string(text)));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
}

Value LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open \"" + path + "\"");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ParseYaml(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rate models and controllers

Value RateModelToJson(const RateModel& m) {
  if (m.kind == RateModel::Kind::kTokenBucket) {
    return {{"kind", "TokenBucket"}, {"rate", m.rate}, {"burst", m.burst}};
  }
  return {{"kind", "SlowStartBatch"},
          {"initialBatch", m.initial_batch},
          {"batchPeriod", FormatDuration(m.batch_period)},
          {"maxBatch", m.max_batch}};
}

RateModel RateModelFromJson(const Value& j, const std::string& where) {
  RequireObject(j, where);
  const std::string kind_name = GetString(j, "kind", where);
  const auto kind = ParseRateModelKind(kind_name);
  if (!kind) {
    throw ConfigError(Join(where, "kind") + ": unknown rate model \"" + kind_name +
                      "\" (expected TokenBucket or SlowStartBatch)");
  }
  RateModel m;
  m.kind = *kind;
  if (m.kind == RateModel::Kind::kTokenBucket) {
    RejectUnknownKeys(j, {"kind", "rate", "burst"}, where);
    auto rate = j.find("rate");
    if (rate == j.end() || !rate->is_number()) {
      throw ConfigError(Join(where, "rate") + ": expected a number");
    }
    m.rate = rate->get<double>();
    if (j.contains("burst")) m.burst = static_cast<std::uint32_t>(GetUnsigned(j, "burst", where));
  } else {
    RejectUnknownKeys(j, {"kind", "initialBatch", "batchPeriod", "maxBatch"}, where);
    if (j.contains("initialBatch")) {
      m.initial_batch = static_cast<std::uint32_t>(GetUnsigned(j, "initialBatch", where));
    }
    if (j.contains("batchPeriod")) m.batch_period = GetDuration(j, "batchPeriod", where);
    if (j.contains("maxBatch")) {
      m.max_batch = static_cast<std::uint32_t>(GetUnsigned(j, "maxBatch", where));
    }
  }
  try {
    m.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return m;
}

Value ControllerConfigToJson(const ControllerConfig& c) {
  return {{"creation", RateModelToJson(c.creation)},
          {"deletion", RateModelToJson(c.deletion)},
          {"reconcileDebounce", FormatDuration(c.reconcile_debounce)},
          {"namePrefixHashLength", c.name_hash_length}};
}

ControllerConfig ControllerConfigFromJson(const Value& j, const std::string& where) {
  RequireObject(j, where);
  RejectUnknownKeys(j, {"creation", "deletion", "reconcileDebounce", "namePrefixHashLength"},
                    where);
  ControllerConfig c;
  if (j.contains("creation")) c.creation = RateModelFromJson(j["creation"], Join(where, "creation"));
  if (j.contains("deletion")) c.deletion = RateModelFromJson(j["deletion"], Join(where, "deletion"));
  if (j.contains("reconcileDebounce")) {
    c.reconcile_debounce = GetDuration(j, "reconcileDebounce", where);
  }
  if (j.contains("namePrefixHashLength")) {
    c.name_hash_length =
        static_cast<std::uint32_t>(GetUnsigned(j, "namePrefixHashLength", where));
  }
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Emulator

Value EmulatorConfigToJson(const EmulatorConfig& c) {
  return {{"clock", std::string(ClockModeName(c.clock))},
          {"seed", c.seed},
          {"deliveryLatency", FormatDuration(c.delivery_latency)},
          {"controllers", ControllerConfigToJson(c.controllers)},
          {"deploymentController", c.deployment_controller},
          {"replicasetController", c.replicaset_controller},
          {"endpointsController", c.endpoints_controller},
          {"extraResources", c.extra_resources}};
}

EmulatorConfig EmulatorConfigFromJson(const Value& j) {
  const std::string where = "emulator";
  if (j.is_null()) return {};
  RequireObject(j, where);
  RejectUnknownKeys(j,
                    {"clock", "seed", "deliveryLatency", "controllers",
                     "deploymentController", "replicasetController",
                     "endpointsController", "extraResources"},
                    where);
  EmulatorConfig c;
  if (j.contains("clock")) {
    try {
      c.clock = ParseClockMode(GetString(j, "clock", where));
    } catch (const ConfigError& e) {
      throw ConfigError(Join(where, "clock") + ": " + e.what());
    }
  }
  if (j.contains("seed")) c.seed = GetUnsigned(j, "seed", where);
  if (j.contains("deliveryLatency")) c.delivery_latency = GetDuration(j, "deliveryLatency", where);
  if (j.contains("controllers")) {
    c.controllers = ControllerConfigFromJson(j["controllers"], Join(where, "controllers"));
  }
  for (const char* key : {"deploymentController", "replicasetController", "endpointsController"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_boolean()) throw ConfigError(Join(where, key) + ": expected true or false");
  }
  c.deployment_controller = j.value("deploymentController", true);
  c.replicaset_controller = j.value("replicasetController", true);
  c.endpoints_controller = j.value("endpointsController", true);
  if (j.contains("extraResources")) {
    const Value& extra = j["extraResources"];
    if (!extra.is_array()) throw ConfigError(Join(where, "extraResources") + ": expected a list");
    for (const auto& r : extra) {
      if (!r.is_string()) {
        throw ConfigError(Join(where, "extraResources") + ": expected resource names");
      }
      c.extra_resources.push_back(r.get<std::string>());
    }
  }
  c.Validate();
  return c;
}

// ---------------------------------------------------------------------------
// Agent

Value AgentConfigToJson(const AgentConfig& c) {
  Value flush = c.flush.kind == FlushPolicy::Kind::kPerEntry
                    ? Value{{"policy", "perEntry"}}
                    : Value{{"policy", "batched"},
                            {"maxEntries", c.flush.max_entries},
                            {"maxDelay", FormatDuration(c.flush.max_delay)}};
  Value j = {{"resources", c.resources},
             {"flush", std::move(flush)},
             {"queueCapacity", c.queue_capacity}};
  if (!c.output_path.empty()) j["output"] = c.output_path;
  if (!c.metrics_path.empty()) j["metrics"] = c.metrics_path;
  return j;
}

AgentConfig AgentConfigFromJson(const Value& j) {
  const std::string where = "agent";
  RequireObject(j, where);
  RejectUnknownKeys(j, {"resources", "output", "flush", "metrics", "queueCapacity"}, where);
  AgentConfig c;
  auto resources = j.find("resources");
  if (resources == j.end()) throw ConfigError("agent.resources: required field missing");
  if (!resources->is_array()) throw ConfigError("agent.resources: expected a list");
  for (const auto& r : *resources) {
    if (!r.is_string()) throw ConfigError("agent.resources: expected resource names");
    c.resources.push_back(r.get<std::string>());
  }
  if (j.contains("output")) c.output_path = GetString(j, "output", where);
  if (j.contains("metrics")) c.metrics_path = GetString(j, "metrics", where);
  if (j.contains("queueCapacity")) c.queue_capacity = GetUnsigned(j, "queueCapacity", where);
  if (j.contains("flush")) {
    const Value& f = j["flush"];
    const std::string fw = "agent.flush";
    RequireObject(f, fw);
    RejectUnknownKeys(f, {"policy", "maxEntries", "maxDelay"}, fw);
    const std::string policy = GetString(f, "policy", fw);
    if (policy == "perEntry") {
      c.flush = FlushPolicy::PerEntry();
    } else if (policy == "batched") {
      c.flush = FlushPolicy::Batched(
          f.contains("maxEntries") ? GetUnsigned(f, "maxEntries", fw) : 256,
          f.contains("maxDelay") ? GetDuration(f, "maxDelay", fw)
                                 : std::chrono::milliseconds(50));
    } else {
      throw ConfigError(fw + ".policy: expected perEntry or batched, got \"" + policy + "\"");
    }
  }
  // Validate everything but the output path, which the runner may supply.
  AgentConfig probe = c;
  if (probe.output_path.empty()) probe.output_path = "-";
  probe.Validate();
  return c;
}

// ---------------------------------------------------------------------------
// Dependency rules

std::vector<DependencyRule> DependencyRulesFromJson(const Value& j) {
  const Value* list = &j;
  if (j.is_object()) {
    RejectUnknownKeys(j, {"rules"}, "deps");
    auto it = j.find("rules");
    if (it == j.end()) throw ConfigError("deps.rules: required field missing");
    list = &*it;
  }
  if (!list->is_array()) throw ConfigError("deps: expected a list of rules");
  std::vector<DependencyRule> rules;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const Value& r = (*list)[i];
    const std::string where = "deps rule #" + std::to_string(i + 1);
    RequireObject(r, where);
    RejectUnknownKeys(r, {"kind", "parent", "child", "selectorField"}, where);
    const std::string kind_name = GetString(r, "kind", where);
    const auto kind = ParseRuleKind(kind_name);
    if (!kind) {
      throw ConfigError(where + ": unknown kind \"" + kind_name +
                        "\" (expected Owner, NamePrefix or Label)");
    }
    DependencyRule rule;
    rule.kind = *kind;
    rule.parent_resource = GetString(r, "parent", where);
    rule.child_resource = GetString(r, "child", where);
    if (r.contains("selectorField")) {
      if (rule.kind != DependencyRule::Kind::kLabel) {
        throw ConfigError(where + ": selectorField is only valid for Label rules");
      }
      rule.selector_field = GetString(r, "selectorField", where);
    }
    try {
      rule.Validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

Value DependencyRulesToJson(const std::vector<DependencyRule>& rules) {
  Value list = Value::array();
  for (const auto& r : rules) {
    Value j = {{"kind", std::string(RuleKindName(r.kind))},
               {"parent", r.parent_resource},
               {"child", r.child_resource}};
    if (r.kind == DependencyRule::Kind::kLabel) j["selectorField"] = r.selector_field;
    list.push_back(std::move(j));
  }
  return {{"rules", std::move(list)}};
}

}  // namespace kprop
