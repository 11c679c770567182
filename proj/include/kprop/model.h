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

#ifndef KPROP_MODEL_H_
#define KPROP_MODEL_H_

// Core value types shared by the emulator, the agent and the aggregator.
//
// Objects follow the shape of Kubernetes API objects closely enough for
// dependency analysis: metadata is typed, while spec and status stay opaque
// JSON maps so that custom resources need no per-resource code.

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kprop {

using Duration = std::chrono::nanoseconds;
/// Nanoseconds since the Unix epoch. Virtual clocks use the same epoch.
using Instant = std::chrono::sys_time<Duration>;

/// Opaque structured value (string | integer | nested map | list).
using Value = nlohmann::json;
using Labels = std::map<std::string, std::string>;

/// Opaque object identifier, unique within one emulator run.
class Uid {
 public:
  Uid() = default;
  explicit Uid(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Uid&, const Uid&) = default;

 private:
  std::string value_;
};

struct OwnerReference {
  std::string resource;
  std::string name;
  Uid uid;

  friend bool operator==(const OwnerReference&,
                         const OwnerReference&) = default;
};

struct ObjectMeta {
  std::string name;
  std::string namespace_;
  Uid uid;
  std::uint64_t resource_version = 0;
  Labels labels;
  std::vector<OwnerReference> owner_references;
  Instant creation_time{};

  bool IsOwnedBy(const Uid& owner) const;

  friend bool operator==(const ObjectMeta&, const ObjectMeta&) = default;
};

struct ApiObject {
  std::string resource;
  ObjectMeta meta;
  Value spec = Value::object();
  Value status = Value::object();

  friend bool operator==(const ApiObject&, const ApiObject&) = default;
};

enum class Op { kAdd, kUpdate, kDelete };

std::string_view OpName(Op op);
/// Parses "Add" / "Update" / "Delete"; nullopt for anything else.
std::optional<Op> ParseOp(std::string_view name);

/// A change notification. `time` is the receipt timestamp once recorded by
/// the agent; inside the store it is the commit time.
struct WatchEvent {
  Instant time{};
  Op op = Op::kAdd;
  ApiObject obj;
  std::optional<ApiObject> old_obj;  // present iff op == kUpdate

  /// Checks the op/old_obj pairing and uid agreement.
  bool IsWellFormed() const;

  friend bool operator==(const WatchEvent&, const WatchEvent&) = default;
};

/// The serialized form of a WatchEvent. Identical fields.
using LogEntry = WatchEvent;

/// Key of a live object: (resource, namespace, name).
struct ObjectKey {
  std::string resource;
  std::string namespace_;
  std::string name;

  friend auto operator<=>(const ObjectKey&, const ObjectKey&) = default;
};

inline ObjectKey KeyOf(const ApiObject& obj) {
  return {obj.resource, obj.meta.namespace_, obj.meta.name};
}

/// True iff `selector` is non-empty and every pair appears in `labels`.
bool SelectorMatches(const Labels& selector, const Labels& labels);

}  // namespace kprop

#endif  // KPROP_MODEL_H_
