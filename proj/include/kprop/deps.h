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

#ifndef KPROP_DEPS_H_
#define KPROP_DEPS_H_

// Resource-level dependency rules and their resolution into object-level
// parent -> child edges over a log.
//
// Three rule kinds are supported:
//
//  * Owner: the child's ownerReferences name the parent's uid.
//  * NamePrefix: the child's name starts with "<parent name>-".
//  * Label: the selector map read from the parent (at `selector_field`,
//    "spec.selector" by default) is non-empty and a subset of the child's
//    labels.
//
// NamePrefix and Label additionally require both objects to live in the
// same namespace.
//
// Owner and NamePrefix hold if any logged snapshot of the child matches any
// logged snapshot of the parent. Labels and selectors change over time, so a
// Label edge also needs the two snapshots to have been current at a common
// instant. A snapshot taken from an entry at time t is current from t until
// the time of the object's next entry (both ends included); the final
// snapshot of a deleted object is current only at the deletion time, and the
// OldObj of an object's first logged Update is current from the beginning of
// time. Working in time rather than log positions makes the result
// independent of how entries of different objects are interleaved.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kprop/model.h"

namespace kprop {

struct DependencyRule {
  enum class Kind { kOwner, kNamePrefix, kLabel };

  Kind kind = Kind::kOwner;
  std::string parent_resource;
  std::string child_resource;
  /// Dotted path into the parent object record; Label rules only.
  std::string selector_field = "spec.selector";

  static DependencyRule Owner(std::string parent, std::string child);
  static DependencyRule NamePrefix(std::string parent, std::string child);
  static DependencyRule Label(std::string parent, std::string child,
                              std::string selector_field = "spec.selector");

  /// Throws ConfigError.
  void Validate() const;
  /// e.g. "Owner(replicasets->pods)".
  std::string Describe() const;

  friend bool operator==(const DependencyRule&, const DependencyRule&) = default;
};

std::string_view RuleKindName(DependencyRule::Kind kind);
std::optional<DependencyRule::Kind> ParseRuleKind(std::string_view name);

struct ObjectEdge {
  Uid parent_uid;
  Uid child_uid;
  /// Index into the rule list the edge was resolved with.
  std::size_t rule = 0;

  friend auto operator<=>(const ObjectEdge&, const ObjectEdge&) = default;
};

/// Reads the selector map at `field` ("spec.x.y", "status.x" or
/// "meta.labels"). Throws SelectorMissing if the field is absent or is not
/// a map of strings.
Labels ReadSelector(const ApiObject& obj, std::string_view field);

/// Evaluates one rule on one pair of snapshots. Resources must match the
/// rule's. Throws SelectorMissing for a Label rule whose parent lacks the
/// selector field.
bool MatchesRule(const DependencyRule& rule, const ApiObject& parent,
                 const ApiObject& child);

/// Deduplicated edges, sorted by (parent uid, child uid, rule).
std::vector<ObjectEdge> ResolveEdges(std::span<const LogEntry> entries,
                                     std::span<const DependencyRule> rules);

}  // namespace kprop

#endif  // KPROP_DEPS_H_
