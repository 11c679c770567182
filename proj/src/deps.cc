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

#include "kprop/deps.h"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "kprop/errors.h"

namespace kprop {
namespace {

constexpr Instant kBeginningOfTime{Duration{std::numeric_limits<Duration::rep>::min()}};
constexpr Instant kEndOfTime{Duration{std::numeric_limits<Duration::rep>::max()}};

/// One object state together with the closed time interval it was current.
struct Snapshot {
  const ApiObject* obj;
  Instant from;
  Instant to;
};

bool Overlaps(const Snapshot& a, const Snapshot& b) {
  return std::max(a.from, b.from) <= std::min(a.to, b.to);
}

/// Every snapshot of every object of `resource`, with validity intervals.
std::vector<Snapshot> Timeline(std::span<const LogEntry> entries,
                               std::string_view resource) {
  std::map<Uid, std::vector<std::size_t>> by_uid;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].obj.resource == resource) {
      by_uid[entries[i].obj.meta.uid].push_back(i);
    }
  }
  std::vector<Snapshot> out;
  for (auto& [uid, idx] : by_uid) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& ea = entries[a];
      const auto& eb = entries[b];
      if (ea.time != eb.time) return ea.time < eb.time;
      if (ea.obj.meta.resource_version != eb.obj.meta.resource_version) {
        return ea.obj.meta.resource_version < eb.obj.meta.resource_version;
      }
      return a < b;
    });
    const LogEntry& first = entries[idx.front()];
    if (first.op == Op::kUpdate && first.old_obj) {
      out.push_back({&*first.old_obj, kBeginningOfTime, first.time});
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const LogEntry& e = entries[idx[k]];
      Instant to = kEndOfTime;
      if (k + 1 < idx.size()) {
        to = entries[idx[k + 1]].time;
      } else if (e.op == Op::kDelete) {
        to = e.time;
      }
      out.push_back({&e.obj, e.time, to});
    }
  }
  return out;
}

std::optional<Labels> TrySelector(const ApiObject& obj, std::string_view field) {
  try {
    return ReadSelector(obj, field);
  } catch (const SelectorMissing&) {
    return std::nullopt;
  }
}

std::string PairKey(const std::string& k, const std::string& v) {
  std::string key;
  key.reserve(k.size() + v.size() + 1);
  key.append(k).push_back('\0');
  key.append(v);
  return key;
}

void ResolveOwner(std::span<const LogEntry> entries, const DependencyRule& rule,
                  std::size_t index, std::set<ObjectEdge>& out) {
  std::set<Uid> parents;
  for (const auto& e : entries) {
    if (e.obj.resource == rule.parent_resource) parents.insert(e.obj.meta.uid);
  }
  for (const auto& s : Timeline(entries, rule.child_resource)) {
    for (const auto& ref : s.obj->meta.owner_references) {
      if (ref.uid != s.obj->meta.uid && parents.contains(ref.uid)) {
        out.insert({ref.uid, s.obj->meta.uid, index});
      }
    }
  }
}

void ResolveNamePrefix(std::span<const LogEntry> entries,
                       const DependencyRule& rule, std::size_t index,
                       std::set<ObjectEdge>& out) {
  // (namespace, name) -> parent uids that ever carried that name.
  std::map<std::pair<std::string, std::string>, std::set<Uid>> parents;
  for (const auto& s : Timeline(entries, rule.parent_resource)) {
    parents[{s.obj->meta.namespace_, s.obj->meta.name}].insert(s.obj->meta.uid);
  }
  for (const auto& s : Timeline(entries, rule.child_resource)) {
    const std::string& name = s.obj->meta.name;
    for (std::size_t pos = name.find('-'); pos != std::string::npos;
         pos = name.find('-', pos + 1)) {
      auto it = parents.find({s.obj->meta.namespace_, name.substr(0, pos)});
      if (it == parents.end()) continue;
      for (const Uid& parent : it->second) {
        if (parent != s.obj->meta.uid) out.insert({parent, s.obj->meta.uid, index});
      }
    }
  }
}

void ResolveLabel(std::span<const LogEntry> entries, const DependencyRule& rule,
                  std::size_t index, std::set<ObjectEdge>& out) {
  const std::vector<Snapshot> children = Timeline(entries, rule.child_resource);
  std::unordered_map<std::string, std::vector<std::size_t>> by_pair;
  for (std::size_t i = 0; i < children.size(); ++i) {
    for (const auto& [k, v] : children[i].obj->meta.labels) {
      by_pair[PairKey(k, v)].push_back(i);
    }
  }
  for (const auto& parent : Timeline(entries, rule.parent_resource)) {
    const auto selector = TrySelector(*parent.obj, rule.selector_field);
    if (!selector || selector->empty()) continue;
    // Probe with the rarest selector pair.
    const std::vector<std::size_t>* candidates = nullptr;
    for (const auto& [k, v] : *selector) {
      auto it = by_pair.find(PairKey(k, v));
      if (it == by_pair.end()) {
        candidates = nullptr;
        break;
      }
      if (!candidates || it->second.size() < candidates->size()) {
        candidates = &it->second;
      }
    }
    if (!candidates) continue;
    for (std::size_t ci : *candidates) {
      const Snapshot& child = children[ci];
      if (child.obj->meta.uid == parent.obj->meta.uid) continue;
      if (child.obj->meta.namespace_ != parent.obj->meta.namespace_) continue;
      if (!Overlaps(parent, child)) continue;
      if (SelectorMatches(*selector, child.obj->meta.labels)) {
        out.insert({parent.obj->meta.uid, child.obj->meta.uid, index});
      }
    }
  }
}

}  // namespace

DependencyRule DependencyRule::Owner(std::string parent, std::string child) {
  return {Kind::kOwner, std::move(parent), std::move(child)};
}

DependencyRule DependencyRule::NamePrefix(std::string parent, std::string child) {
  return {Kind::kNamePrefix, std::move(parent), std::move(child)};
}

DependencyRule DependencyRule::Label(std::string parent, std::string child,
                                     std::string selector_field) {
  return {Kind::kLabel, std::move(parent), std::move(child),
          std::move(selector_field)};
}

void DependencyRule::Validate() const {
  if (parent_resource.empty() || child_resource.empty()) {
    throw ConfigError(Describe() + ": parent and child resources are required");
  }
  if (kind != Kind::kOwner && parent_resource == child_resource) {
    throw ConfigError(Describe() +
                      ": only Owner rules may relate a resource to itself");
  }
  if (kind == Kind::kLabel) {
    const auto dot = selector_field.find('.');
    const std::string head = selector_field.substr(0, dot);
    if (selector_field.empty() ||
        (head != "spec" && head != "status" && selector_field != "meta.labels")) {
      throw ConfigError(Describe() + ": selectorField must start with spec. or status.");
    }
  }
}

std::string DependencyRule::Describe() const {
  return std::string(RuleKindName(kind)) + "(" + parent_resource + "->" +
         child_resource + ")";
}

std::string_view RuleKindName(DependencyRule::Kind kind) {
  switch (kind) {
    case DependencyRule::Kind::kOwner:
      return "Owner";
    case DependencyRule::Kind::kNamePrefix:
      return "NamePrefix";
    case DependencyRule::Kind::kLabel:
      return "Label";
  }
  return "?";
}

std::optional<DependencyRule::Kind> ParseRuleKind(std::string_view name) {
  if (name == "Owner") return DependencyRule::Kind::kOwner;
  if (name == "NamePrefix") return DependencyRule::Kind::kNamePrefix;
  if (name == "Label") return DependencyRule::Kind::kLabel;
  return std::nullopt;
}

Labels ReadSelector(const ApiObject& obj, std::string_view field) {
  if (field == "meta.labels") return obj.meta.labels;
  const auto dot = field.find('.');
  const std::string_view head = field.substr(0, dot);
  const Value* node = nullptr;
  if (head == "spec") {
    node = &obj.spec;
  } else if (head == "status") {
    node = &obj.status;
  } else {
    throw SelectorMissing("unsupported selector field \"" + std::string(field) + "\"");
  }
  std::string_view rest = dot == std::string_view::npos ? "" : field.substr(dot + 1);
  while (!rest.empty()) {
    const auto next = rest.find('.');
    const std::string key(rest.substr(0, next));
    if (!node->is_object()) break;
    auto it = node->find(key);
    if (it == node->end()) {
      throw SelectorMissing(obj.resource + " " + obj.meta.name + ": no field \"" +
                            std::string(field) + "\"");
    }
    node = &*it;
    rest = next == std::string_view::npos ? "" : rest.substr(next + 1);
  }
  if (!node->is_object()) {
    throw SelectorMissing(obj.resource + " " + obj.meta.name + ": \"" +
                          std::string(field) + "\" is not a map");
  }
  Labels selector;
  for (const auto& [k, v] : node->items()) {
    if (!v.is_string()) {
      throw SelectorMissing(obj.resource + " " + obj.meta.name + ": \"" +
                            std::string(field) + "\" has a non-string value");
    }
    selector.emplace(k, v.get<std::string>());
  }
  return selector;
}

bool MatchesRule(const DependencyRule& rule, const ApiObject& parent,
                 const ApiObject& child) {
  if (parent.meta.uid == child.meta.uid) return false;
  switch (rule.kind) {
    case DependencyRule::Kind::kOwner:
      return child.meta.IsOwnedBy(parent.meta.uid);
    case DependencyRule::Kind::kNamePrefix: {
      if (parent.meta.namespace_ != child.meta.namespace_) return false;
      const std::string& name = child.meta.name;
      const std::string& prefix = parent.meta.name;
      return name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0 &&
             name[prefix.size()] == '-';
    }
    case DependencyRule::Kind::kLabel: {
      const Labels selector = ReadSelector(parent, rule.selector_field);
      if (parent.meta.namespace_ != child.meta.namespace_) return false;
      return SelectorMatches(selector, child.meta.labels);
    }
  }
  return false;
}

std::vector<ObjectEdge> ResolveEdges(std::span<const LogEntry> entries,
                                     std::span<const DependencyRule> rules) {
  std::set<ObjectEdge> edges;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    switch (rules[i].kind) {
      case DependencyRule::Kind::kOwner:
        ResolveOwner(entries, rules[i], i, edges);
        break;
      case DependencyRule::Kind::kNamePrefix:
        ResolveNamePrefix(entries, rules[i], i, edges);
        break;
      case DependencyRule::Kind::kLabel:
        ResolveLabel(entries, rules[i], i, edges);
        break;
    }
  }
  return {edges.begin(), edges.end()};
}

}  // namespace kprop
