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

#ifndef KPROP_TESTS_SUPPORT_ORACLES_H_
#define KPROP_TESTS_SUPPORT_ORACLES_H_

// Test-only reference implementations. They are deliberately naive
// (quadratic scans, no indexes) and share no code with the library beyond
// the data types, so agreement with the library is meaningful.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kprop/aggregator.h"
#include "kprop/deps.h"
#include "kprop/model.h"

namespace kprop::testing {

inline Instant At(std::int64_t ms) { return Instant{std::chrono::milliseconds(ms)}; }

inline ApiObject MakeObject(std::string resource, std::string name, std::string uid,
                            std::uint64_t rv = 1, Labels labels = {}) {
  ApiObject o;
  o.resource = std::move(resource);
  o.meta.name = std::move(name);
  o.meta.namespace_ = "default";
  o.meta.uid = Uid(std::move(uid));
  o.meta.resource_version = rv;
  o.meta.labels = std::move(labels);
  return o;
}

inline LogEntry MakeEntry(Instant t, Op op, ApiObject obj,
                          std::optional<ApiObject> old = std::nullopt) {
  return LogEntry{t, op, std::move(obj), std::move(old)};
}

// ---------------------------------------------------------------------------
// Random logs

/// Generates time-ordered logs with plenty of ties, repeated names, label and
/// owner changes, dangling owner references, missing or malformed selectors,
/// and objects first seen through an Update.
class RandomLogGenerator {
 public:
  explicit RandomLogGenerator(std::uint64_t seed) : rng_(seed) {}

  std::vector<LogEntry> Generate(std::size_t max_entries) {
    const std::size_t target = Pick(max_entries + 1);
    std::vector<LogEntry> out;
    std::vector<ApiObject> live;
    std::vector<ApiObject> known;  // every object ever seen, for owner refs
    std::int64_t now_us = 1'000'000;
    std::uint64_t rv = 0;
    std::uint64_t uid_counter = 0;
    while (out.size() < target) {
      const int tick = static_cast<int>(Pick(4));
      if (tick == 1) now_us += 1;
      if (tick >= 2) now_us += static_cast<std::int64_t>(Pick(50'000));
      const Instant t{std::chrono::microseconds(now_us)};
      const std::size_t dice = Pick(100);
      if (live.empty() || dice < 35) {
        ApiObject obj = RandomObject(known, ++uid_counter);
        obj.meta.resource_version = ++rv;
        if (Pick(8) == 0) {
          // First seen through an Update: the previous state was never logged.
          ApiObject old = obj;
          Mutate(old, known);
          old.meta.resource_version = rv;
          obj.meta.resource_version = ++rv;
          out.push_back(MakeEntry(t, Op::kUpdate, obj, old));
        } else {
          out.push_back(MakeEntry(t, Op::kAdd, obj));
        }
        live.push_back(obj);
        known.push_back(obj);
      } else if (dice < 80) {
        ApiObject& obj = live[Pick(live.size())];
        ApiObject old = obj;
        Mutate(obj, known);
        obj.meta.resource_version = ++rv;
        out.push_back(MakeEntry(t, Op::kUpdate, obj, old));
        known.push_back(obj);
      } else {
        const std::size_t i = Pick(live.size());
        ApiObject obj = live[i];
        obj.meta.resource_version = ++rv;
        out.push_back(MakeEntry(t, Op::kDelete, obj));
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    return out;
  }

  static std::vector<DependencyRule> Rules() {
    return {DependencyRule::Owner("deployments", "replicasets"),
            DependencyRule::Owner("replicasets", "pods"),
            DependencyRule::Owner("pods", "pods"),
            DependencyRule::NamePrefix("deployments", "replicasets"),
            DependencyRule::NamePrefix("replicasets", "pods"),
            DependencyRule::Label("services", "pods"),
            DependencyRule::Label("deployments", "pods", "spec.template"),
            DependencyRule::Label("replicasets", "pods", "meta.labels")};
  }

 private:
  std::size_t Pick(std::size_t n) {
    return n == 0 ? 0 : std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  template <typename T>
  const T& OneOf(const std::vector<T>& v) {
    return v[Pick(v.size())];
  }

  Labels RandomLabels() {
    static const std::vector<std::string> apps = {"web", "db", "api"};
    static const std::vector<std::string> tiers = {"fe", "be"};
    Labels l;
    if (Pick(5) != 0) l["app"] = OneOf(apps);
    if (Pick(2) == 0) l["tier"] = OneOf(tiers);
    return l;
  }

  Value RandomSelector() {
    switch (Pick(6)) {
      case 0:
        return Value();  // field absent
      case 1:
        return Value::object();  // empty selector never matches
      case 2:
        return "app=web";  // not a map
      default: {
        Value sel = Value::object();
        for (const auto& [k, v] : RandomLabels()) sel[k] = v;
        return sel;
      }
    }
  }

  std::string RandomName(const std::string& resource, const std::vector<ApiObject>& known) {
    static const std::vector<std::string> roots = {"web", "db", "api", "web-x", "webapp"};
    if (resource == "deployments" || resource == "services") return OneOf(roots);
    if (!known.empty() && Pick(3) != 0) {
      return OneOf(known).meta.name + "-" + std::to_string(Pick(4));
    }
    return OneOf(roots) + (Pick(2) ? "-" + std::to_string(Pick(3)) : "");
  }

  void SetOwners(ApiObject& obj, const std::vector<ApiObject>& known) {
    obj.meta.owner_references.clear();
    const std::size_t n = Pick(3);
    for (std::size_t i = 0; i < n; ++i) {
      if (!known.empty() && Pick(5) != 0) {
        const ApiObject& owner = OneOf(known);
        if (owner.meta.uid == obj.meta.uid) continue;
        obj.meta.owner_references.push_back({owner.resource, owner.meta.name, owner.meta.uid});
      } else {
        obj.meta.owner_references.push_back({"replicasets", "ghost", Uid("ghost-uid")});
      }
    }
  }

  void SetSelector(ApiObject& obj) {
    Value sel = RandomSelector();
    obj.spec.erase("selector");
    obj.spec.erase("template");
    if (sel.is_null()) return;
    obj.spec[obj.resource == "deployments" ? "template" : "selector"] = sel;
  }

  ApiObject RandomObject(const std::vector<ApiObject>& known, std::uint64_t id) {
    static const std::vector<std::string> resources = {"deployments", "replicasets",
                                                       "pods", "pods", "services"};
    ApiObject obj;
    obj.resource = OneOf(resources);
    obj.meta.name = RandomName(obj.resource, known);
    obj.meta.namespace_ = Pick(6) == 0 ? "prod" : "default";
    obj.meta.uid = Uid("uid-" + std::to_string(id));
    obj.meta.labels = RandomLabels();
    SetOwners(obj, known);
    SetSelector(obj);
    return obj;
  }

  void Mutate(ApiObject& obj, const std::vector<ApiObject>& known) {
    switch (Pick(4)) {
      case 0:
        obj.meta.labels = RandomLabels();
        break;
      case 1:
        SetOwners(obj, known);
        break;
      case 2:
        SetSelector(obj);
        break;
      default:
        obj.status["n"] = Pick(10);
        break;
    }
  }

  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Dependency resolution

struct OracleSnapshot {
  ApiObject obj;
  Instant from;
  Instant to;
};

/// Every state each object was observed in, with the closed interval of log
/// time it was current. Objects first seen through an Update were in their
/// OldObj state since the beginning of time.
inline std::vector<OracleSnapshot> OracleSnapshots(const std::vector<LogEntry>& entries) {
  const Instant lo{Duration{std::numeric_limits<Duration::rep>::min()}};
  const Instant hi{Duration{std::numeric_limits<Duration::rep>::max()}};
  std::vector<OracleSnapshot> out;
  std::set<Uid> uids;
  for (const auto& e : entries) uids.insert(e.obj.meta.uid);
  for (const Uid& uid : uids) {
    std::vector<const LogEntry*> mine;
    for (const auto& e : entries) {
      if (e.obj.meta.uid == uid) mine.push_back(&e);
    }
    // Insertion sort by (time, resourceVersion); entries of one uid are
    // already in log order, which breaks the remaining ties.
    for (std::size_t i = 1; i < mine.size(); ++i) {
      for (std::size_t j = i; j > 0; --j) {
        const LogEntry* a = mine[j - 1];
        const LogEntry* b = mine[j];
        const bool swap = b->time < a->time ||
                          (b->time == a->time &&
                           b->obj.meta.resource_version < a->obj.meta.resource_version);
        if (!swap) break;
        std::swap(mine[j - 1], mine[j]);
      }
    }
    if (mine.front()->op == Op::kUpdate && mine.front()->old_obj) {
      out.push_back({*mine.front()->old_obj, lo, mine.front()->time});
    }
    for (std::size_t k = 0; k < mine.size(); ++k) {
      Instant to = hi;
      if (k + 1 < mine.size()) {
        to = mine[k + 1]->time;
      } else if (mine[k]->op == Op::kDelete) {
        to = mine[k]->time;
      }
      out.push_back({mine[k]->obj, mine[k]->time, to});
    }
  }
  return out;
}

/// Selector at `field`, or nullopt if absent, not a map, or not all strings.
inline std::optional<Labels> OracleSelector(const ApiObject& obj, const std::string& field) {
  if (field == "meta.labels") return obj.meta.labels;
  const Value* node = nullptr;
  std::string rest;
  if (field.rfind("spec.", 0) == 0) {
    node = &obj.spec;
    rest = field.substr(5);
  } else if (field.rfind("status.", 0) == 0) {
    node = &obj.status;
    rest = field.substr(7);
  } else {
    return std::nullopt;
  }
  std::size_t start = 0;
  while (start <= rest.size()) {
    const std::size_t dot = rest.find('.', start);
    const std::string key = rest.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(key)) return std::nullopt;
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_object()) return std::nullopt;
  Labels out;
  for (auto it = node->begin(); it != node->end(); ++it) {
    if (!it.value().is_string()) return std::nullopt;
    out[it.key()] = it.value().get<std::string>();
  }
  return out;
}

inline bool OracleMatches(const DependencyRule& rule, const OracleSnapshot& p,
                          const OracleSnapshot& c) {
  if (p.obj.meta.uid == c.obj.meta.uid) return false;
  switch (rule.kind) {
    case DependencyRule::Kind::kOwner:
      for (const auto& ref : c.obj.meta.owner_references) {
        if (ref.uid == p.obj.meta.uid) return true;
      }
      return false;
    case DependencyRule::Kind::kNamePrefix: {
      if (p.obj.meta.namespace_ != c.obj.meta.namespace_) return false;
      const std::string prefix = p.obj.meta.name + "-";
      return c.obj.meta.name.size() > prefix.size() &&
             c.obj.meta.name.substr(0, prefix.size()) == prefix;
    }
    case DependencyRule::Kind::kLabel: {
      if (p.obj.meta.namespace_ != c.obj.meta.namespace_) return false;
      if (std::max(p.from, c.from) > std::min(p.to, c.to)) return false;
      const auto sel = OracleSelector(p.obj, rule.selector_field);
      if (!sel || sel->empty()) return false;
      for (const auto& [k, v] : *sel) {
        auto it = c.obj.meta.labels.find(k);
        if (it == c.obj.meta.labels.end() || it->second != v) return false;
      }
      return true;
    }
  }
  return false;
}

/// All (parent, child, rule) triples witnessed by some pair of snapshots.
inline std::set<ObjectEdge> OracleEdges(const std::vector<LogEntry>& entries,
                                        const std::vector<DependencyRule>& rules) {
  const auto snaps = OracleSnapshots(entries);
  std::set<ObjectEdge> out;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    for (const auto& p : snaps) {
      if (p.obj.resource != rules[r].parent_resource) continue;
      for (const auto& c : snaps) {
        if (c.obj.resource != rules[r].child_resource) continue;
        if (OracleMatches(rules[r], p, c)) out.insert({p.obj.meta.uid, c.obj.meta.uid, r});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlation

/// For every edge and every child entry, the latest qualifying parent entry
/// by (time, resourceVersion, offset), found by scanning the whole log.
inline Correlation OracleCorrelate(const std::vector<LogEntry>& entries,
                                   const std::vector<ObjectEdge>& edges, MatchMode mode) {
  Correlation out;
  for (const auto& edge : edges) {
    for (std::size_t ci = 0; ci < entries.size(); ++ci) {
      const LogEntry& child = entries[ci];
      if (child.obj.meta.uid != edge.child_uid) continue;
      std::optional<std::size_t> best;
      for (std::size_t pi = 0; pi < entries.size(); ++pi) {
        const LogEntry& p = entries[pi];
        if (p.obj.meta.uid != edge.parent_uid || p.time > child.time) continue;
        if (mode == MatchMode::kSameOp && p.op != child.op) continue;
        if (!best) {
          best = pi;
          continue;
        }
        const LogEntry& b = entries[*best];
        if (p.time > b.time ||
            (p.time == b.time && (p.obj.meta.resource_version > b.obj.meta.resource_version ||
                                  (p.obj.meta.resource_version ==
                                       b.obj.meta.resource_version &&
                                   pi > *best)))) {
          best = pi;
        }
      }
      if (best) {
        out.records.push_back({edge, *best, ci, entries[*best].op, child.op,
                               child.time - entries[*best].time});
      } else {
        out.orphans.push_back({edge, ci});
      }
    }
  }
  return out;
}

}  // namespace kprop::testing

#endif  // KPROP_TESTS_SUPPORT_ORACLES_H_
