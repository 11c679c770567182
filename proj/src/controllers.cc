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

#include "kprop/controllers.h"

#include <algorithm>

#include "kprop/errors.h"

namespace kprop {
namespace {

constexpr Duration kRetryDelay = std::chrono::milliseconds(10);
constexpr std::string_view kSuffixAlphabet = "bcdfghjklmnpqrstvwxz2456789";

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string ServiceKey(const ApiObject& obj) {
  return obj.meta.namespace_ + "/" + obj.meta.name;
}

std::vector<Uid> OwnersOfResource(const ApiObject& obj,
                                  std::string_view resource) {
  std::vector<Uid> out;
  for (const auto& ref : obj.meta.owner_references) {
    if (ref.resource == resource) out.push_back(ref.uid);
  }
  return out;
}

}  // namespace

void ControllerConfig::Validate() const {
  creation.Validate();
  deletion.Validate();
  if (reconcile_debounce < Duration::zero()) {
    throw ConfigError("reconcileDebounce must be >= 0");
  }
  if (name_hash_length < 1) throw ConfigError("namePrefixHashLength must be >= 1");
}

std::string NameSuffix(std::uint64_t seed, const Uid& parent,
                       std::uint64_t ordinal, std::uint32_t length) {
  // FNV-1a over the parent uid, then mixed with seed and ordinal.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : parent.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = Mix(h ^ Mix(seed) ^ Mix(ordinal + 0x51ed270b));
  std::string out;
  out.reserve(length);
  for (std::uint32_t i = 0; i < length; ++i) {
    if (i % 8 == 0 && i > 0) state = Mix(state);
    out.push_back(kSuffixAlphabet[(state >> ((i % 8) * 8)) % kSuffixAlphabet.size()]);
  }
  return out;
}

std::int64_t DesiredReplicas(const ApiObject& obj) {
  auto it = obj.spec.find("replicas");
  if (it == obj.spec.end() || !it->is_number_integer()) return 1;
  return std::max<std::int64_t>(0, it->get<std::int64_t>());
}

Labels LabelsAt(const Value& root, const std::vector<std::string>& path) {
  const Value* node = &root;
  for (const auto& part : path) {
    if (!node->is_object()) return {};
    auto it = node->find(part);
    if (it == node->end()) return {};
    node = &*it;
  }
  Labels out;
  if (!node->is_object()) return out;
  for (const auto& [k, v] : node->items()) {
    if (v.is_string()) out.emplace(k, v.get<std::string>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Controller

Controller::Controller(Store& store, ControllerConfig config)
    : store_(store), clock_(store.clock()), config_(std::move(config)) {
  config_.Validate();
}

Controller::~Controller() { Stop(); }

void Controller::Start() {
  for (const auto& resource : WatchedResources()) {
    watches_.push_back(store_.Watch(
        resource, [this](const WatchEvent& e) { OnEvent(e); }));
  }
}

void Controller::Stop() {
  for (WatchId id : watches_) store_.Unwatch(id);
  watches_.clear();
}

void Controller::OnEvent(const WatchEvent& event) { Observe(event); }

void Controller::Enqueue(const std::string& key) {
  if (!queued_.insert(key).second) return;
  clock_.ScheduleAfter(config_.reconcile_debounce, [this, key] {
    queued_.erase(key);
    ++reconciles_;
    Reconcile(key);
  });
}

void Controller::Requeue(const std::string& key) {
  clock_.ScheduleAfter(std::max(config_.reconcile_debounce, kRetryDelay),
                       [this, key] { Enqueue(key); });
}

// ---------------------------------------------------------------------------
// DeploymentController

void DeploymentController::Observe(const WatchEvent& event) {
  const ApiObject& obj = event.obj;
  const Uid& uid = obj.meta.uid;
  if (obj.resource == "deployments") {
    if (event.op == Op::kDelete) {
      deployments_.erase(uid);
    } else {
      deployments_[uid] = obj;
    }
    Enqueue(uid.str());
    return;
  }
  // replicasets
  const auto owners = OwnersOfResource(obj, "deployments");
  if (event.op == Op::kDelete) {
    replicasets_.erase(uid);
    for (const Uid& owner : owners) {
      auto it = owned_.find(owner);
      if (it == owned_.end()) continue;
      it->second.erase(uid);
      if (it->second.empty()) owned_.erase(it);
    }
  } else {
    replicasets_[uid] = obj;
    for (const Uid& owner : owners) {
      owned_[owner].insert(uid);
      creating_.erase(owner);
    }
  }
  for (const Uid& owner : owners) Enqueue(owner.str());
}

void DeploymentController::Reconcile(const std::string& key) {
  const Uid uid(key);
  auto dep = deployments_.find(uid);
  auto owned_it = owned_.find(uid);
  const std::set<Uid> owned =
      owned_it == owned_.end() ? std::set<Uid>{} : owned_it->second;

  if (dep == deployments_.end()) {
    // Deployment is gone: tear down what it owned.
    creating_.erase(uid);
    attempts_.erase(uid);
    for (const Uid& rs_uid : owned) {
      const ApiObject& rs = replicasets_.at(rs_uid);
      try {
        store_.Delete(rs.resource, rs.meta.namespace_, rs.meta.name);
      } catch (const NotFound&) {
      }
    }
    return;
  }

  const ApiObject& d = dep->second;
  const std::int64_t replicas = DesiredReplicas(d);
  if (owned.empty()) {
    if (creating_.contains(uid)) return;
    Value tmpl = Value::object();
    if (auto t = d.spec.find("template"); t != d.spec.end() && t->is_object()) {
      tmpl = *t;
    }
    const Labels labels = LabelsAt(tmpl, {"labels"});
    ApiObject rs;
    rs.resource = "replicasets";
    rs.meta.namespace_ = d.meta.namespace_;
    std::uint64_t& attempt = attempts_[uid];
    rs.meta.name = d.meta.name + "-" +
                   NameSuffix(config_.seed, uid, attempt, config_.name_hash_length);
    rs.meta.labels = labels;
    rs.meta.owner_references.push_back({d.resource, d.meta.name, uid});
    rs.spec["replicas"] = replicas;
    Value selector = Value::object();
    for (const auto& [k, v] : labels) selector[k] = v;
    rs.spec["selector"] = std::move(selector);
    rs.spec["template"] = std::move(tmpl);
    try {
      store_.Create(std::move(rs));
      creating_.insert(uid);
    } catch (const AlreadyExists&) {
      ++attempt;
      Requeue(key);
    }
    return;
  }

  for (const Uid& rs_uid : owned) {
    const ApiObject& rs = replicasets_.at(rs_uid);
    if (DesiredReplicas(rs) == replicas) continue;
    ApiObject updated = rs;
    updated.spec["replicas"] = replicas;
    try {
      store_.Update(std::move(updated));
    } catch (const StaleWrite&) {
      Requeue(key);
    } catch (const NotFound&) {
    }
  }
}

// ---------------------------------------------------------------------------
// ReplicaSetController

ReplicaSetController::ReplicaSetController(Store& store,
                                           ControllerConfig config)
    : Controller(store, std::move(config)),
      creation_(MakeRateLimiter(config_.creation)),
      deletion_(MakeRateLimiter(config_.deletion)) {}

void ReplicaSetController::Observe(const WatchEvent& event) {
  const ApiObject& obj = event.obj;
  const Uid& uid = obj.meta.uid;
  if (obj.resource == "replicasets") {
    if (event.op == Op::kDelete) {
      replicasets_.erase(uid);
    } else {
      replicasets_[uid] = obj;
    }
    Enqueue(uid.str());
    return;
  }
  // pods
  const auto owners = OwnersOfResource(obj, "replicasets");
  if (event.op == Op::kDelete) {
    pods_.erase(uid);
    pending_deletes_.erase(uid);
    for (const Uid& owner : owners) {
      auto it = owned_.find(owner);
      if (it == owned_.end()) continue;
      it->second.erase(uid);
      if (it->second.empty()) owned_.erase(it);
    }
  } else {
    pods_[uid] = obj;
    for (const Uid& owner : owners) {
      owned_[owner].insert(uid);
      if (event.op == Op::kAdd) {
        auto exp = expected_adds_.find(owner);
        if (exp != expected_adds_.end() && exp->second > 0) --exp->second;
      }
    }
  }
  for (const Uid& owner : owners) Enqueue(owner.str());
}

void ReplicaSetController::Reconcile(const std::string& key) {
  const Uid uid(key);
  std::vector<const ApiObject*> live;
  if (auto it = owned_.find(uid); it != owned_.end()) {
    for (const Uid& pod_uid : it->second) live.push_back(&pods_.at(pod_uid));
  }
  // Oldest first.
  std::sort(live.begin(), live.end(), [](const ApiObject* a, const ApiObject* b) {
    return a->meta.resource_version < b->meta.resource_version;
  });
  std::vector<const ApiObject*> active;
  for (const ApiObject* pod : live) {
    if (!pending_deletes_.contains(pod->meta.uid)) active.push_back(pod);
  }

  auto rs_it = replicasets_.find(uid);
  if (rs_it == replicasets_.end()) {
    // ReplicaSet deleted: its Pods go through the deletion model.
    for (const ApiObject* pod : active) ScheduleDelete(*pod);
    if (live.empty()) {
      expected_adds_.erase(uid);
      ordinals_.erase(uid);
    }
    return;
  }

  const ApiObject& rs = rs_it->second;
  const std::int64_t desired = DesiredReplicas(rs);
  const std::int64_t expected = static_cast<std::int64_t>(expected_adds_[uid]);
  const std::int64_t effective = static_cast<std::int64_t>(active.size()) + expected;
  if (effective < desired) {
    for (std::int64_t i = effective; i < desired; ++i) ScheduleCreate(uid);
  } else if (effective > desired) {
    // Newest first on scale-down; in-flight creations are left to land.
    std::int64_t excess = std::min<std::int64_t>(
        effective - desired, static_cast<std::int64_t>(active.size()));
    for (auto it = active.rbegin(); it != active.rend() && excess > 0;
         ++it, --excess) {
      ScheduleDelete(**it);
    }
  }

  const auto observed = static_cast<std::int64_t>(live.size());
  auto status = rs.status.find("replicas");
  if (status == rs.status.end() || !status->is_number_integer() ||
      status->get<std::int64_t>() != observed) {
    ApiObject updated = rs;
    updated.status["replicas"] = observed;
    try {
      store_.Update(std::move(updated));
    } catch (const StaleWrite&) {
      Requeue(key);
    } catch (const NotFound&) {
    }
  }
}

void ReplicaSetController::ScheduleCreate(const Uid& rs) {
  ++expected_adds_[rs];
  clock_.Schedule(creation_->Reserve(clock_.Now()), [this, rs] { CreatePod(rs); });
}

void ReplicaSetController::ScheduleDelete(const ApiObject& pod) {
  if (!pending_deletes_.insert(pod.meta.uid).second) return;
  clock_.Schedule(deletion_->Reserve(clock_.Now()),
                  [this, uid = pod.meta.uid, ns = pod.meta.namespace_,
                   name = pod.meta.name, resource = pod.resource] {
                    try {
                      store_.Delete(resource, ns, name);
                    } catch (const NotFound&) {
                      pending_deletes_.erase(uid);
                    }
                  });
}

void ReplicaSetController::CreatePod(const Uid& rs_uid) {
  auto rs_it = replicasets_.find(rs_uid);
  if (rs_it == replicasets_.end()) {
    auto exp = expected_adds_.find(rs_uid);
    if (exp != expected_adds_.end() && exp->second > 0) --exp->second;
    return;
  }
  const ApiObject& rs = rs_it->second;
  ApiObject pod;
  pod.resource = "pods";
  pod.meta.namespace_ = rs.meta.namespace_;
  pod.meta.labels = LabelsAt(rs.spec, {"template", "labels"});
  pod.meta.owner_references.push_back({rs.resource, rs.meta.name, rs_uid});
  if (auto t = rs.spec.find("template"); t != rs.spec.end() && t->is_object()) {
    if (auto s = t->find("spec"); s != t->end() && s->is_object()) pod.spec = *s;
  }
  std::uint64_t& ordinal = ordinals_[rs_uid];
  for (int attempt = 0; attempt < 8; ++attempt) {
    pod.meta.name = rs.meta.name + "-" +
                    NameSuffix(config_.seed, rs_uid, ordinal++,
                               config_.name_hash_length);
    try {
      store_.Create(pod);
      return;
    } catch (const AlreadyExists&) {
    }
  }
  auto exp = expected_adds_.find(rs_uid);
  if (exp != expected_adds_.end() && exp->second > 0) --exp->second;
  Requeue(rs_uid.str());
}

// ---------------------------------------------------------------------------
// EndpointsController

void EndpointsController::Observe(const WatchEvent& event) {
  const ApiObject& obj = event.obj;
  if (obj.resource == "services") {
    const std::string key = ServiceKey(obj);
    if (event.op == Op::kDelete) {
      services_.erase(key);
    } else {
      services_[key] = obj;
    }
    Enqueue(key);
    return;
  }
  if (obj.resource == "endpoints") {
    const std::string key = ServiceKey(obj);
    if (event.op == Op::kDelete) {
      endpoints_.erase(key);
    } else {
      endpoints_[key] = obj;
    }
    Enqueue(key);
    return;
  }
  // pods
  if (event.op == Op::kDelete) {
    pods_.erase(obj.meta.uid);
  } else {
    pods_[obj.meta.uid] = obj;
  }
  for (const auto& [key, service] : services_) {
    if (service.meta.namespace_ != obj.meta.namespace_) continue;
    const Labels selector = LabelsAt(service.spec, {"selector"});
    const bool now_matches = SelectorMatches(selector, obj.meta.labels);
    const bool was_matching =
        event.old_obj && SelectorMatches(selector, event.old_obj->meta.labels);
    if (now_matches || was_matching) Enqueue(key);
  }
}

Value EndpointsController::DesiredStatus(const ApiObject& service) const {
  const Labels selector = LabelsAt(service.spec, {"selector"});
  std::vector<const ApiObject*> matched;
  for (const auto& [uid, pod] : pods_) {
    if (pod.meta.namespace_ == service.meta.namespace_ &&
        SelectorMatches(selector, pod.meta.labels)) {
      matched.push_back(&pod);
    }
  }
  std::sort(matched.begin(), matched.end(),
            [](const ApiObject* a, const ApiObject* b) {
              return a->meta.name < b->meta.name;
            });
  Value addresses = Value::array();
  for (const ApiObject* pod : matched) {
    addresses.push_back({{"name", pod->meta.name}, {"uid", pod->meta.uid.str()}});
  }
  return Value{{"addresses", std::move(addresses)}};
}

void EndpointsController::Reconcile(const std::string& key) {
  auto svc = services_.find(key);
  auto ep = endpoints_.find(key);
  try {
    if (svc == services_.end()) {
      if (ep != endpoints_.end()) {
        store_.Delete(ep->second.resource, ep->second.meta.namespace_,
                      ep->second.meta.name);
      }
      return;
    }
    Value desired = DesiredStatus(svc->second);
    if (ep == endpoints_.end()) {
      ApiObject obj;
      obj.resource = "endpoints";
      obj.meta.namespace_ = svc->second.meta.namespace_;
      obj.meta.name = svc->second.meta.name;
      obj.meta.labels = svc->second.meta.labels;
      obj.status = std::move(desired);
      store_.Create(std::move(obj));
      return;
    }
    if (ep->second.status == desired) return;
    ApiObject updated = ep->second;
    updated.status = std::move(desired);
    store_.Update(std::move(updated));
  } catch (const AlreadyExists&) {
    // Our cache has not seen the Endpoints Add yet.
    Requeue(key);
  } catch (const StaleWrite&) {
    Requeue(key);
  } catch (const NotFound&) {
  }
}

}  // namespace kprop
