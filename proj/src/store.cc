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

#include "kprop/store.h"

#include <cstdio>

#include "kprop/errors.h"

namespace kprop {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string Describe(const ObjectKey& key) {
  return key.resource + " " + key.namespace_ + "/" + key.name;
}

}  // namespace

std::optional<WatchEvent> WatchStream::Next() {
  std::lock_guard lock(mu_);
  if (pending_.empty()) return std::nullopt;
  WatchEvent event = std::move(pending_.front());
  pending_.pop_front();
  return event;
}

std::vector<WatchEvent> WatchStream::Drain() {
  std::lock_guard lock(mu_);
  std::vector<WatchEvent> out(std::make_move_iterator(pending_.begin()),
                              std::make_move_iterator(pending_.end()));
  pending_.clear();
  return out;
}

std::size_t WatchStream::size() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

void WatchStream::Push(const WatchEvent& event) {
  std::lock_guard lock(mu_);
  pending_.push_back(event);
}

std::vector<std::string> DefaultResources() {
  return {"deployments", "replicasets", "pods", "services", "endpoints"};
}

Store::Store(Clock& clock, StoreOptions options)
    : clock_(clock), options_(std::move(options)) {
  for (const auto& r : options_.resources) resources_.insert(r);
}

void Store::RegisterResource(const std::string& resource) {
  std::lock_guard lock(mu_);
  resources_.insert(resource);
}

bool Store::HasResource(std::string_view resource) const {
  std::lock_guard lock(mu_);
  return resources_.find(resource) != resources_.end();
}

std::vector<std::string> Store::resources() const {
  std::lock_guard lock(mu_);
  return {resources_.begin(), resources_.end()};
}

Uid Store::NextUid() {
  const std::uint64_t n = ++uid_counter_;
  const std::uint64_t hi = SplitMix64(options_.seed ^ SplitMix64(n));
  char buf[40];
  // The low 48 bits carry the counter, so uids never repeat within a run.
  std::snprintf(buf, sizeof(buf), "%08llx-%04llx-%04llx-%04llx-%012llx",
                static_cast<unsigned long long>(hi >> 32),
                static_cast<unsigned long long>((hi >> 16) & 0xffff),
                static_cast<unsigned long long>(hi & 0xffff),
                static_cast<unsigned long long>((n >> 48) & 0xffff),
                static_cast<unsigned long long>(n & 0xffffffffffffULL));
  return Uid(buf);
}

ApiObject Store::Create(ApiObject obj) {
  WatchEvent event;
  {
    std::lock_guard lock(mu_);
    if (resources_.find(obj.resource) == resources_.end()) {
      throw UnknownResource("unknown resource \"" + obj.resource + "\"");
    }
    const ObjectKey key = KeyOf(obj);
    if (objects_.contains(key)) {
      throw AlreadyExists(Describe(key) + " already exists");
    }
    obj.meta.uid = NextUid();
    obj.meta.resource_version = next_version_++;
    obj.meta.creation_time = clock_.Now();
    auto& owners = lineage_[obj.meta.uid];
    for (const auto& ref : obj.meta.owner_references) owners.push_back(ref.uid);
    objects_.emplace(key, obj);
    ++mutations_[obj.resource];
    last_commit_ = last_commits_[obj.resource] = obj.meta.creation_time;
    event = WatchEvent{obj.meta.creation_time, Op::kAdd, obj, std::nullopt};
  }
  Publish(event);
  return obj;
}

ApiObject Store::Update(ApiObject obj) {
  WatchEvent event;
  {
    std::lock_guard lock(mu_);
    const ObjectKey key = KeyOf(obj);
    auto it = objects_.find(key);
    if (it == objects_.end()) throw NotFound(Describe(key) + " not found");
    ApiObject& current = it->second;
    if (!obj.meta.uid.empty() && obj.meta.uid != current.meta.uid) {
      throw NotFound(Describe(key) + " has a different uid");
    }
    if (obj.meta.resource_version != 0 &&
        obj.meta.resource_version != current.meta.resource_version) {
      throw StaleWrite(Describe(key) + ": base version " +
                       std::to_string(obj.meta.resource_version) +
                       " is not current (" +
                       std::to_string(current.meta.resource_version) + ")");
    }
    if (obj.meta.IsOwnedBy(current.meta.uid)) {
      throw InvalidObject(Describe(key) + " cannot own itself");
    }
    obj.meta.uid = current.meta.uid;
    obj.meta.creation_time = current.meta.creation_time;
    obj.meta.resource_version = next_version_++;
    const Instant now = clock_.Now();
    event = WatchEvent{now, Op::kUpdate, obj, current};
    current = obj;
    ++mutations_[obj.resource];
    last_commit_ = last_commits_[obj.resource] = now;
  }
  Publish(event);
  return obj;
}

ApiObject Store::Delete(std::string_view resource, std::string_view namespace_,
                        std::string_view name) {
  WatchEvent event;
  {
    std::lock_guard lock(mu_);
    const ObjectKey key{std::string(resource), std::string(namespace_),
                        std::string(name)};
    auto it = objects_.find(key);
    if (it == objects_.end()) throw NotFound(Describe(key) + " not found");
    ApiObject final_state = std::move(it->second);
    objects_.erase(it);
    // The deletion is a committed mutation; the final snapshot carries its
    // version so every event of a uid has a distinct, increasing version.
    final_state.meta.resource_version = next_version_++;
    ++mutations_[final_state.resource];
    const Instant now = clock_.Now();
    last_commit_ = last_commits_[final_state.resource] = now;
    event = WatchEvent{now, Op::kDelete, final_state, std::nullopt};
  }
  Publish(event);
  return event.obj;
}

void Store::Publish(const WatchEvent& event) {
  std::vector<std::shared_ptr<PushWatch>> sinks;
  {
    std::lock_guard lock(mu_);
    auto [lo, hi] = streams_.equal_range(event.obj.resource);
    for (auto it = lo; it != hi;) {
      if (auto stream = it->second.lock()) {
        stream->Push(event);
        ++it;
      } else {
        it = streams_.erase(it);
      }
    }
    for (const auto& [id, watch] : watches_) {
      if (watch->resource == event.obj.resource) sinks.push_back(watch);
    }
  }
  const Instant at = event.time + options_.delivery_latency;
  for (auto& watch : sinks) {
    std::weak_ptr<PushWatch> weak = watch;
    clock_.Schedule(at, [weak, event] {
      // An unwatched sink is dropped; events already queued for it are not
      // delivered.
      if (auto w = weak.lock()) w->sink(event);
    });
  }
}

std::shared_ptr<WatchStream> Store::Subscribe(const std::string& resource) {
  auto stream = std::make_shared<WatchStream>(resource);
  std::lock_guard lock(mu_);
  streams_.emplace(resource, stream);
  return stream;
}

WatchId Store::Watch(const std::string& resource, WatchSink sink) {
  std::lock_guard lock(mu_);
  const WatchId id = next_watch_++;
  watches_.emplace(id, std::make_shared<PushWatch>(PushWatch{resource, std::move(sink)}));
  return id;
}

void Store::Unwatch(WatchId id) {
  std::lock_guard lock(mu_);
  watches_.erase(id);
}

std::optional<ApiObject> Store::Get(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  auto it = objects_.find(key);
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

std::vector<ApiObject> Store::List(std::string_view resource) const {
  std::lock_guard lock(mu_);
  std::vector<ApiObject> out;
  const ObjectKey lo{std::string(resource), "", ""};
  for (auto it = objects_.lower_bound(lo);
       it != objects_.end() && it->first.resource == resource; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<Uid> Store::OwnersOf(const Uid& uid) const {
  std::lock_guard lock(mu_);
  auto it = lineage_.find(uid);
  return it == lineage_.end() ? std::vector<Uid>{} : it->second;
}

bool Store::HasAncestor(const Uid& uid, const Uid& ancestor) const {
  std::lock_guard lock(mu_);
  std::vector<Uid> frontier{uid};
  std::set<Uid> seen;
  while (!frontier.empty()) {
    Uid current = std::move(frontier.back());
    frontier.pop_back();
    if (!seen.insert(current).second) continue;
    auto it = lineage_.find(current);
    if (it == lineage_.end()) continue;
    for (const Uid& owner : it->second) {
      if (owner == ancestor) return true;
      frontier.push_back(owner);
    }
  }
  return false;
}

std::optional<Instant> Store::last_commit_time(std::string_view resource) const {
  std::lock_guard lock(mu_);
  auto it = last_commits_.find(resource);
  if (it == last_commits_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Store::mutation_count(std::string_view resource) const {
  std::lock_guard lock(mu_);
  auto it = mutations_.find(resource);
  return it == mutations_.end() ? 0 : it->second;
}

}  // namespace kprop
