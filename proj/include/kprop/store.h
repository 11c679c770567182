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

#ifndef KPROP_STORE_H_
#define KPROP_STORE_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kprop/clock.h"
#include "kprop/model.h"

namespace kprop {

using WatchSink = std::function<void(const WatchEvent&)>;
using WatchId = std::uint64_t;

/// Anything the agent can subscribe to. The store implements it; an adapter
/// for a real API server would too.
class EventSource {
 public:
  virtual ~EventSource() = default;

  virtual bool HasResource(std::string_view resource) const = 0;
  /// Delivers every event committed to `resource` after this call, in
  /// commit order.
  virtual WatchId Watch(const std::string& resource, WatchSink sink) = 0;
  virtual void Unwatch(WatchId id) = 0;
  virtual Instant Now() const = 0;
};

/// Pull-style subscription: events are queued at commit time and drained by
/// the consumer, possibly from another thread.
class WatchStream {
 public:
  explicit WatchStream(std::string resource) : resource_(std::move(resource)) {}

  const std::string& resource() const { return resource_; }
  std::optional<WatchEvent> Next();
  std::vector<WatchEvent> Drain();
  std::size_t size() const;

 private:
  friend class Store;
  void Push(const WatchEvent& event);

  std::string resource_;
  mutable std::mutex mu_;
  std::deque<WatchEvent> pending_;
};

std::vector<std::string> DefaultResources();

struct StoreOptions {
  /// Seeds uid generation.
  std::uint64_t seed = 0;
  /// Added to the commit time before push-style watches see an event.
  Duration delivery_latency{0};
  std::vector<std::string> resources = DefaultResources();
};

/// Emulated API server: a versioned object store with per-resource watch
/// fan-out.
///
/// Every committed mutation takes the next value of one global counter as
/// its resourceVersion. Push-style watches are delivered through the clock's
/// timer queue at commit time plus the delivery latency, so per-resource
/// order equals commit order. Mutations are serialized by an internal mutex;
/// the clock itself must only be driven from one thread.
class Store : public EventSource {
 public:
  explicit Store(Clock& clock, StoreOptions options = {});

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void RegisterResource(const std::string& resource);
  bool HasResource(std::string_view resource) const override;
  std::vector<std::string> resources() const;

  /// Assigns a fresh uid, resourceVersion and creationTime. Throws
  /// AlreadyExists, UnknownResource.
  ApiObject Create(ApiObject obj);

  /// Replaces the stored state of the live object with obj's key. The
  /// caller's meta.resource_version is the base version (0 skips the
  /// check); uid and creationTime are kept from the stored object. Throws
  /// NotFound (no live object, or uid mismatch), StaleWrite, InvalidObject.
  ApiObject Update(ApiObject obj);

  /// Removes the object and emits its final snapshot. Owned objects are left
  /// alone. Throws NotFound.
  ApiObject Delete(std::string_view resource, std::string_view namespace_,
                   std::string_view name);

  std::shared_ptr<WatchStream> Subscribe(const std::string& resource);
  WatchId Watch(const std::string& resource, WatchSink sink) override;
  void Unwatch(WatchId id) override;
  Instant Now() const override { return clock_.Now(); }

  std::optional<ApiObject> Get(const ObjectKey& key) const;
  /// Live objects of one resource, ordered by (namespace, name).
  std::vector<ApiObject> List(std::string_view resource) const;

  /// Owner uids recorded at creation for any object ever created in this
  /// store, including deleted ones.
  std::vector<Uid> OwnersOf(const Uid& uid) const;
  /// Follows owner references transitively through creation history.
  bool HasAncestor(const Uid& uid, const Uid& ancestor) const;

  std::uint64_t mutation_count(std::string_view resource) const;
  std::uint64_t mutation_count() const { return next_version_ - 1; }
  std::optional<Instant> last_commit_time() const { return last_commit_; }
  std::optional<Instant> last_commit_time(std::string_view resource) const;
  Clock& clock() { return clock_; }

 private:
  struct PushWatch {
    std::string resource;
    WatchSink sink;
  };

  Uid NextUid();
  void Publish(const WatchEvent& event);

  Clock& clock_;
  StoreOptions options_;
  mutable std::mutex mu_;
  std::set<std::string, std::less<>> resources_;
  std::map<ObjectKey, ApiObject> objects_;
  std::uint64_t next_version_ = 1;
  std::uint64_t uid_counter_ = 0;
  std::map<std::string, std::uint64_t, std::less<>> mutations_;
  std::map<Uid, std::vector<Uid>> lineage_;
  std::optional<Instant> last_commit_;
  std::map<std::string, Instant, std::less<>> last_commits_;

  std::multimap<std::string, std::weak_ptr<WatchStream>> streams_;
  WatchId next_watch_ = 1;
  std::map<WatchId, std::shared_ptr<PushWatch>> watches_;
};

}  // namespace kprop

#endif  // KPROP_STORE_H_
