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

#ifndef KPROP_CONTROLLERS_H_
#define KPROP_CONTROLLERS_H_

// Reconciliation loops for the emulated control plane.
//
// Each controller keeps its own cache, fed only by watch events, and a
// debounced work queue of keys. Controllers never talk to each other; every
// cross-controller effect goes through the store.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "kprop/clock.h"
#include "kprop/rate_model.h"
#include "kprop/store.h"

namespace kprop {

struct ControllerConfig {
  RateModel creation = RateModel::TokenBucket(20.0, 1);
  RateModel deletion =
      RateModel::SlowStartBatch(1, std::chrono::milliseconds(100), 500);
  Duration reconcile_debounce{0};
  std::uint32_t name_hash_length = 5;
  /// Seeds generated name suffixes.
  std::uint64_t seed = 0;

  void Validate() const;
  friend bool operator==(const ControllerConfig&,
                         const ControllerConfig&) = default;
};

/// Deterministic name suffix drawn from the alphabet Kubernetes uses for
/// generated names.
std::string NameSuffix(std::uint64_t seed, const Uid& parent,
                       std::uint64_t ordinal, std::uint32_t length);

/// Reads spec.replicas (default 1, negatives clamp to 0).
std::int64_t DesiredReplicas(const ApiObject& obj);
/// Reads a string map at `path` inside spec (e.g. {"template", "labels"}).
Labels LabelsAt(const Value& root, const std::vector<std::string>& path);

class Controller {
 public:
  Controller(Store& store, ControllerConfig config);
  virtual ~Controller();

  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  /// Subscribes to the controller's resources.
  void Start();
  void Stop();

  /// Feeds one watch event: updates the cache and queues reconciliation of
  /// every affected key. Mutations happen when the queue runs on the clock.
  void OnEvent(const WatchEvent& event);

  std::uint64_t reconciles() const { return reconciles_; }
  virtual std::vector<std::string> WatchedResources() const = 0;

 protected:
  virtual void Observe(const WatchEvent& event) = 0;
  virtual void Reconcile(const std::string& key) = 0;

  void Enqueue(const std::string& key);
  /// Retries after a failed write.
  void Requeue(const std::string& key);

  Store& store_;
  Clock& clock_;
  ControllerConfig config_;

 private:
  std::set<std::string> queued_;
  std::vector<WatchId> watches_;
  std::uint64_t reconciles_ = 0;
};

/// Deployment -> ReplicaSet. Creates one ReplicaSet per Deployment named
/// "<deployment>-<hash>", keeps its replica count in sync, and deletes it
/// when the Deployment goes away.
class DeploymentController final : public Controller {
 public:
  using Controller::Controller;
  std::vector<std::string> WatchedResources() const override {
    return {"deployments", "replicasets"};
  }

 protected:
  void Observe(const WatchEvent& event) override;
  void Reconcile(const std::string& key) override;

 private:
  std::map<Uid, ApiObject> deployments_;
  std::map<Uid, ApiObject> replicasets_;
  std::map<Uid, std::set<Uid>> owned_;
  std::set<Uid> creating_;
  std::map<Uid, std::uint64_t> attempts_;
};

/// ReplicaSet -> Pods. Drives the live owned-Pod count toward
/// spec.replicas. Creations go through the creation rate model, deletions
/// (scale-down and teardown after the ReplicaSet is deleted) through the
/// deletion rate model.
class ReplicaSetController final : public Controller {
 public:
  ReplicaSetController(Store& store, ControllerConfig config);
  std::vector<std::string> WatchedResources() const override {
    return {"replicasets", "pods"};
  }

 protected:
  void Observe(const WatchEvent& event) override;
  void Reconcile(const std::string& key) override;

 private:
  void ScheduleCreate(const Uid& rs);
  void ScheduleDelete(const ApiObject& pod);
  void CreatePod(const Uid& rs);

  std::unique_ptr<RateLimiter> creation_;
  std::unique_ptr<RateLimiter> deletion_;
  std::map<Uid, ApiObject> replicasets_;
  std::map<Uid, ApiObject> pods_;
  std::map<Uid, std::set<Uid>> owned_;
  std::map<Uid, std::uint64_t> expected_adds_;
  std::set<Uid> pending_deletes_;
  std::map<Uid, std::uint64_t> ordinals_;
};

/// Service + Pods -> Endpoints. One Endpoints object per Service, same
/// name, whose status.addresses lists the live Pods matching
/// spec.selector.
class EndpointsController final : public Controller {
 public:
  using Controller::Controller;
  std::vector<std::string> WatchedResources() const override {
    return {"services", "pods", "endpoints"};
  }

 protected:
  void Observe(const WatchEvent& event) override;
  void Reconcile(const std::string& key) override;

 private:
  Value DesiredStatus(const ApiObject& service) const;

  // Keyed by "namespace/name".
  std::map<std::string, ApiObject> services_;
  std::map<std::string, ApiObject> endpoints_;
  std::map<Uid, ApiObject> pods_;
};

}  // namespace kprop

#endif  // KPROP_CONTROLLERS_H_
