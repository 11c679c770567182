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

#ifndef KPROP_EMULATOR_H_
#define KPROP_EMULATOR_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kprop/clock.h"
#include "kprop/controllers.h"
#include "kprop/store.h"

namespace kprop {

struct EmulatorConfig {
  ClockMode clock = ClockMode::kVirtual;
  std::uint64_t seed = 0;
  Duration delivery_latency{0};
  ControllerConfig controllers;
  bool deployment_controller = true;
  bool replicaset_controller = true;
  bool endpoints_controller = true;
  /// Custom resources registered in addition to the built-in ones.
  std::vector<std::string> extra_resources;

  void Validate() const;
  friend bool operator==(const EmulatorConfig&, const EmulatorConfig&) = default;
};

/// A clock, a store and the enabled controllers, wired together.
class Emulator {
 public:
  explicit Emulator(EmulatorConfig config);
  ~Emulator();

  Emulator(const Emulator&) = delete;
  Emulator& operator=(const Emulator&) = delete;

  const EmulatorConfig& config() const { return config_; }
  Clock& clock() { return clock_; }
  Store& store() { return store_; }
  const std::vector<std::unique_ptr<Controller>>& controllers() const {
    return controllers_;
  }

  /// Fires timers until none is pending (virtual clock) and returns the
  /// number fired. Stops after `max_timers` as a guard against livelock.
  std::size_t RunToQuiescence(std::size_t max_timers = 10'000'000);

 private:
  EmulatorConfig config_;
  Clock clock_;
  Store store_;
  std::vector<std::unique_ptr<Controller>> controllers_;
};

}  // namespace kprop

#endif  // KPROP_EMULATOR_H_
