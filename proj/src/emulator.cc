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

#include "kprop/emulator.h"

#include "kprop/errors.h"

namespace kprop {
namespace {

StoreOptions MakeStoreOptions(const EmulatorConfig& config) {
  StoreOptions options;
  options.seed = config.seed;
  options.delivery_latency = config.delivery_latency;
  for (const auto& r : config.extra_resources) options.resources.push_back(r);
  return options;
}

ControllerConfig Seeded(ControllerConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

}  // namespace

void EmulatorConfig::Validate() const {
  if (delivery_latency < Duration::zero()) {
    throw ConfigError("deliveryLatency must be >= 0");
  }
  controllers.Validate();
}

Emulator::Emulator(EmulatorConfig config)
    : config_((config.Validate(), std::move(config))),
      clock_(config_.clock),
      store_(clock_, MakeStoreOptions(config_)) {
  const ControllerConfig cc = Seeded(config_.controllers, config_.seed);
  if (config_.deployment_controller) {
    controllers_.push_back(std::make_unique<DeploymentController>(store_, cc));
  }
  if (config_.replicaset_controller) {
    controllers_.push_back(std::make_unique<ReplicaSetController>(store_, cc));
  }
  if (config_.endpoints_controller) {
    controllers_.push_back(std::make_unique<EndpointsController>(store_, cc));
  }
  for (auto& c : controllers_) c->Start();
}

Emulator::~Emulator() {
  for (auto& c : controllers_) c->Stop();
}

std::size_t Emulator::RunToQuiescence(std::size_t max_timers) {
  std::size_t fired = 0;
  while (fired < max_timers) {
    const std::size_t n = clock_.RunNext();
    if (n == 0) break;
    fired += n;
  }
  return fired;
}

}  // namespace kprop
