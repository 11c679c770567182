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

#ifndef KPROP_RATE_MODEL_H_
#define KPROP_RATE_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "kprop/model.h"

namespace kprop {

struct RateModel {
  enum class Kind { kTokenBucket, kSlowStartBatch };

  Kind kind = Kind::kTokenBucket;
  // TokenBucket
  double rate = 20.0;  // operations per second
  std::uint32_t burst = 1;
  // SlowStartBatch
  std::uint32_t initial_batch = 1;
  Duration batch_period = std::chrono::milliseconds(100);
  std::uint32_t max_batch = 500;

  static RateModel TokenBucket(double rate, std::uint32_t burst = 1);
  static RateModel SlowStartBatch(std::uint32_t initial_batch,
                                  Duration batch_period,
                                  std::uint32_t max_batch = 500);

  /// Throws ConfigError if the parameters break the model's invariants.
  void Validate() const;

  /// Time from the first to the last of `n` back-to-back operations issued
  /// at one instant into a fresh limiter.
  Duration TimeForOperations(std::uint64_t n) const;

  friend bool operator==(const RateModel&, const RateModel&) = default;
};

std::string_view RateModelKindName(RateModel::Kind kind);
std::optional<RateModel::Kind> ParseRateModelKind(std::string_view name);

/// Admission schedule for a stream of operations. Reserve() books one
/// operation and returns the earliest instant it may run (>= now).
class RateLimiter {
 public:
  virtual ~RateLimiter() = default;
  virtual Instant Reserve(Instant now) = 0;
};

/// Generic cell rate algorithm: one permit every 1/rate seconds with up to
/// `burst` permits available at once. Arithmetic is in integer nanoseconds,
/// so schedules are exact under a virtual clock.
class TokenBucketLimiter final : public RateLimiter {
 public:
  TokenBucketLimiter(double rate, std::uint32_t burst);
  Instant Reserve(Instant now) override;

  Duration interval() const { return interval_; }

 private:
  Duration interval_;
  Duration tolerance_;
  std::optional<Instant> theoretical_arrival_;
};

/// Batches that double each period: initial, 2*initial, 4*initial, ...
/// capped at max_batch. A run restarts from the initial size once a whole
/// period passes with the current batch not full.
class SlowStartBatchLimiter final : public RateLimiter {
 public:
  SlowStartBatchLimiter(std::uint32_t initial_batch, Duration period,
                        std::uint32_t max_batch);
  Instant Reserve(Instant now) override;

 private:
  std::uint32_t initial_;
  Duration period_;
  std::uint32_t max_;
  std::optional<Instant> window_start_;
  std::uint64_t batch_size_ = 0;
  std::uint64_t used_ = 0;
};

std::unique_ptr<RateLimiter> MakeRateLimiter(const RateModel& model);

}  // namespace kprop

#endif  // KPROP_RATE_MODEL_H_
