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

#include "kprop/rate_model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "kprop/errors.h"

namespace kprop {

RateModel RateModel::TokenBucket(double rate, std::uint32_t burst) {
  RateModel m;
  m.kind = Kind::kTokenBucket;
  m.rate = rate;
  m.burst = burst;
  return m;
}

RateModel RateModel::SlowStartBatch(std::uint32_t initial_batch,
                                    Duration batch_period,
                                    std::uint32_t max_batch) {
  RateModel m;
  m.kind = Kind::kSlowStartBatch;
  m.initial_batch = initial_batch;
  m.batch_period = batch_period;
  m.max_batch = max_batch;
  return m;
}

void RateModel::Validate() const {
  if (kind == Kind::kTokenBucket) {
    if (!(rate > 0) || !std::isfinite(rate)) {
      throw ConfigError("TokenBucket rate must be > 0");
    }
    if (burst < 1) throw ConfigError("TokenBucket burst must be >= 1");
    return;
  }
  if (initial_batch < 1) throw ConfigError("SlowStartBatch initialBatch must be >= 1");
  if (batch_period <= Duration::zero()) {
    throw ConfigError("SlowStartBatch batchPeriod must be > 0");
  }
  if (max_batch < initial_batch) {
    throw ConfigError("SlowStartBatch maxBatch must be >= initialBatch");
  }
}

Duration RateModel::TimeForOperations(std::uint64_t n) const {
  if (n == 0) return Duration::zero();
  auto limiter = MakeRateLimiter(*this);
  const Instant start{};
  Instant last = start;
  // Closed forms exist for both models but the simulation is cheap and
  // keeps this in lockstep with the limiters themselves.
  for (std::uint64_t i = 0; i < n; ++i) last = limiter->Reserve(start);
  return last - start;
}

std::string_view RateModelKindName(RateModel::Kind kind) {
  return kind == RateModel::Kind::kTokenBucket ? "TokenBucket"
                                               : "SlowStartBatch";
}

std::optional<RateModel::Kind> ParseRateModelKind(std::string_view name) {
  if (name == "TokenBucket") return RateModel::Kind::kTokenBucket;
  if (name == "SlowStartBatch") return RateModel::Kind::kSlowStartBatch;
  return std::nullopt;
}

TokenBucketLimiter::TokenBucketLimiter(double rate, std::uint32_t burst)
    : interval_(static_cast<Duration::rep>(std::llround(1e9 / rate))),
      tolerance_(interval_ * (static_cast<Duration::rep>(burst) - 1)) {}

Instant TokenBucketLimiter::Reserve(Instant now) {
  const Instant tat = theoretical_arrival_.value_or(now);
  const Instant grant = std::max(now, tat - tolerance_);
  theoretical_arrival_ = std::max(tat, grant) + interval_;
  return grant;
}

SlowStartBatchLimiter::SlowStartBatchLimiter(std::uint32_t initial_batch,
                                             Duration period,
                                             std::uint32_t max_batch)
    : initial_(initial_batch), period_(period), max_(max_batch) {}

Instant SlowStartBatchLimiter::Reserve(Instant now) {
  if (!window_start_ || now >= *window_start_ + period_) {
    window_start_ = now;
    batch_size_ = initial_;
    used_ = 0;
  }
  if (used_ == batch_size_) {
    *window_start_ += period_;
    batch_size_ = std::min<std::uint64_t>(batch_size_ * 2, max_);
    used_ = 0;
  }
  ++used_;
  return std::max(now, *window_start_);
}

std::unique_ptr<RateLimiter> MakeRateLimiter(const RateModel& model) {
  model.Validate();
  if (model.kind == RateModel::Kind::kTokenBucket) {
    return std::make_unique<TokenBucketLimiter>(model.rate, model.burst);
  }
  return std::make_unique<SlowStartBatchLimiter>(
      model.initial_batch, model.batch_period, model.max_batch);
}

}  // namespace kprop
