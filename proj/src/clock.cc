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

#include "kprop/clock.h"

#include <string>
#include <thread>

#include "kprop/errors.h"

namespace kprop {

std::string_view ClockModeName(ClockMode mode) {
  return mode == ClockMode::kVirtual ? "virtual" : "real";
}

ClockMode ParseClockMode(std::string_view name) {
  if (name == "virtual") return ClockMode::kVirtual;
  if (name == "real") return ClockMode::kRealTime;
  throw ConfigError("clock: expected \"virtual\" or \"real\", got \"" +
                    std::string(name) + "\"");
}

Clock::Clock(ClockMode mode, Instant virtual_start)
    : mode_(mode), virtual_now_(virtual_start) {}

Instant Clock::Now() const {
  if (mode_ == ClockMode::kVirtual) return virtual_now_;
  return std::chrono::time_point_cast<Duration>(
      std::chrono::system_clock::now());
}

Clock::TimerId Clock::Schedule(Instant deadline, Callback callback) {
  const std::uint64_t seq = next_seq_++;
  queue_.push(Timer{deadline, seq, seq, std::move(callback)});
  active_.insert(seq);
  return seq;
}

void Clock::Cancel(TimerId id) { active_.erase(id); }

void Clock::DropCancelledHead() {
  while (!queue_.empty() && !active_.contains(queue_.top().id)) queue_.pop();
}

std::optional<Instant> Clock::NextDeadline() {
  DropCancelledHead();
  if (queue_.empty()) return std::nullopt;
  return queue_.top().deadline;
}

std::size_t Clock::FireThrough(Instant target) {
  std::size_t fired = 0;
  for (DropCancelledHead(); !queue_.empty() && queue_.top().deadline <= target;
       DropCancelledHead()) {
    // priority_queue::top is const; the callback is moved out before pop.
    Timer timer = std::move(const_cast<Timer&>(queue_.top()));
    queue_.pop();
    active_.erase(timer.id);
    if (mode_ == ClockMode::kVirtual && timer.deadline > virtual_now_) {
      virtual_now_ = timer.deadline;
    }
    timer.callback();
    ++fired;
  }
  return fired;
}

std::size_t Clock::Advance(Duration d) {
  if (mode_ != ClockMode::kVirtual) {
    throw WrongClockMode("Advance requires a virtual clock");
  }
  const Instant target = virtual_now_ + d;
  const std::size_t fired = FireThrough(target);
  virtual_now_ = target;
  return fired;
}

std::size_t Clock::RunDue() { return FireThrough(Now()); }

void Clock::SleepUntil(Instant t) const {
  std::this_thread::sleep_until(
      std::chrono::time_point<std::chrono::system_clock, Duration>(
          t.time_since_epoch()));
}

std::size_t Clock::RunNext() {
  DropCancelledHead();
  if (queue_.empty()) return 0;
  const Instant deadline = queue_.top().deadline;
  if (mode_ == ClockMode::kRealTime) {
    if (deadline > Now()) SleepUntil(deadline);
    return RunDue();
  }
  return FireThrough(std::max(deadline, virtual_now_));
}

std::size_t Clock::RunUntil(Instant limit) {
  DropCancelledHead();
  const bool has_due = !queue_.empty() && queue_.top().deadline <= limit;
  if (has_due) return RunNext();
  if (mode_ == ClockMode::kRealTime) {
    if (limit > Now()) SleepUntil(limit);
    return RunDue();
  }
  if (limit > virtual_now_) virtual_now_ = limit;
  return 0;
}

}  // namespace kprop
