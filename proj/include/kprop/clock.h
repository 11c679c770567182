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

#ifndef KPROP_CLOCK_H_
#define KPROP_CLOCK_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "kprop/model.h"

namespace kprop {

enum class ClockMode { kRealTime, kVirtual };

std::string_view ClockModeName(ClockMode mode);
/// "virtual" / "real"; throws ConfigError otherwise.
ClockMode ParseClockMode(std::string_view name);

/// Time source plus a timer queue that drives the whole emulation.
///
/// Timers run on the thread that calls Advance/RunDue/RunNext; the clock is
/// not thread-safe. Timers fire in deadline order, ties broken by
/// registration order. A timer callback may schedule further timers; those
/// fire in the same pass when their deadline is already due.
///
/// In virtual mode `Now()` only moves through Advance/RunNext. In real-time
/// mode `Now()` reads the system clock and RunNext sleeps until the next
/// deadline.
class Clock {
 public:
  using TimerId = std::uint64_t;
  using Callback = std::function<void()>;

  explicit Clock(ClockMode mode, Instant virtual_start = Instant{});

  Clock(const Clock&) = delete;
  Clock& operator=(const Clock&) = delete;

  ClockMode mode() const { return mode_; }
  Instant Now() const;

  TimerId Schedule(Instant deadline, Callback callback);
  TimerId ScheduleAfter(Duration delay, Callback callback) {
    return Schedule(Now() + delay, std::move(callback));
  }
  void Cancel(TimerId id);

  /// Virtual mode only: moves time forward by `d`, firing every timer whose
  /// deadline is <= the new time. Returns the number fired. Throws
  /// WrongClockMode in real-time mode.
  std::size_t Advance(Duration d);

  /// Fires every timer that is due now.
  std::size_t RunDue();

  /// Moves to the earliest pending deadline (jumping in virtual mode,
  /// sleeping in real-time mode) and fires everything due. Returns 0 when no
  /// timer is pending.
  std::size_t RunNext();

  /// Like RunNext but never goes past `limit`; if the next deadline is later
  /// (or none is pending) the clock is moved to `limit` instead.
  std::size_t RunUntil(Instant limit);

  std::optional<Instant> NextDeadline();
  std::size_t pending() const { return active_.size(); }

 private:
  struct Timer {
    Instant deadline;
    std::uint64_t seq;
    TimerId id;
    Callback callback;
  };
  struct Later {
    bool operator()(const Timer& a, const Timer& b) const {
      if (a.deadline != b.deadline) return a.deadline > b.deadline;
      return a.seq > b.seq;
    }
  };

  std::size_t FireThrough(Instant target);
  void DropCancelledHead();
  void SleepUntil(Instant t) const;

  ClockMode mode_;
  Instant virtual_now_;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Timer, std::vector<Timer>, Later> queue_;
  std::unordered_set<TimerId> active_;
};

}  // namespace kprop

#endif  // KPROP_CLOCK_H_
