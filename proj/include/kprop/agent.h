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

#ifndef KPROP_AGENT_H_
#define KPROP_AGENT_H_

// The logging agent.
//
// The agent subscribes to a list of resources and appends one log line per
// notification. The receipt timestamp is read from the source's clock on the
// delivery path before anything else happens; serialization and file I/O run
// on a writer thread fed through a bounded queue. When the queue is full the
// delivery path waits for room, so nothing is lost and memory stays bounded,
// but timestamps already taken are unaffected.

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "kprop/model.h"
#include "kprop/store.h"

namespace kprop {

struct FlushPolicy {
  enum class Kind { kPerEntry, kBatched };

  Kind kind = Kind::kBatched;
  std::size_t max_entries = 256;
  Duration max_delay = std::chrono::milliseconds(50);

  static FlushPolicy PerEntry() { return {Kind::kPerEntry, 1, Duration::zero()}; }
  static FlushPolicy Batched(std::size_t max_entries, Duration max_delay) {
    return {Kind::kBatched, max_entries, max_delay};
  }
  friend bool operator==(const FlushPolicy&, const FlushPolicy&) = default;
};

struct AgentConfig {
  std::vector<std::string> resources;
  std::string output_path;
  FlushPolicy flush;
  /// Sidecar for the shutdown metrics record; defaults to
  /// "<output_path>.metrics".
  std::string metrics_path;
  std::size_t queue_capacity = 4096;

  /// Throws ConfigError on an empty or duplicated resource list.
  void Validate() const;
  std::string EffectiveMetricsPath() const;
  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// Log-linear histogram of durations: 16 sub-buckets per power of two of
/// nanoseconds, so any quantile is reported within 1/16 relative error.
class LatencyHistogram {
 public:
  void Record(Duration d);
  void Merge(const LatencyHistogram& other);
  std::uint64_t count() const { return count_; }
  Duration max() const { return max_; }
  /// Upper bound of the bucket holding quantile q in [0, 1].
  Duration Quantile(double q) const;

 private:
  static constexpr int kSubBits = 4;
  static constexpr std::size_t kBuckets = (64 - kSubBits + 1) << kSubBits;
  static std::size_t BucketOf(std::uint64_t ns);
  static std::uint64_t BucketUpper(std::size_t index);

  std::array<std::uint64_t, kBuckets> counts_{};
  std::uint64_t count_ = 0;
  Duration max_{0};
};

struct AgentMetrics {
  std::uint64_t events_received = 0;
  std::uint64_t entries_written = 0;
  std::uint64_t entries_dropped = 0;
  std::uint64_t parseable_bytes_written = 0;
  std::uint64_t max_in_flight = 0;
  LatencyHistogram receipt_to_write;

  /// One-line JSON record, as appended to the metrics sidecar.
  std::string ToJsonLine() const;
};

class Agent {
 public:
  /// Opens the output in append mode and subscribes to every configured
  /// resource. Throws ConfigError, UnknownResource, OutputUnwritable.
  static std::unique_ptr<Agent> Start(AgentConfig config, EventSource& source);

  ~Agent();
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  /// Records one notification. Safe to call from any single delivery thread.
  void OnEvent(const WatchEvent& event);

  /// Flushes, closes subscriptions, appends the metrics record and returns
  /// the final metrics. Idempotent.
  AgentMetrics Stop();

  AgentMetrics Snapshot() const;
  const AgentConfig& config() const { return config_; }
  std::size_t subscriptions() const { return watches_.size(); }

 private:
  struct Pending {
    WatchEvent entry;
    std::chrono::steady_clock::time_point received;
  };

  Agent(AgentConfig config, EventSource& source, int fd);
  void WriterLoop();
  void WriteBatch(std::vector<Pending>& batch);

  AgentConfig config_;
  EventSource& source_;
  int fd_;
  std::vector<WatchId> watches_;

  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<Pending> queue_;
  bool stopping_ = false;
  bool stopped_ = false;
  std::size_t unflushed_ = 0;
  AgentMetrics metrics_;
  std::thread writer_;
};

/// Event source driven by hand: tests and replay tools set the time and push
/// events to whoever is watching.
class ScriptedSource : public EventSource {
 public:
  explicit ScriptedSource(std::vector<std::string> resources);

  bool HasResource(std::string_view resource) const override;
  WatchId Watch(const std::string& resource, WatchSink sink) override;
  void Unwatch(WatchId id) override;
  Instant Now() const override { return now_; }

  void SetTime(Instant t) { now_ = t; }
  /// Delivers synchronously to every watcher of event.obj.resource.
  void Emit(const WatchEvent& event);
  std::size_t watchers() const { return sinks_.size(); }

 private:
  std::vector<std::string> resources_;
  Instant now_{};
  WatchId next_id_ = 1;
  std::map<WatchId, std::pair<std::string, WatchSink>> sinks_;
};

}  // namespace kprop

#endif  // KPROP_AGENT_H_
