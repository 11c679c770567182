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

#include "kprop/agent.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>

#include "kprop/errors.h"
#include "kprop/log_format.h"

namespace kprop {
namespace {

using SteadyClock = std::chrono::steady_clock;

double Micros(Duration d) { return static_cast<double>(d.count()) / 1000.0; }

}  // namespace

// ---------------------------------------------------------------------------
// AgentConfig

void AgentConfig::Validate() const {
  if (resources.empty()) throw ConfigError("agent: resources must not be empty");
  std::set<std::string> seen;
  for (const auto& r : resources) {
    if (r.empty()) throw ConfigError("agent: empty resource name");
    if (!seen.insert(r).second) {
      throw ConfigError("agent: duplicate resource \"" + r + "\"");
    }
  }
  if (output_path.empty()) throw ConfigError("agent: output path is required");
  if (flush.kind == FlushPolicy::Kind::kBatched &&
      (flush.max_entries == 0 || flush.max_delay < Duration::zero())) {
    throw ConfigError("agent: batched flush needs maxEntries >= 1, maxDelay >= 0");
  }
  if (queue_capacity == 0) throw ConfigError("agent: queue capacity must be >= 1");
}

std::string AgentConfig::EffectiveMetricsPath() const {
  return metrics_path.empty() ? output_path + ".metrics" : metrics_path;
}

// ---------------------------------------------------------------------------
// LatencyHistogram

std::size_t LatencyHistogram::BucketOf(std::uint64_t ns) {
  if (ns < (1u << kSubBits)) return ns;
  const int exponent = std::bit_width(ns) - 1;  // >= kSubBits
  const std::uint64_t sub = (ns >> (exponent - kSubBits)) & ((1u << kSubBits) - 1);
  return (static_cast<std::size_t>(exponent - kSubBits + 1) << kSubBits) + sub;
}

std::uint64_t LatencyHistogram::BucketUpper(std::size_t index) {
  if (index < (1u << kSubBits)) return index;
  const int exponent = static_cast<int>(index >> kSubBits) + kSubBits - 1;
  const std::uint64_t sub = index & ((1u << kSubBits) - 1);
  const std::uint64_t base = (std::uint64_t{1} << kSubBits | sub) << (exponent - kSubBits);
  return base + (std::uint64_t{1} << (exponent - kSubBits)) - 1;
}

void LatencyHistogram::Record(Duration d) {
  const std::uint64_t ns = d.count() < 0 ? 0 : static_cast<std::uint64_t>(d.count());
  ++counts_[BucketOf(ns)];
  ++count_;
  max_ = std::max(max_, Duration(static_cast<Duration::rep>(ns)));
}

void LatencyHistogram::Merge(const LatencyHistogram& other) {
  for (std::size_t i = 0; i < kBuckets; ++i) counts_[i] += other.counts_[i];
  count_ += other.count_;
  max_ = std::max(max_, other.max_);
}

Duration LatencyHistogram::Quantile(double q) const {
  if (count_ == 0) return Duration::zero();
  q = std::clamp(q, 0.0, 1.0);
  const auto rank = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(count_)));
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < kBuckets; ++i) {
    seen += counts_[i];
    if (seen >= std::max<std::uint64_t>(rank, 1)) {
      return std::min(Duration(static_cast<Duration::rep>(BucketUpper(i))), max_);
    }
  }
  return max_;
}

std::string AgentMetrics::ToJsonLine() const {
  nlohmann::ordered_json j;
  j["eventsReceived"] = events_received;
  j["entriesWritten"] = entries_written;
  j["entriesDropped"] = entries_dropped;
  j["parseableBytesWritten"] = parseable_bytes_written;
  j["maxInFlight"] = max_in_flight;
  j["receiptToWriteLatency"] = {
      {"count", receipt_to_write.count()},
      {"p50_us", Micros(receipt_to_write.Quantile(0.50))},
      {"p99_us", Micros(receipt_to_write.Quantile(0.99))},
      {"max_us", Micros(receipt_to_write.max())},
  };
  return j.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Agent

std::unique_ptr<Agent> Agent::Start(AgentConfig config, EventSource& source) {
  config.Validate();
  for (const auto& r : config.resources) {
    if (!source.HasResource(r)) {
      throw UnknownResource("agent: resource \"" + r + "\" is not served by the source");
    }
  }
  const int fd = ::open(config.output_path.c_str(),
                        O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw OutputUnwritable("agent: cannot open \"" + config.output_path +
                           "\": " + std::strerror(errno));
  }
  std::unique_ptr<Agent> agent(new Agent(std::move(config), source, fd));
  for (const auto& r : agent->config_.resources) {
    Agent* self = agent.get();
    agent->watches_.push_back(
        source.Watch(r, [self](const WatchEvent& e) { self->OnEvent(e); }));
  }
  return agent;
}

Agent::Agent(AgentConfig config, EventSource& source, int fd)
    : config_(std::move(config)), source_(source), fd_(fd) {
  writer_ = std::thread([this] { WriterLoop(); });
}

Agent::~Agent() { Stop(); }

void Agent::OnEvent(const WatchEvent& event) {
  // Stamp first; everything after this may wait.
  const Instant receipt = source_.Now();
  const auto received = SteadyClock::now();

  Pending pending{event, received};
  pending.entry.time = receipt;

  std::unique_lock lock(mu_);
  if (stopping_) return;
  ++metrics_.events_received;
  not_full_.wait(lock, [&] { return queue_.size() < config_.queue_capacity; });
  queue_.push_back(std::move(pending));
  metrics_.max_in_flight =
      std::max<std::uint64_t>(metrics_.max_in_flight, queue_.size() + unflushed_);
  lock.unlock();
  not_empty_.notify_one();
}

void Agent::WriterLoop() {
  const bool per_entry = config_.flush.kind == FlushPolicy::Kind::kPerEntry;
  const std::size_t max_entries = per_entry ? 1 : config_.flush.max_entries;
  std::vector<Pending> batch;
  batch.reserve(max_entries);
  std::optional<SteadyClock::time_point> batch_started;

  std::unique_lock lock(mu_);
  for (;;) {
    if (queue_.empty()) {
      if (stopping_) break;
      if (batch.empty()) {
        not_empty_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      } else {
        not_empty_.wait_until(lock, *batch_started + config_.flush.max_delay,
                              [&] { return stopping_ || !queue_.empty(); });
      }
    }
    while (!queue_.empty() && batch.size() < max_entries) {
      if (batch.empty()) batch_started = SteadyClock::now();
      batch.push_back(std::move(queue_.front()));
      queue_.pop_front();
      ++unflushed_;
    }
    not_full_.notify_all();

    const bool due =
        !batch.empty() &&
        (batch.size() >= max_entries || stopping_ ||
         SteadyClock::now() >= *batch_started + config_.flush.max_delay);
    if (!due) continue;
    lock.unlock();
    WriteBatch(batch);
    lock.lock();
    unflushed_ = 0;
  }
  if (!batch.empty()) {
    lock.unlock();
    WriteBatch(batch);
    lock.lock();
    unflushed_ = 0;
  }
}

void Agent::WriteBatch(std::vector<Pending>& batch) {
  std::string buffer;
  std::vector<std::size_t> ends;
  ends.reserve(batch.size());
  for (const auto& p : batch) {
    buffer += SerializeEntry(p.entry);
    ends.push_back(buffer.size());
  }

  std::size_t written = 0;
  while (written < buffer.size()) {
    const ssize_t n = ::write(fd_, buffer.data() + written, buffer.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    written += static_cast<std::size_t>(n);
  }

  const auto done = SteadyClock::now();
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (ends[i] <= written) {
      ++metrics_.entries_written;
      metrics_.parseable_bytes_written +=
          ends[i] - (i == 0 ? 0 : ends[i - 1]);
      metrics_.receipt_to_write.Record(
          std::chrono::duration_cast<Duration>(done - batch[i].received));
    } else {
      ++metrics_.entries_dropped;
    }
  }
  batch.clear();
}

AgentMetrics Agent::Stop() {
  {
    std::lock_guard lock(mu_);
    if (stopped_) return metrics_;
  }
  for (WatchId id : watches_) source_.Unwatch(id);
  watches_.clear();
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  not_empty_.notify_all();
  not_full_.notify_all();
  if (writer_.joinable()) writer_.join();
  ::close(fd_);

  std::lock_guard lock(mu_);
  stopped_ = true;
  std::ofstream sidecar(config_.EffectiveMetricsPath(), std::ios::app);
  if (sidecar) sidecar << metrics_.ToJsonLine();
  return metrics_;
}

AgentMetrics Agent::Snapshot() const {
  std::lock_guard lock(mu_);
  return metrics_;
}

// ---------------------------------------------------------------------------
// ScriptedSource

ScriptedSource::ScriptedSource(std::vector<std::string> resources)
    : resources_(std::move(resources)) {}

bool ScriptedSource::HasResource(std::string_view resource) const {
  return std::find(resources_.begin(), resources_.end(), resource) != resources_.end();
}

WatchId ScriptedSource::Watch(const std::string& resource, WatchSink sink) {
  const WatchId id = next_id_++;
  sinks_.emplace(id, std::make_pair(resource, std::move(sink)));
  return id;
}

void ScriptedSource::Unwatch(WatchId id) { sinks_.erase(id); }

void ScriptedSource::Emit(const WatchEvent& event) {
  for (auto& [id, watch] : sinks_) {
    if (watch.first == event.obj.resource) watch.second(event);
  }
}

}  // namespace kprop
