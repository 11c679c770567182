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

#ifndef KPROP_AGGREGATOR_H_
#define KPROP_AGGREGATOR_H_

// Log analysis: pairs child entries with parent entries along resolved
// edges, and summarizes the resulting propagation delays.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kprop/deps.h"
#include "kprop/model.h"

namespace kprop {

// ---------------------------------------------------------------------------
// Log loading

struct SkippedLine {
  std::string path;
  std::size_t line = 0;  // 1-based
  std::string reason;
};

/// Entries of one or more log files merged by Time. Ties keep file order,
/// then line order. origins[i] names the file and line of entries[i].
struct MergedLog {
  std::vector<LogEntry> entries;
  std::vector<std::pair<std::size_t, std::size_t>> origins;  // (file, line)
  std::vector<std::string> paths;
  std::vector<SkippedLine> skipped;
};

/// Reads and merges log files. Malformed lines throw MalformedEntry naming
/// the file and line, unless `lenient`, in which case they are recorded in
/// `skipped`. Throws ConfigError if a file cannot be opened.
MergedLog LoadLogs(std::span<const std::string> paths, bool lenient = false);

/// Stable merge of already-parsed logs by Time.
std::vector<LogEntry> MergeByTime(std::span<const std::vector<LogEntry>> logs);

// ---------------------------------------------------------------------------
// Correlation

enum class MatchMode {
  /// A child entry pairs with the latest parent entry of the same Op at or
  /// before it.
  kSameOp,
  /// A child entry pairs with the latest parent entry of any Op at or
  /// before it.
  kCausalLatest,
};

std::string_view MatchModeName(MatchMode mode);
std::optional<MatchMode> ParseMatchMode(std::string_view name);

struct PropagationRecord {
  ObjectEdge edge;
  std::size_t parent_index = 0;  // offsets into the entry list
  std::size_t child_index = 0;
  Op parent_op = Op::kAdd;
  Op child_op = Op::kAdd;
  Duration delta{0};

  friend bool operator==(const PropagationRecord&, const PropagationRecord&) = default;
};

struct OrphanEntry {
  ObjectEdge edge;
  std::size_t child_index = 0;

  friend bool operator==(const OrphanEntry&, const OrphanEntry&) = default;
};

struct Correlation {
  std::vector<PropagationRecord> records;
  std::vector<OrphanEntry> orphans;
};

/// `entries` must be sorted by Time. For every edge, every entry of the
/// child object appears exactly once, either as a record or as an orphan.
/// Among parent candidates at the same time the higher resourceVersion wins,
/// then the later log offset. Output is ordered by (edge, child offset).
Correlation Correlate(std::span<const LogEntry> entries,
                      std::span<const ObjectEdge> edges,
                      MatchMode mode = MatchMode::kSameOp);

// ---------------------------------------------------------------------------
// Histograms

struct Histogram {
  Duration bin_width{0};
  Duration origin{0};
  /// counts[k] holds samples in [origin + k*w, origin + (k+1)*w).
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;  // samples below origin
  std::uint64_t overflow = 0;

  std::uint64_t total() const;
  /// Adds `other` bin by bin. Throws std::invalid_argument if the bin
  /// layouts differ.
  void Merge(const Histogram& other);

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Throws std::invalid_argument if bin_width <= 0.
Histogram MakeHistogram(std::span<const Duration> samples, Duration bin_width);
Histogram MakeHistogram(std::span<const PropagationRecord> records,
                        Duration bin_width);

// ---------------------------------------------------------------------------
// Completion

struct CompletionReport {
  Uid parent_uid;
  Op op = Op::kAdd;
  Duration first_child_delta{0};
  Duration last_child_delta{0};
  std::uint64_t child_count = 0;
  std::optional<std::uint64_t> expected_child_count;

  bool complete() const {
    return !expected_child_count || child_count >= *expected_child_count;
  }
};

/// How long the children of `parent_uid` took to follow its `op`: deltas of
/// the first and last same-op child entries matched to it. Throws
/// ParentEventMissing if the parent has no entry with `op`.
CompletionReport Completion(std::span<const LogEntry> entries,
                            std::span<const ObjectEdge> edges,
                            const Uid& parent_uid, Op op,
                            std::optional<std::uint64_t> expected = std::nullopt);

// ---------------------------------------------------------------------------
// CSV output
//
// Durations are milliseconds with up to microsecond precision, trailing
// zeros dropped ("25", "12.5", "0.001").

std::string FormatMillis(Duration d);

std::string HistogramCsv(const Histogram& h);
std::string RecordsCsv(std::span<const PropagationRecord> records,
                       std::span<const LogEntry> entries,
                       std::span<const DependencyRule> rules);
std::string CompletionCsv(std::span<const CompletionReport> reports);

/// Writes `contents` to `path`, replacing it. Throws OutputUnwritable.
void WriteFile(const std::string& path, const std::string& contents);

}  // namespace kprop

#endif  // KPROP_AGGREGATOR_H_
