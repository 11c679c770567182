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

#include "kprop/aggregator.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "kprop/errors.h"
#include "kprop/log_format.h"

namespace kprop {
namespace {

/// Parent entry indices ordered by (time, resourceVersion, offset), so the
/// last one at or before a given time is the preferred candidate.
struct ParentIndex {
  std::vector<std::size_t> all;
  std::vector<std::size_t> by_op[3];
};

std::size_t OpSlot(Op op) { return static_cast<std::size_t>(op); }

}  // namespace

// ---------------------------------------------------------------------------
// Log loading

MergedLog LoadLogs(std::span<const std::string> paths, bool lenient) {
  MergedLog merged;
  merged.paths.assign(paths.begin(), paths.end());
  struct Tagged {
    LogEntry entry;
    std::size_t file;
    std::size_t line;
  };
  std::vector<Tagged> all;
  for (std::size_t f = 0; f < paths.size(); ++f) {
    std::ifstream in(paths[f]);
    if (!in) throw ConfigError("cannot open log file \"" + paths[f] + "\"");
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      try {
        all.push_back({ParseEntry(line), f, number});
      } catch (const MalformedEntry& e) {
        if (!lenient) {
          throw MalformedEntry(paths[f] + ":" + std::to_string(number) + ": " + e.what());
        }
        merged.skipped.push_back({paths[f], number, e.what()});
      }
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.entry.time < b.entry.time;
  });
  merged.entries.reserve(all.size());
  merged.origins.reserve(all.size());
  for (auto& t : all) {
    merged.entries.push_back(std::move(t.entry));
    merged.origins.emplace_back(t.file, t.line);
  }
  return merged;
}

std::vector<LogEntry> MergeByTime(std::span<const std::vector<LogEntry>> logs) {
  std::vector<LogEntry> out;
  for (const auto& log : logs) out.insert(out.end(), log.begin(), log.end());
  std::stable_sort(out.begin(), out.end(), [](const LogEntry& a, const LogEntry& b) {
    return a.time < b.time;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Correlation

std::string_view MatchModeName(MatchMode mode) {
  return mode == MatchMode::kSameOp ? "sameop" : "causal";
}

std::optional<MatchMode> ParseMatchMode(std::string_view name) {
  if (name == "sameop") return MatchMode::kSameOp;
  if (name == "causal") return MatchMode::kCausalLatest;
  return std::nullopt;
}

Correlation Correlate(std::span<const LogEntry> entries,
                      std::span<const ObjectEdge> edges, MatchMode mode) {
  std::map<Uid, std::vector<std::size_t>> by_uid;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    by_uid[entries[i].obj.meta.uid].push_back(i);
  }
  auto precedes = [&](std::size_t a, std::size_t b) {
    const auto& ea = entries[a];
    const auto& eb = entries[b];
    if (ea.time != eb.time) return ea.time < eb.time;
    if (ea.obj.meta.resource_version != eb.obj.meta.resource_version) {
      return ea.obj.meta.resource_version < eb.obj.meta.resource_version;
    }
    return a < b;
  };
  std::map<Uid, ParentIndex> parents;
  auto parent_index = [&](const Uid& uid) -> const ParentIndex& {
    auto [it, inserted] = parents.try_emplace(uid);
    if (inserted) {
      if (auto found = by_uid.find(uid); found != by_uid.end()) {
        it->second.all = found->second;
        std::sort(it->second.all.begin(), it->second.all.end(), precedes);
        for (std::size_t i : it->second.all) {
          it->second.by_op[OpSlot(entries[i].op)].push_back(i);
        }
      }
    }
    return it->second;
  };

  Correlation out;
  for (const ObjectEdge& edge : edges) {
    auto children = by_uid.find(edge.child_uid);
    if (children == by_uid.end()) continue;
    const ParentIndex& pidx = parent_index(edge.parent_uid);
    for (std::size_t ci : children->second) {
      const LogEntry& child = entries[ci];
      const std::vector<std::size_t>& candidates =
          mode == MatchMode::kSameOp ? pidx.by_op[OpSlot(child.op)] : pidx.all;
      // First candidate strictly after the child's time; the one before it
      // is the latest qualifying parent.
      auto it = std::upper_bound(candidates.begin(), candidates.end(), child.time,
                                 [&](Instant t, std::size_t p) { return t < entries[p].time; });
      if (it == candidates.begin()) {
        out.orphans.push_back({edge, ci});
        continue;
      }
      const std::size_t pi = *std::prev(it);
      out.records.push_back({edge, pi, ci, entries[pi].op, child.op,
                             child.time - entries[pi].time});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Histograms

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) +
         underflow + overflow;
}

void Histogram::Merge(const Histogram& other) {
  if (bin_width != other.bin_width || origin != other.origin) {
    throw std::invalid_argument("histograms have different bin layouts");
  }
  if (counts.size() < other.counts.size()) counts.resize(other.counts.size(), 0);
  for (std::size_t i = 0; i < other.counts.size(); ++i) counts[i] += other.counts[i];
  underflow += other.underflow;
  overflow += other.overflow;
}

Histogram MakeHistogram(std::span<const Duration> samples, Duration bin_width) {
  if (bin_width <= Duration::zero()) {
    throw std::invalid_argument("histogram bin width must be > 0");
  }
  Histogram h;
  h.bin_width = bin_width;
  for (Duration d : samples) {
    if (d < h.origin) {
      ++h.underflow;
      continue;
    }
    const auto bin = static_cast<std::size_t>((d - h.origin) / bin_width);
    if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  return h;
}

Histogram MakeHistogram(std::span<const PropagationRecord> records,
                        Duration bin_width) {
  std::vector<Duration> deltas;
  deltas.reserve(records.size());
  for (const auto& r : records) deltas.push_back(r.delta);
  return MakeHistogram(deltas, bin_width);
}

// ---------------------------------------------------------------------------
// Completion

CompletionReport Completion(std::span<const LogEntry> entries,
                            std::span<const ObjectEdge> edges,
                            const Uid& parent_uid, Op op,
                            std::optional<std::uint64_t> expected) {
  const bool has_parent_event =
      std::any_of(entries.begin(), entries.end(), [&](const LogEntry& e) {
        return e.op == op && e.obj.meta.uid == parent_uid;
      });
  if (!has_parent_event) {
    throw ParentEventMissing("no " + std::string(OpName(op)) + " entry for " +
                             parent_uid.str());
  }
  std::vector<ObjectEdge> own;
  for (const auto& e : edges) {
    if (e.parent_uid == parent_uid) own.push_back(e);
  }
  const Correlation c = Correlate(entries, own, MatchMode::kSameOp);

  CompletionReport report;
  report.parent_uid = parent_uid;
  report.op = op;
  report.expected_child_count = expected;
  std::set<Uid> children;
  bool first = true;
  for (const auto& r : c.records) {
    if (r.child_op != op) continue;
    children.insert(r.edge.child_uid);
    if (first) {
      report.first_child_delta = report.last_child_delta = r.delta;
      first = false;
    } else {
      report.first_child_delta = std::min(report.first_child_delta, r.delta);
      report.last_child_delta = std::max(report.last_child_delta, r.delta);
    }
  }
  report.child_count = children.size();
  return report;
}

// ---------------------------------------------------------------------------
// CSV

std::string FormatMillis(Duration d) {
  const bool negative = d < Duration::zero();
  // Round to the nearest microsecond, half away from zero.
  long long ns = negative ? -d.count() : d.count();
  long long us = (ns + 500) / 1000;
  std::string out = std::to_string(us / 1000);
  long long frac = us % 1000;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 3 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  if (negative && us != 0) out.insert(0, "-");
  return out;
}

std::string HistogramCsv(const Histogram& h) {
  std::string out = "bin_start_ms,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    out += FormatMillis(h.origin + h.bin_width * static_cast<Duration::rep>(k));
    out += ",";
    out += std::to_string(h.counts[k]);
    out += "\n";
  }
  return out;
}

std::string RecordsCsv(std::span<const PropagationRecord> records,
                       std::span<const LogEntry> entries,
                       std::span<const DependencyRule> rules) {
  std::string out =
      "rule,parent_resource,parent_name,parent_uid,parent_op,child_resource,"
      "child_name,child_uid,child_op,parent_time,child_time,delta_ms\n";
  for (const auto& r : records) {
    const LogEntry& p = entries[r.parent_index];
    const LogEntry& c = entries[r.child_index];
    out += r.edge.rule < rules.size() ? rules[r.edge.rule].Describe() : "?";
    out += "," + p.obj.resource + "," + p.obj.meta.name + "," +
           p.obj.meta.uid.str() + "," + std::string(OpName(r.parent_op));
    out += "," + c.obj.resource + "," + c.obj.meta.name + "," +
           c.obj.meta.uid.str() + "," + std::string(OpName(r.child_op));
    out += "," + FormatTime(p.time) + "," + FormatTime(c.time) + "," +
           FormatMillis(r.delta) + "\n";
  }
  return out;
}

std::string CompletionCsv(std::span<const CompletionReport> reports) {
  std::string out =
      "parent_uid,op,first_child_delta_ms,last_child_delta_ms,child_count,"
      "expected_child_count,complete\n";
  for (const auto& r : reports) {
    out += r.parent_uid.str() + "," + std::string(OpName(r.op)) + "," +
           FormatMillis(r.first_child_delta) + "," +
           FormatMillis(r.last_child_delta) + "," + std::to_string(r.child_count) + ",";
    if (r.expected_child_count) out += std::to_string(*r.expected_child_count);
    out += r.complete() ? ",true\n" : ",false\n";
  }
  return out;
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputUnwritable("cannot write \"" + path + "\"");
  out << contents;
  out.flush();
  if (!out) throw OutputUnwritable("write to \"" + path + "\" failed");
}

}  // namespace kprop
