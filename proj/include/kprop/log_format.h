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

#ifndef KPROP_LOG_FORMAT_H_
#define KPROP_LOG_FORMAT_H_

// Agent log line format.
//
// One JSON object per line:
//
//   {"Time":"2026-01-01T00:00:00.000000000Z","Op":"Update",
//    "Obj":{...},"OldObj":{...}}
//
// "OldObj" is present only for updates. Object records carry "resource",
// "meta", "spec" and "status"; meta carries "name", "namespace", "uid",
// "resourceVersion", "labels", "ownerReferences" and "creationTime". Keys of
// the envelope and of meta are written in that fixed order; keys inside
// spec/status are sorted, so equal entries serialize to equal bytes.

#include <string>
#include <string_view>

#include "kprop/model.h"

namespace kprop {

/// RFC 3339 UTC with exactly nine fractional digits.
std::string FormatTime(Instant t);
/// Accepts "YYYY-MM-DDTHH:MM:SS[.f{1,9}]Z". Throws MalformedEntry.
Instant ParseTime(std::string_view text);

nlohmann::ordered_json ObjectToJson(const ApiObject& obj);
/// Throws MalformedEntry on missing or mistyped fields.
ApiObject ObjectFromJson(const nlohmann::ordered_json& j);

/// One newline-terminated log line.
std::string SerializeEntry(const LogEntry& entry);
/// Parses a single line (a trailing newline is tolerated). Throws
/// MalformedEntry.
LogEntry ParseEntry(std::string_view line);

}  // namespace kprop

#endif  // KPROP_LOG_FORMAT_H_
