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

#include "kprop/log_format.h"

#include <charconv>
#include <cstdio>

#include "kprop/errors.h"

namespace kprop {
namespace {

using ojson = nlohmann::ordered_json;
using namespace std::chrono;

[[noreturn]] void Malformed(const std::string& what) {
  throw MalformedEntry(what);
}

int ParseDigits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) Malformed("truncated timestamp");
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') Malformed("bad digit in timestamp");
    value = value * 10 + (c - '0');
  }
  return value;
}

void ExpectChar(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) Malformed("bad timestamp syntax");
}

const ojson& Field(const ojson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) Malformed(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string StringField(const ojson& j, const char* key) {
  const ojson& v = Field(j, key);
  if (!v.is_string()) Malformed(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

Labels LabelsFromJson(const ojson& j) {
  if (!j.is_object()) Malformed("labels must be an object");
  Labels labels;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) Malformed("label values must be strings");
    labels.emplace(k, v.get<std::string>());
  }
  return labels;
}

}  // namespace

std::string FormatTime(Instant t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  auto since_midnight = t - day;
  const auto h = duration_cast<hours>(since_midnight);
  since_midnight -= h;
  const auto m = duration_cast<minutes>(since_midnight);
  since_midnight -= m;
  const auto s = duration_cast<seconds>(since_midnight);
  since_midnight -= s;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%09lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(s.count()),
                static_cast<long long>(since_midnight.count()));
  return buf;
}

Instant ParseTime(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS
  const int y = ParseDigits(text, 0, 4);
  ExpectChar(text, 4, '-');
  const int mo = ParseDigits(text, 5, 2);
  ExpectChar(text, 7, '-');
  const int d = ParseDigits(text, 8, 2);
  ExpectChar(text, 10, 'T');
  const int hh = ParseDigits(text, 11, 2);
  ExpectChar(text, 13, ':');
  const int mm = ParseDigits(text, 14, 2);
  ExpectChar(text, 16, ':');
  const int ss = ParseDigits(text, 17, 2);
  std::size_t pos = 19;
  long long frac = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits == 9) Malformed("too many fractional digits");
      frac = frac * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) Malformed("empty fraction in timestamp");
    for (; digits < 9; ++digits) frac *= 10;
  }
  ExpectChar(text, pos, 'Z');
  if (pos + 1 != text.size()) Malformed("trailing characters in timestamp");
  if (hh > 23 || mm > 59 || ss > 60) Malformed("time of day out of range");
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) Malformed("invalid calendar date");
  return Instant{sys_days{ymd}} + hours{hh} + minutes{mm} + seconds{ss} +
         nanoseconds{frac};
}

ojson ObjectToJson(const ApiObject& obj) {
  ojson meta = ojson::object();
  meta["name"] = obj.meta.name;
  meta["namespace"] = obj.meta.namespace_;
  meta["uid"] = obj.meta.uid.str();
  meta["resourceVersion"] = obj.meta.resource_version;
  ojson labels = ojson::object();
  for (const auto& [k, v] : obj.meta.labels) labels[k] = v;
  meta["labels"] = std::move(labels);
  ojson owners = ojson::array();
  for (const auto& ref : obj.meta.owner_references) {
    ojson r = ojson::object();
    r["resource"] = ref.resource;
    r["name"] = ref.name;
    r["uid"] = ref.uid.str();
    owners.push_back(std::move(r));
  }
  meta["ownerReferences"] = std::move(owners);
  meta["creationTime"] = FormatTime(obj.meta.creation_time);

  ojson j = ojson::object();
  j["resource"] = obj.resource;
  j["meta"] = std::move(meta);
  j["spec"] = ojson(obj.spec);
  j["status"] = ojson(obj.status);
  return j;
}

ApiObject ObjectFromJson(const ojson& j) {
  if (!j.is_object()) Malformed("object record must be an object");
  ApiObject obj;
  obj.resource = StringField(j, "resource");
  const ojson& meta = Field(j, "meta");
  if (!meta.is_object()) Malformed("meta must be an object");
  obj.meta.name = StringField(meta, "name");
  obj.meta.namespace_ = StringField(meta, "namespace");
  obj.meta.uid = Uid(StringField(meta, "uid"));
  const ojson& rv = Field(meta, "resourceVersion");
  if (!rv.is_number_unsigned() && !(rv.is_number_integer() && rv.get<std::int64_t>() >= 0)) {
    Malformed("resourceVersion must be a non-negative integer");
  }
  obj.meta.resource_version = rv.get<std::uint64_t>();
  obj.meta.labels = LabelsFromJson(Field(meta, "labels"));
  const ojson& owners = Field(meta, "ownerReferences");
  if (!owners.is_array()) Malformed("ownerReferences must be an array");
  for (const ojson& r : owners) {
    if (!r.is_object()) Malformed("owner reference must be an object");
    obj.meta.owner_references.push_back(
        {StringField(r, "resource"), StringField(r, "name"),
         Uid(StringField(r, "uid"))});
  }
  obj.meta.creation_time = ParseTime(StringField(meta, "creationTime"));
  const ojson& spec = Field(j, "spec");
  const ojson& status = Field(j, "status");
  if (!spec.is_object() || !status.is_object()) {
    Malformed("spec and status must be objects");
  }
  obj.spec = Value(spec);
  obj.status = Value(status);
  return obj;
}

std::string SerializeEntry(const LogEntry& entry) {
  ojson j = ojson::object();
  j["Time"] = FormatTime(entry.time);
  j["Op"] = std::string(OpName(entry.op));
  j["Obj"] = ObjectToJson(entry.obj);
  if (entry.old_obj) j["OldObj"] = ObjectToJson(*entry.old_obj);
  std::string line = j.dump(-1, ' ', false, ojson::error_handler_t::replace);
  line.push_back('\n');
  return line;
}

LogEntry ParseEntry(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  ojson j = ojson::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) Malformed("not a valid JSON record");
  if (!j.is_object()) Malformed("log record must be an object");

  LogEntry entry;
  entry.time = ParseTime(StringField(j, "Time"));
  const std::string op_name = StringField(j, "Op");
  const auto op = ParseOp(op_name);
  if (!op) Malformed("unknown Op \"" + op_name + "\"");
  entry.op = *op;
  entry.obj = ObjectFromJson(Field(j, "Obj"));
  if (auto it = j.find("OldObj"); it != j.end()) {
    entry.old_obj = ObjectFromJson(*it);
  }
  if (!entry.IsWellFormed()) {
    Malformed(entry.op == Op::kUpdate
                  ? "Update entry requires OldObj with the same uid"
                  : "OldObj is only allowed on Update entries");
  }
  return entry;
}

}  // namespace kprop
