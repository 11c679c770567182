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

#include "kprop/model.h"

#include <algorithm>

namespace kprop {

bool ObjectMeta::IsOwnedBy(const Uid& owner) const {
  return std::any_of(owner_references.begin(), owner_references.end(),
                     [&](const OwnerReference& r) { return r.uid == owner; });
}

std::string_view OpName(Op op) {
  switch (op) {
    case Op::kAdd:
      return "Add";
    case Op::kUpdate:
      return "Update";
    case Op::kDelete:
      return "Delete";
  }
  return "?";
}

std::optional<Op> ParseOp(std::string_view name) {
  if (name == "Add") return Op::kAdd;
  if (name == "Update") return Op::kUpdate;
  if (name == "Delete") return Op::kDelete;
  return std::nullopt;
}

bool WatchEvent::IsWellFormed() const {
  if (op == Op::kUpdate) {
    return old_obj.has_value() && old_obj->meta.uid == obj.meta.uid;
  }
  return !old_obj.has_value();
}

bool SelectorMatches(const Labels& selector, const Labels& labels) {
  if (selector.empty()) return false;
  for (const auto& [key, value] : selector) {
    auto it = labels.find(key);
    if (it == labels.end() || it->second != value) return false;
  }
  return true;
}

}  // namespace kprop
