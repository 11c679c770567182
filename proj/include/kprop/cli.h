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

#ifndef KPROP_CLI_H_
#define KPROP_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace kprop {

/// Exit codes of the kprop tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;    // usage, config or parse error
inline constexpr int kExitTimeout = 2;  // a run did not converge

/// Environment variable naming the default run directory for `run`.
inline constexpr const char* kOutDirEnv = "KPROP_OUT_DIR";

/// Runs the tool. args[0] is the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands shell-style patterns. A pattern matching nothing is kept only if
/// it names an existing file. Result is sorted and deduplicated per pattern,
/// in pattern order.
std::vector<std::string> ExpandLogPatterns(const std::vector<std::string>& patterns);

}  // namespace kprop

#endif  // KPROP_CLI_H_
