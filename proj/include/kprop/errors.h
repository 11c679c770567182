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

#ifndef KPROP_ERRORS_H_
#define KPROP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace kprop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define KPROP_DEFINE_ERROR(Name)       \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// model
KPROP_DEFINE_ERROR(MalformedEntry);

// emustore
KPROP_DEFINE_ERROR(AlreadyExists);
KPROP_DEFINE_ERROR(NotFound);
KPROP_DEFINE_ERROR(StaleWrite);
KPROP_DEFINE_ERROR(WrongClockMode);
KPROP_DEFINE_ERROR(InvalidObject);
KPROP_DEFINE_ERROR(UnknownResource);

// agent / aggregator output
KPROP_DEFINE_ERROR(OutputUnwritable);

// deps / aggregator
KPROP_DEFINE_ERROR(SelectorMissing);
KPROP_DEFINE_ERROR(ParentEventMissing);

// runner / configuration
KPROP_DEFINE_ERROR(UnknownScenario);
KPROP_DEFINE_ERROR(BadParams);
KPROP_DEFINE_ERROR(ConfigError);
KPROP_DEFINE_ERROR(ConvergenceTimeout);

#undef KPROP_DEFINE_ERROR

}  // namespace kprop

#endif  // KPROP_ERRORS_H_
