/* Copyright 2026 The VST Runtime Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "vst/time.h"

#include <cmath>
#include <string>

#include "vst/errors.h"

namespace vst {

Millis from_seconds(double seconds) {
  if (!std::isfinite(seconds)) {
    throw DomainError("non-finite time value");
  }
  return Millis(std::llround(seconds * 1000.0));
}

double to_seconds(Millis value) {
  return static_cast<double>(value.count()) / 1000.0;
}

std::string format_seconds(Millis value) {
  long long ms = value.count();
  const bool negative = ms < 0;
  if (negative) ms = -ms;
  const long long tenths = (ms + 50) / 100;
  std::string out = negative && tenths != 0 ? "-" : "";
  out += std::to_string(tenths / 10);
  out += '.';
  out += std::to_string(tenths % 10);
  return out;
}

}  // namespace vst
