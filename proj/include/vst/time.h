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

#pragma once

#include <chrono>
#include <string>

namespace vst {

// All stream and clock instants are integer milliseconds measured from the
// start of the stream. Seconds only appear at the file and prompt edges.
using Millis = std::chrono::milliseconds;

// Rounds to the nearest millisecond. Throws DomainError on non-finite input.
Millis from_seconds(double seconds);

double to_seconds(Millis value);

// One decimal place, rounding half away from zero on the tenths digit:
// 12500ms -> "12.5", 12549ms -> "12.5", 12550ms -> "12.6".
std::string format_seconds(Millis value);

}  // namespace vst
