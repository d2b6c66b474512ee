// Copyright 2026 The flowprint Authors
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

#pragma once

#include <cstdint>

namespace flowprint {

// Every data-parallel kernel has a serial reference path that the tests hold
// the OpenMP path to, bit for bit.
enum class ExecPolicy : std::uint8_t { kSerial, kParallel };

// Upper bound on OpenMP threads for kParallel kernels; 0 keeps the runtime
// default.
void set_max_threads(int n);
int max_threads();

}  // namespace flowprint
