// Copyright 2026 The cddspec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CDDSPEC_EXEC_HPP
#define CDDSPEC_EXEC_HPP

namespace cddspec {

// Parallel kernels produce bit-identical results to the serial reference:
// every reduction is an ordered fold over a preallocated per-item buffer.
enum class Exec {
  kSerial,
  kParallel,
};

}  // namespace cddspec

#endif  // CDDSPEC_EXEC_HPP
