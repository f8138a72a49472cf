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

#ifndef CDDSPEC_FFT_HPP
#define CDDSPEC_FFT_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cddspec {

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// In-place DFT of arbitrary length (radix-2 for powers of two, Bluestein
/// otherwise). The inverse transform includes the 1/N factor.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

}  // namespace cddspec

#endif  // CDDSPEC_FFT_HPP
