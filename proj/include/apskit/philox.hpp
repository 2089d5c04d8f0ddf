// Copyright 2026 The apskit Authors
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

#pragma once

#include <array>
#include <cstdint>

namespace apskit {

// Philox4x32-10 counter-based generator. Every output block is a pure
// function of (counter, key), so draws are reproducible under any schedule.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

// Uniform double in the open interval (0, 1) from 64 random bits.
double open_unit_interval(std::uint32_t hi, std::uint32_t lo);

// Two independent standard normals (Box-Muller) from the block at
// counter {index, index >> 32, stream, stream >> 32} under key seed.
std::array<double, 2> standard_normal_pair(std::uint64_t seed, std::uint64_t stream,
                                           std::uint64_t index);

}  // namespace apskit
