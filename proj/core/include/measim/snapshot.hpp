// Copyright 2026 The measim Authors
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
#include <filesystem>
#include <iosfwd>

#include "measim/culture.hpp"

namespace measim {

// Culture snapshot, version 1. All integers and doubles little-endian.
//
//   offset  type            field
//   0       char[8]         magic "MEASIMCU"
//   8       u32             version (1)
//   12      u32             reserved (0)
//   16      u64             P = length of serialized parameter text
//   24      char[P]         parameter text (key = value lines)
//           u64             N neurons
//           u64             S synapses
//           u64             C coupling entries
//           f64             w_max_exc
//           f64             w_max_inh
//           f64[2N]         positions (row_mm, col_mm) per neuron
//           u8[N]           excitatory flags
//           u64[N+1]        CSR offsets by postsynaptic neuron
//           u32[S]          presynaptic indices
//           f64[S]          weights
//           {u32,u32,f64}[C] coupling triplets (electrode, neuron, value),
//                           electrode-major
//
// The presynaptic index is rebuilt on load.
inline constexpr char kSnapshotMagic[8] = {'M', 'E', 'A', 'S', 'I', 'M', 'C', 'U'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_culture(std::ostream& out, const Culture& culture);
Culture read_culture(std::istream& in);

void save_culture(const std::filesystem::path& path, const Culture& culture);
// Throws DataError on bad magic, unsupported version, or truncation.
Culture load_culture(const std::filesystem::path& path);

}  // namespace measim
