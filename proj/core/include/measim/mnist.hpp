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

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "measim/stimuli.hpp"

namespace measim {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct RawDigit {
  static constexpr int kSide = 28;
  std::array<double, kSide * kSide> pixels{};  // row-major, byte / 255
  int label = 0;

  bool operator==(const RawDigit&) const = default;
};

// Parses an IDX image/label file pair and keeps samples whose label is in
// `keep`. Throws DataError (kBadMagic, kTruncated, kCountMismatch, kIo).
std::vector<RawDigit> load_mnist(const std::filesystem::path& images,
                                 const std::filesystem::path& labels,
                                 const std::set<int>& keep = {0, 1});

// Writes IDX files; pixels are quantized to round(255 * p).
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
               const std::vector<RawDigit>& digits);

// Area-average downsampling: each output cell averages the input over its
// [r*28/6, (r+1)*28/6) x [c*28/6, (c+1)*28/6) footprint, with partial pixels
// weighted by their covered fraction.
DigitImage resize_to_6x6(const RawDigit& digit);

// Coverage of input index `i` by output cell `o` along one axis (28 -> 6),
// in input-pixel units.
double axis_coverage(int o, int i);

enum class Split { kTrain, kTest };

struct Dataset {
  Split split = Split::kTrain;
  std::vector<DigitImage> images;
};

// Reads {train,t10k}-{images-idx3,labels-idx1}-ubyte from `dir`, filters to
// {0, 1}, resizes, and keeps the first `limit` samples (0 = all).
Dataset load_dataset(const std::filesystem::path& dir, Split split, std::size_t limit = 0);

}  // namespace measim
