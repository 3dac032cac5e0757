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

#include "measim/mnist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "measim/error.hpp"

namespace measim {
namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t at,
                        const std::filesystem::path& path) {
  if (b.size() < at + 4) {
    throw DataError(DataError::Kind::kTruncated, path.string() + ": truncated IDX header");
  }
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

constexpr double kScale = static_cast<double>(RawDigit::kSide) / DigitImage::kSide;

}  // namespace

std::vector<RawDigit> load_mnist(const std::filesystem::path& images,
                                 const std::filesystem::path& labels, const std::set<int>& keep) {
  const auto img = read_bytes(images);
  const auto lab = read_bytes(labels);

  if (const auto magic = read_be32(img, 0, images); magic != kIdxImageMagic) {
    throw DataError(DataError::Kind::kBadMagic, images.string() + ": bad image magic");
  }
  if (const auto magic = read_be32(lab, 0, labels); magic != kIdxLabelMagic) {
    throw DataError(DataError::Kind::kBadMagic, labels.string() + ": bad label magic");
  }
  const std::size_t n_img = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t n_lab = read_be32(lab, 4, labels);
  if (rows != RawDigit::kSide || cols != RawDigit::kSide) {
    throw DataError(DataError::Kind::kFormat, images.string() + ": expected 28x28 images");
  }
  if (n_img != n_lab) {
    throw DataError(DataError::Kind::kCountMismatch,
                    "image count " + std::to_string(n_img) + " != label count " +
                        std::to_string(n_lab));
  }
  constexpr std::size_t kPixels = RawDigit::kSide * RawDigit::kSide;
  if (img.size() < 16 + n_img * kPixels) {
    throw DataError(DataError::Kind::kTruncated, images.string() + ": truncated pixel data");
  }
  if (lab.size() < 8 + n_lab) {
    throw DataError(DataError::Kind::kTruncated, labels.string() + ": truncated label data");
  }

  std::vector<RawDigit> out;
  for (std::size_t s = 0; s < n_img; ++s) {
    const int label = lab[8 + s];
    if (!keep.count(label)) continue;
    RawDigit d;
    d.label = label;
    for (std::size_t p = 0; p < kPixels; ++p) d.pixels[p] = img[16 + s * kPixels + p] / 255.0;
    out.push_back(d);
  }
  return out;
}

void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
               const std::vector<RawDigit>& digits) {
  std::ofstream img(images, std::ios::binary);
  std::ofstream lab(labels, std::ios::binary);
  if (!img || !lab) throw DataError(DataError::Kind::kIo, "cannot write IDX files");
  put_be32(img, kIdxImageMagic);
  put_be32(img, static_cast<std::uint32_t>(digits.size()));
  put_be32(img, RawDigit::kSide);
  put_be32(img, RawDigit::kSide);
  put_be32(lab, kIdxLabelMagic);
  put_be32(lab, static_cast<std::uint32_t>(digits.size()));
  for (const auto& d : digits) {
    for (double p : d.pixels) {
      img.put(static_cast<char>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0)));
    }
    lab.put(static_cast<char>(d.label));
  }
}

double axis_coverage(int o, int i) {
  const double lo = std::max(o * kScale, static_cast<double>(i));
  const double hi = std::min((o + 1) * kScale, static_cast<double>(i + 1));
  return std::max(0.0, hi - lo);
}

DigitImage resize_to_6x6(const RawDigit& digit) {
  DigitImage out;
  out.label = digit.label;
  constexpr double kArea = kScale * kScale;
  for (int r = 0; r < DigitImage::kSide; ++r) {
    const int r0 = static_cast<int>(std::floor(r * kScale));
    const int r1 = std::min(RawDigit::kSide, static_cast<int>(std::ceil((r + 1) * kScale)));
    for (int c = 0; c < DigitImage::kSide; ++c) {
      const int c0 = static_cast<int>(std::floor(c * kScale));
      const int c1 = std::min(RawDigit::kSide, static_cast<int>(std::ceil((c + 1) * kScale)));
      double sum = 0.0;
      for (int i = r0; i < r1; ++i) {
        const double wr = axis_coverage(r, i);
        for (int j = c0; j < c1; ++j) {
          sum += wr * axis_coverage(c, j) * digit.pixels[static_cast<std::size_t>(i * RawDigit::kSide + j)];
        }
      }
      out.pixels[static_cast<std::size_t>(r * DigitImage::kSide + c)] =
          std::clamp(sum / kArea, 0.0, 1.0);
    }
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& dir, Split split, std::size_t limit) {
  const std::string prefix = split == Split::kTrain ? "train" : "t10k";
  const auto raw = load_mnist(dir / (prefix + "-images-idx3-ubyte"),
                              dir / (prefix + "-labels-idx1-ubyte"), {0, 1});
  Dataset ds;
  ds.split = split;
  const std::size_t n = limit ? std::min(limit, raw.size()) : raw.size();
  ds.images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ds.images.push_back(resize_to_6x6(raw[i]));
  return ds;
}

}  // namespace measim
