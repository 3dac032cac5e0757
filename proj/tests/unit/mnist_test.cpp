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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "measim/error.hpp"
#include "measim/mnist.hpp"

namespace measim {
namespace {

namespace fs = std::filesystem;

// Brute-force area average: supersample every 28x28 pixel on a fine grid and
// attribute each sub-sample to the 6x6 cell that contains it.
DigitImage reference_resize(const RawDigit& d) {
  constexpr int kSub = 30;  // 28*30 = 840 = 6*140, so cell edges align with sub-samples
  std::array<double, 36> sum{};
  for (int i = 0; i < 28 * kSub; ++i) {
    for (int j = 0; j < 28 * kSub; ++j) {
      const int r = i / 140, c = j / 140;
      sum[static_cast<std::size_t>(r * 6 + c)] +=
          d.pixels[static_cast<std::size_t>((i / kSub) * 28 + (j / kSub))];
    }
  }
  DigitImage out;
  for (std::size_t k = 0; k < 36; ++k) out.pixels[k] = sum[k] / (140.0 * 140.0);
  return out;
}

TEST(Resize, MatchesSupersampledAreaAverage) {
  RawDigit d;
  for (int i = 0; i < 784; ++i) d.pixels[static_cast<std::size_t>(i)] = ((i * 37) % 256) / 255.0;
  d.label = 1;
  const auto got = resize_to_6x6(d);
  const auto want = reference_resize(d);
  EXPECT_EQ(got.label, 1);
  for (std::size_t k = 0; k < 36; ++k) EXPECT_NEAR(got.pixels[k], want.pixels[k], 1e-12) << k;
}

TEST(Resize, UniformImageStaysUniform) {
  RawDigit d;
  d.pixels.fill(0.4);
  for (double p : resize_to_6x6(d).pixels) EXPECT_NEAR(p, 0.4, 1e-12);
}

TEST(Resize, CoverageSumsToCellWidth) {
  for (int o = 0; o < 6; ++o) {
    double s = 0.0;
    for (int i = 0; i < 28; ++i) s += axis_coverage(o, i);
    EXPECT_NEAR(s, 28.0 / 6.0, 1e-12);
  }
  EXPECT_EQ(axis_coverage(0, 5), 0.0);
  EXPECT_NEAR(axis_coverage(0, 4), 2.0 / 3.0, 1e-12);
}

TEST(Resize, PreservesMeanIntensity) {
  RawDigit d;
  for (int i = 0; i < 784; ++i) d.pixels[static_cast<std::size_t>(i)] = ((i * i + 11) % 97) / 96.0;
  double in = 0.0, out = 0.0;
  for (double p : d.pixels) in += p;
  for (double p : resize_to_6x6(d).pixels) out += p;
  EXPECT_NEAR(out / 36.0, in / 784.0, 1e-12);
}

class IdxFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "measim_idx_test";
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(IdxFiles, RoundTripFiltersLabels) {
  std::vector<RawDigit> digits(5);
  for (int k = 0; k < 5; ++k) {
    digits[static_cast<std::size_t>(k)].label = k % 3;
    digits[static_cast<std::size_t>(k)].pixels[static_cast<std::size_t>(k)] = 1.0;
  }
  write_idx(dir_ / "i", dir_ / "l", digits);
  const auto all = load_mnist(dir_ / "i", dir_ / "l", {0, 1, 2});
  ASSERT_EQ(all.size(), 5u);
  EXPECT_EQ(all, digits);
  const auto kept = load_mnist(dir_ / "i", dir_ / "l");
  EXPECT_EQ(kept.size(), 4u);  // labels 0,1,2,0,1 -> drop the 2
  EXPECT_TRUE(load_mnist(dir_ / "i", dir_ / "l", {}).empty());
}

TEST_F(IdxFiles, DiagnosticsAreDistinct) {
  std::vector<RawDigit> digits(3);
  write_idx(dir_ / "i", dir_ / "l", digits);
  write_idx(dir_ / "i2", dir_ / "l2", std::vector<RawDigit>(2));

  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const DataError& e) {
      return e.kind();
    }
    return DataError::Kind::kIo;  // sentinel: no throw is a test failure below
  };
  EXPECT_EQ(kind_of([&] { load_mnist(dir_ / "i", dir_ / "l2"); }),
            DataError::Kind::kCountMismatch);
  EXPECT_EQ(kind_of([&] { load_mnist(dir_ / "l", dir_ / "l"); }), DataError::Kind::kBadMagic);
  EXPECT_EQ(kind_of([&] { load_mnist(dir_ / "missing", dir_ / "l"); }), DataError::Kind::kIo);

  fs::resize_file(dir_ / "i", 16 + 784 * 2);
  EXPECT_EQ(kind_of([&] { load_mnist(dir_ / "i", dir_ / "l"); }), DataError::Kind::kTruncated);
}

TEST(Dataset, ShippedSubsetLoads) {
  const fs::path dir = MEASIM_DATA_DIR;
  const auto train = load_dataset(dir, Split::kTrain, 50);
  ASSERT_EQ(train.images.size(), 50u);
  for (const auto& img : train.images) {
    EXPECT_TRUE(img.label == 0 || img.label == 1);
    for (double p : img.pixels) {
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
    }
  }
  EXPECT_FALSE(load_dataset(dir, Split::kTest).images.empty());
}

}  // namespace
}  // namespace measim
