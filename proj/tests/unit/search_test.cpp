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

#include <cmath>
#include <filesystem>
#include <limits>

#include "measim/error.hpp"
#include "measim/io.hpp"
#include "measim/search.hpp"

namespace measim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SweepEntry entry(double objective, double tau_m) {
  SweepEntry e;
  e.params.tau_m = tau_m;
  e.objective = objective;
  return e;
}

TEST(Rank, MinimizeIsStableAndPushesFailuresLast) {
  SweepResult r;
  r.entries = {entry(kInf, 1), entry(0.5, 2), entry(0.2, 3), entry(0.5, 4)};
  rank(r);
  EXPECT_EQ(r.best().params.tau_m, 3.0);
  EXPECT_EQ(r.entries[1].params.tau_m, 2.0);
  EXPECT_EQ(r.entries[2].params.tau_m, 4.0);
  EXPECT_EQ(r.entries[3].params.tau_m, 1.0);
}

TEST(Rank, MaximizeOrdersDescending) {
  SweepResult r;
  r.direction = Objective::kMaximize;
  r.entries = {entry(0.6, 1), entry(-kInf, 2), entry(0.9, 3)};
  rank(r);
  EXPECT_EQ(r.entries[0].params.tau_m, 3.0);
  EXPECT_EQ(r.entries[1].params.tau_m, 1.0);
  EXPECT_EQ(r.entries[2].params.tau_m, 2.0);
}

CalibrationTarget flat_target(double v) {
  CalibrationTarget t;
  for (auto& tr : t.traces) tr = ResponseTrace{10, 150, std::vector<double>(15, v)};
  return t;
}

TEST(Target, ShapeIsChecked) {
  EXPECT_NO_THROW(check_target(flat_target(0.0)));
  CalibrationTarget bad = flat_target(0.0);
  bad.traces[2].values.pop_back();
  EXPECT_THROW(check_target(bad), ConfigError);
}

TEST(Target, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "measim_target_test.csv";
  CalibrationTarget t = flat_target(0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t b = 0; b < 15; ++b) t.traces[k].values[b] = 1.0 / (3.0 + k + b);
  }
  save_target(path, t);
  const auto u = load_target(path);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(u.traces[k], t.traces[k]);
  std::filesystem::remove(path);
}

TEST(Calibrate, SingleCandidateScoresItsOwnTraceAsZero) {
  SimParams p = scaled(default_params(), 0.03);
  TetanizationOptions opt;
  opt.trains = 1;
  const std::vector<std::uint64_t> seeds{11};
  const auto target = synthesize_target(p, seeds, opt);

  SearchSpace space;
  space.base = p;
  space.grids["exc_strength"] = {GridValue::literal(1.0), GridValue::literal(1.5)};
  CalibrateOptions copt{seeds, opt};
  const auto r = calibrate(space, target, copt);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.best().params.exc_strength, 1.0);
  EXPECT_EQ(r.best().objective, 0.0);
  EXPECT_EQ(r.best().reps, 1u);
}

TEST(Calibrate, EngineFailureScoresInfinity) {
  SimParams p = default_params();
  p.n_neurons = 7;
  p.k_exc = 1;
  p.k_inh = 1;
  SearchSpace space;
  space.base = p;
  // k_exc = 5 passes validation but is unreachable during generation.
  space.grids["k_exc"] = {GridValue::literal(1), GridValue::literal(5)};
  CalibrateOptions copt{{1}, {1, {}}};
  const auto r = calibrate(space, flat_target(0.0), copt);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_TRUE(std::isfinite(r.entries[0].objective)) << r.entries[0].error;
  EXPECT_EQ(r.entries[1].objective, kInf);
  EXPECT_FALSE(r.entries[1].error.empty());
}

TEST(AccuracySweep, IncludesBaseAndRecordsReps) {
  SimParams p = scaled(default_params(), 0.03);
  SearchSpace space;
  space.base = p;
  space.grids["exc_strength"] = {GridValue::literal(2.0)};
  DigitImage img;
  img.label = 0;
  img.pixels.fill(0.5);
  const std::vector<DigitImage> data{img};
  const auto r = accuracy_sweep(space, data, data, AccuracyOptions{{1, 2}});
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.direction, Objective::kMaximize);
  for (const auto& e : r.entries) {
    EXPECT_EQ(e.reps, 2u);
    EXPECT_GE(e.objective, 0.0);
    EXPECT_LE(e.objective, 1.0);
  }
}

TEST(Sweep, CsvHasOneRowPerEntry) {
  const auto path = std::filesystem::temp_directory_path() / "measim_sweep_test.csv";
  SweepResult r;
  r.entries = {entry(0.25, 10), entry(kInf, 20)};
  r.entries[1].error = "bad, worse";
  save_sweep(path, r);
  const auto table = read_csv(path);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.header.front(), "rank");
  EXPECT_EQ(table.header.back(), "error");
  EXPECT_EQ(table.rows[1].back(), "bad; worse");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace measim
