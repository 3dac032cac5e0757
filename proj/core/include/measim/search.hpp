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
#include <span>
#include <string>
#include <vector>

#include "measim/config.hpp"
#include "measim/protocols.hpp"

namespace measim {

// Reference responses for {regL, upsL} x {pre, post}, indexed by ProbeCondition.
struct CalibrationTarget {
  std::array<ResponseTrace, 4> traces;
};

// Throws ConfigError unless every trace uses 10 ms bins over 150 ms.
void check_target(const CalibrationTarget& target);

struct SweepEntry {
  SimParams params;
  double objective = 0.0;  // +inf when the simulation failed
  std::size_t reps = 0;
  std::string error;
};

enum class Objective { kMinimize, kMaximize };

struct SweepResult {
  Objective direction = Objective::kMinimize;
  std::vector<SweepEntry> entries;  // ranked, best first
  std::size_t excluded = 0;         // invalid grid combinations

  const SweepEntry& best() const { return entries.front(); }
};

// Ranks entries best-first; failed (non-finite) entries go last. Stable, so
// ties keep enumeration order.
void rank(SweepResult& result);

struct CalibrateOptions {
  // Shared across candidates (common random numbers).
  std::vector<std::uint64_t> seeds;
  TetanizationOptions tetanization;
};

// Averaged traces of a tetanization experiment, in target form.
CalibrationTarget synthesize_target(const SimParams& params, std::span<const std::uint64_t> seeds,
                                    const TetanizationOptions& options = {});

// Objective = sum over the four conditions of mse(mean trace, target trace).
SweepResult calibrate(const SearchSpace& space, const CalibrationTarget& target,
                      const CalibrateOptions& options);

struct AccuracyOptions {
  std::vector<std::uint64_t> seeds;
};

// Objective = mean test accuracy over seeds (fresh culture per seed, trained
// on `trainset`). The space's base parameters are always evaluated.
SweepResult accuracy_sweep(const SearchSpace& space, std::span<const DigitImage> trainset,
                           std::span<const DigitImage> testset, const AccuracyOptions& options);

// Reference-trace CSV: header regL_pre,upsL_pre,regL_post,upsL_post then one
// row per 10 ms bin.
CalibrationTarget load_target(const std::filesystem::path& path);
void save_target(const std::filesystem::path& path, const CalibrationTarget& target);

// One row per entry: rank, every parameter field, reps, objective, error.
void save_sweep(const std::filesystem::path& path, const SweepResult& result);

}  // namespace measim
