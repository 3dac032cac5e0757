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
#include <initializer_list>
#include <span>
#include <vector>

#include "measim/culture.hpp"

namespace measim {

struct PulseEvent {
  double time_ms = 0.0;
  Electrode electrode;

  auto operator<=>(const PulseEvent&) const = default;
};

// Time-ordered pulse schedule. Times are relative to the start of the run
// that executes the program.
struct StimulusProgram {
  std::vector<PulseEvent> events;
  double duration_ms = 0.0;

  bool operator==(const StimulusProgram&) const = default;
};

// Throws ConfigError unless events are sorted, in [0, duration) and on the grid.
void check_program(const StimulusProgram& program);

using ElectrodeSet = std::vector<Electrode>;  // sorted, unique

enum class LPattern { kRegular, kUpsideDown };

// Regular: bottom row plus left column. Upside-down: top row plus left column.
ElectrodeSet l_pattern(LPattern kind);
// Mirrors rows (r -> 7 - r).
ElectrodeSet flip_rows(const ElectrodeSet& electrodes);

struct TrainShape {
  int pulses = 100;
  double rate_hz = 250.0;
};

// All pattern electrodes pulsed together `pulses` times at `rate_hz`.
StimulusProgram tetanization_program(const ElectrodeSet& pattern, TrainShape shape = {});

// Single simultaneous pulse at 50 ms in a 150 ms window.
StimulusProgram probe_program(const ElectrodeSet& pattern);

inline constexpr double kProbeOnsetMs = 50.0;
inline constexpr double kProbeWindowMs = 150.0;
inline constexpr double kPresentationMs = 100.0;
inline constexpr double kMaxRateHz = 200.0;

struct DigitImage {
  static constexpr int kSide = 6;
  std::array<double, kSide * kSide> pixels{};  // row-major, values in [0, 1]
  int label = 0;

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row * kSide + col)]; }
  bool operator==(const DigitImage&) const = default;
};

// Pixel (r, c) drives electrode (r + 1, c + 1) with a periodic train at
// intensity * 200 Hz for 100 ms, first pulse at t = 0. Periods are rounded to
// the nearest multiple of dt.
StimulusProgram encode_digit(const DigitImage& image, double dt = 1.0);

// Class-0 electrodes: rows 1-3 of column 10; class-1: rows 4-6.
ElectrodeSet label_electrodes(int label);

// Label electrodes pulsed at 200 Hz for 100 ms.
StimulusProgram teacher_program(int label);

// Time-sorted union; duplicate (time, electrode) events collapse.
StimulusProgram merge(std::span<const StimulusProgram> programs);
StimulusProgram merge(std::initializer_list<StimulusProgram> programs);

}  // namespace measim
