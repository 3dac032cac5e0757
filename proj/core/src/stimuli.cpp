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

#include "measim/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "measim/error.hpp"

namespace measim {
namespace {

StimulusProgram periodic_train(const ElectrodeSet& electrodes, double period_ms, int pulses,
                               double duration_ms) {
  StimulusProgram p;
  p.duration_ms = duration_ms;
  for (int k = 0; k < pulses; ++k) {
    for (const auto& e : electrodes) p.events.push_back({k * period_ms, e});
  }
  return p;
}

void normalize(ElectrodeSet& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

}  // namespace

void check_program(const StimulusProgram& program) {
  if (!(program.duration_ms >= 0) || !std::isfinite(program.duration_ms)) {
    throw ConfigError("program duration must be finite and non-negative");
  }
  for (std::size_t i = 0; i < program.events.size(); ++i) {
    const auto& ev = program.events[i];
    if (!MeaGrid::contains(ev.electrode)) {
      throw ConfigError("pulse on electrode (" + std::to_string(ev.electrode.row) + "," +
                        std::to_string(ev.electrode.col) + ") outside the 6x10 grid");
    }
    if (!(ev.time_ms >= 0) || !(ev.time_ms < program.duration_ms)) {
      throw ConfigError("pulse time " + std::to_string(ev.time_ms) + " ms outside [0, " +
                        std::to_string(program.duration_ms) + ")");
    }
    if (i > 0 && ev.time_ms < program.events[i - 1].time_ms) {
      throw ConfigError("pulse events are not time-sorted");
    }
  }
}

ElectrodeSet l_pattern(LPattern kind) {
  const int bar_row = kind == LPattern::kRegular ? MeaGrid::kRows : 1;
  ElectrodeSet set;
  for (int c = 1; c <= MeaGrid::kCols; ++c) set.push_back({bar_row, c});
  for (int r = 1; r <= MeaGrid::kRows; ++r) set.push_back({r, 1});
  normalize(set);
  return set;
}

ElectrodeSet flip_rows(const ElectrodeSet& electrodes) {
  ElectrodeSet out;
  out.reserve(electrodes.size());
  for (const auto& e : electrodes) out.push_back({MeaGrid::kRows + 1 - e.row, e.col});
  normalize(out);
  return out;
}

StimulusProgram tetanization_program(const ElectrodeSet& pattern, TrainShape shape) {
  if (pattern.empty()) throw ConfigError("tetanization pattern is empty");
  const double period = 1000.0 / shape.rate_hz;
  return periodic_train(pattern, period, shape.pulses, shape.pulses * period);
}

StimulusProgram probe_program(const ElectrodeSet& pattern) {
  if (pattern.empty()) throw ConfigError("probe pattern is empty");
  StimulusProgram p;
  p.duration_ms = kProbeWindowMs;
  for (const auto& e : pattern) p.events.push_back({kProbeOnsetMs, e});
  return p;
}

StimulusProgram encode_digit(const DigitImage& image, double dt) {
  StimulusProgram p;
  p.duration_ms = kPresentationMs;
  for (int r = 0; r < DigitImage::kSide; ++r) {
    for (int c = 0; c < DigitImage::kSide; ++c) {
      const double intensity = image.at(r, c);
      if (!(intensity >= 0.0 && intensity <= 1.0)) {
        throw ConfigError("pixel intensity outside [0, 1]");
      }
      if (intensity == 0.0) continue;
      const double period = 1000.0 / (intensity * kMaxRateHz);
      const double rounded = std::max(dt, std::round(period / dt) * dt);
      const auto steps = static_cast<long long>(std::llround(rounded / dt));
      for (long long k = 0;; ++k) {
        const double t = static_cast<double>(k * steps) * dt;
        if (t >= kPresentationMs) break;
        p.events.push_back({t, {r + 1, c + 1}});
      }
    }
  }
  std::sort(p.events.begin(), p.events.end());
  return p;
}

ElectrodeSet label_electrodes(int label) {
  if (label != 0 && label != 1) throw ConfigError("label must be 0 or 1");
  ElectrodeSet set;
  const int first = label == 0 ? 1 : 4;
  for (int r = first; r < first + 3; ++r) set.push_back({r, MeaGrid::kCols});
  return set;
}

StimulusProgram teacher_program(int label) {
  const double period = 1000.0 / kMaxRateHz;
  const int pulses = static_cast<int>(std::llround(kPresentationMs / period));
  return periodic_train(label_electrodes(label), period, pulses, kPresentationMs);
}

StimulusProgram merge(std::span<const StimulusProgram> programs) {
  StimulusProgram out;
  for (const auto& p : programs) {
    out.duration_ms = std::max(out.duration_ms, p.duration_ms);
    out.events.insert(out.events.end(), p.events.begin(), p.events.end());
  }
  std::sort(out.events.begin(), out.events.end());
  out.events.erase(std::unique(out.events.begin(), out.events.end()), out.events.end());
  return out;
}

StimulusProgram merge(std::initializer_list<StimulusProgram> programs) {
  return merge(std::span<const StimulusProgram>(programs.begin(), programs.size()));
}

}  // namespace measim
