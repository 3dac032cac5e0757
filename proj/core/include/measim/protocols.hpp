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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "measim/config.hpp"
#include "measim/culture.hpp"
#include "measim/engine.hpp"
#include "measim/stimuli.hpp"

namespace measim {

// Mean spike count per neuron in consecutive fixed-width bins.
struct ResponseTrace {
  double bin_ms = 10.0;
  double window_ms = 150.0;
  std::vector<double> values;

  std::size_t bins() const { return values.size(); }
  bool operator==(const ResponseTrace&) const = default;
};

// Throws ConfigError if the record covers less than `window_ms`.
ResponseTrace binned_response(const SpikeRecord& record, std::size_t n_neurons,
                              double bin_ms = 10.0, double window_ms = 150.0);

// Mean squared difference over bins. Throws ConfigError on shape mismatch.
double mse(const ResponseTrace& a, const ResponseTrace& b);

// Sum of the bins at or after the probe onset.
double response_strength(const ResponseTrace& trace, double onset_ms = kProbeOnsetMs);

// Element-wise mean of equally shaped traces.
ResponseTrace mean_trace(std::span<const ResponseTrace> traces);

struct AggregateResult {
  std::vector<double> values;
  double mean = 0.0;
  // Student-t 95% half-width with n - 1 degrees of freedom; empty for n = 1.
  std::optional<double> half_width;
};

AggregateResult aggregate(std::span<const double> values);

// --- tetanization -----------------------------------------------------------

enum class ProbeCondition { kRegPre = 0, kUpsPre = 1, kRegPost = 2, kUpsPost = 3 };
inline constexpr std::array<const char*, 4> kConditionNames{"regL_pre", "upsL_pre", "regL_post",
                                                            "upsL_post"};

struct TetanizationReport {
  std::uint64_t seed = 0;
  std::array<ResponseTrace, 4> traces;  // indexed by ProbeCondition

  const ResponseTrace& trace(ProbeCondition c) const {
    return traces[static_cast<std::size_t>(c)];
  }
  double response(ProbeCondition c) const { return response_strength(trace(c)); }
  // response(regL) / response(upsL); empty when the denominator is zero.
  std::optional<double> selectivity_pre() const;
  std::optional<double> selectivity_post() const;
};

struct TetanizationOptions {
  int trains = 40;
  TrainShape train;
};

// Probes regL and upsL on a fresh state with plasticity off.
std::array<ResponseTrace, 2> probe_both(const Culture& culture);

// Probe, tetanize with regL (plasticity on, continuous state across trains),
// probe again. Mutates the culture's weights.
TetanizationReport tetanize(Culture& culture, const TetanizationOptions& options = {});

struct TetanizationResult {
  std::vector<TetanizationReport> reports;
  std::array<ResponseTrace, 4> mean_traces;
  AggregateResult selectivity_pre;   // repetitions with a defined ratio
  AggregateResult selectivity_post;
};

// Seeds for repetition r: derive_seed(params.seed, r) unless given explicitly.
std::vector<std::uint64_t> repetition_seeds(std::uint64_t base, int reps);

// Independent repetitions (fresh culture per seed), run in parallel.
TetanizationResult tetanization_experiment(const SimParams& params,
                                           std::span<const std::uint64_t> seeds,
                                           const TetanizationOptions& options = {});
TetanizationResult tetanization_experiment(const SimParams& params, int reps = 4,
                                           const TetanizationOptions& options = {});

// --- digit recognition ------------------------------------------------------

inline constexpr double kOutputRadiusMm = 0.25;
inline constexpr double kRelaxationMs = 50.0;

struct OutputGroups {
  std::array<std::vector<std::uint32_t>, 2> members;
};

// Neurons within 0.25 mm of each class's label electrodes.
OutputGroups output_groups(const Culture& culture);

struct ClassifierReadout {
  std::array<std::size_t, 2> counts{};
  int predicted = 0;
  bool tie = false;
};

// argmax with ties broken toward class 0.
ClassifierReadout decide(std::size_t count0, std::size_t count1);

// Presents each sample (digit + teacher, 100 ms) followed by 50 ms of silence,
// plasticity on throughout, state carried across samples.
// Throws ConfigError on an empty set.
void train_digits(Culture& culture, std::span<const DigitImage> trainset);

// Fresh state, digit alone for 100 ms, plasticity off.
ClassifierReadout classify(const Culture& culture, const OutputGroups& groups,
                           const DigitImage& image);
ClassifierReadout classify(const Culture& culture, const DigitImage& image);

struct Evaluation {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [label][predicted]
  std::array<std::size_t, 2> group_sizes{};

  double accuracy() const {
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  }
};

// Classifications run in parallel over the (read-only) culture.
Evaluation evaluate(const Culture& culture, std::span<const DigitImage> testset);

// Number of worker threads used by the parallel helpers (defaults to the
// hardware concurrency; 1 disables threading).
void set_worker_threads(unsigned threads);
unsigned worker_threads();

}  // namespace measim
