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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "measim/culture.hpp"
#include "measim/stimuli.hpp"

namespace measim {

struct Spike {
  std::int64_t step = 0;  // absolute step index; time = step * dt
  std::uint32_t neuron = 0;

  auto operator<=>(const Spike&) const = default;
};

struct SpikeRecord {
  std::vector<Spike> spikes;  // sorted by (step, neuron)
  double dt = 1.0;
  double duration_ms = 0.0;
  std::int64_t start_step = 0;  // step at which the recorded interval began
  std::uint64_t seed = 0;
  std::string params_digest;

  double time_ms(const Spike& s) const { return static_cast<double>(s.step - start_step) * dt; }

  bool operator==(const SpikeRecord&) const = default;
};

struct NetworkState {
  std::vector<double> v;                    // mV
  std::vector<std::int64_t> refractory_until;  // first step at which input is accepted
  std::vector<double> pre_trace;            // x, decays with tau_plus
  std::vector<double> post_trace;           // y, decays with tau_minus
  std::vector<double> synaptic_input;       // mV delivered at the next step
  std::int64_t step = 0;

  double time_ms(double dt) const { return static_cast<double>(step) * dt; }
};

// Time-stepped LIF network with online all-to-all trace STDP. The simulator
// references the culture's weights; a simulator constructed from a const
// culture can never enable plasticity.
class Simulator {
 public:
  explicit Simulator(Culture& culture);
  explicit Simulator(const Culture& culture);

  // v = v_rest, zero traces, no pending input, step 0.
  void reset();

  void set_plasticity(bool enabled);
  bool plasticity() const { return plastic_; }

  // One dt. Order: leak, input integration (refractory neurons clamped at
  // v_reset), threshold/reset, trace decay, STDP, trace increments, spike
  // propagation for the next step. Returns the neurons that spiked, ascending.
  // Throws SimulationError on a non-finite membrane potential.
  std::span<const std::uint32_t> step(std::span<const double> external_input);

  // Executes `program` starting at the current time, then keeps stepping until
  // `duration_ms` has elapsed. Spikes are appended to `record` when non-null.
  void advance(const StimulusProgram& program, double duration_ms, SpikeRecord* record = nullptr);

  const NetworkState& state() const { return state_; }
  NetworkState& mutable_state() { return state_; }
  const Culture& culture() const { return *culture_; }
  const SimParams& params() const { return culture_->params; }

 private:
  void apply_stdp(std::span<const std::uint32_t> spikes);

  const Culture* culture_;
  double* weights_;  // null for read-only simulators
  NetworkState state_;
  bool plastic_ = false;

  double leak_ = 0.0;
  double pre_decay_ = 0.0;
  double post_decay_ = 0.0;
  std::int64_t refractory_steps_ = 0;
  std::vector<std::uint32_t> spiked_;
  std::vector<double> external_;
};

enum class Plasticity { kOff, kOn };

// Fresh-state run of `program` for `duration_ms`. Returns an empty record when
// `record` is false.
SpikeRecord run(Culture& culture, const StimulusProgram& program, double duration_ms,
                Plasticity plasticity, bool record = true);
SpikeRecord run(const Culture& culture, const StimulusProgram& program, double duration_ms,
                bool record = true);

// Number of whole steps in `ms`, rejecting durations that are not multiples of dt.
std::int64_t steps_for(double ms, double dt);

}  // namespace measim
