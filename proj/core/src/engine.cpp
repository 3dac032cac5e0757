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

#include "measim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "measim/error.hpp"

namespace measim {

std::int64_t steps_for(double ms, double dt) {
  const double ratio = ms / dt;
  const double rounded = std::round(ratio);
  if (!std::isfinite(ratio) || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, rounded)) {
    throw ConfigError("time " + std::to_string(ms) + " ms is not a multiple of dt = " +
                      std::to_string(dt) + " ms");
  }
  return static_cast<std::int64_t>(rounded);
}

Simulator::Simulator(Culture& culture) : Simulator(static_cast<const Culture&>(culture)) {
  weights_ = culture.synapses.weight.data();
}

Simulator::Simulator(const Culture& culture) : culture_(&culture), weights_(nullptr) {
  const auto& p = culture.params;
  leak_ = std::exp(-p.dt / p.tau_m);
  pre_decay_ = std::exp(-p.dt / p.tau_plus);
  post_decay_ = std::exp(-p.dt / p.tau_minus);
  refractory_steps_ = std::max<std::int64_t>(1, std::llround(p.t_refrac / p.dt));
  reset();
}

void Simulator::reset() {
  const std::size_t n = culture_->size();
  const double v_rest = culture_->params.v_rest;
  state_.v.assign(n, v_rest);
  state_.refractory_until.assign(n, 0);
  state_.pre_trace.assign(n, 0.0);
  state_.post_trace.assign(n, 0.0);
  state_.synaptic_input.assign(n, 0.0);
  state_.step = 0;
  spiked_.clear();
}

void Simulator::set_plasticity(bool enabled) {
  if (enabled && weights_ == nullptr) {
    throw ConfigError("plasticity requires a mutable culture");
  }
  plastic_ = enabled;
}

std::span<const std::uint32_t> Simulator::step(std::span<const double> external_input) {
  const auto& p = culture_->params;
  const std::size_t n = culture_->size();
  if (external_input.size() != n) {
    throw ConfigError("external input has " + std::to_string(external_input.size()) +
                      " entries, expected " + std::to_string(n));
  }
  const std::int64_t k = state_.step;
  spiked_.clear();

  for (std::size_t j = 0; j < n; ++j) {
    double v = p.v_rest + (state_.v[j] - p.v_rest) * leak_;
    if (k < state_.refractory_until[j]) {
      v = p.v_reset;
    } else {
      v += external_input[j] + state_.synaptic_input[j];
      if (!std::isfinite(v)) {
        throw SimulationError("non-finite membrane potential for neuron " + std::to_string(j) +
                              " at t = " + std::to_string(state_.time_ms(p.dt)) + " ms");
      }
      if (v >= p.v_thresh) {
        spiked_.push_back(static_cast<std::uint32_t>(j));
        v = p.v_reset;
        state_.refractory_until[j] = k + refractory_steps_;
      }
    }
    state_.v[j] = v;
    state_.synaptic_input[j] = 0.0;
  }

  for (std::size_t j = 0; j < n; ++j) {
    state_.pre_trace[j] *= pre_decay_;
    state_.post_trace[j] *= post_decay_;
  }
  // Post traces include this step's spikes before STDP reads them (a pre spike
  // coincident with a post spike depresses); pre traces are incremented
  // afterwards (coincidence does not potentiate).
  for (auto j : spiked_) state_.post_trace[j] += 1.0;
  if (plastic_ && !spiked_.empty()) apply_stdp(spiked_);
  for (auto j : spiked_) state_.pre_trace[j] += 1.0;

  const auto& syn = culture_->synapses;
  const double* w = culture_->synapses.weight.data();
  const double unit = p.weight_unit_mv();
  for (auto i : spiked_) {
    const double sign_unit = culture_->is_excitatory(i) ? unit : -unit;
    for (auto o = syn.out_offsets[i]; o < syn.out_offsets[i + 1]; ++o) {
      state_.synaptic_input[syn.out_post[o]] += sign_unit * w[syn.out_synapse[o]];
    }
  }

  ++state_.step;
  return spiked_;
}

// Pairwise STDP realized with traces: for a post spike at t_out, every in-synapse gains a_plus * x_pre,
// x_pre = sum over earlier pre spikes of exp(-(t_out - t_in) / tau_plus).
// For a pre spike at t_in, every out-synapse gains -a_minus * y_post,
// y_post = sum over post spikes with t_out <= t_in of exp((t_out - t_in) / tau_minus).
// Inhibitory synapses use the opposite sign. Weights are clamped to [0, w_max].
void Simulator::apply_stdp(std::span<const std::uint32_t> spikes) {
  const auto& p = culture_->params;
  const auto& syn = culture_->synapses;
  const auto& x = state_.pre_trace;
  const auto& y = state_.post_trace;
  const double w_max_exc = culture_->w_max_exc;
  const double w_max_inh = culture_->w_max_inh;

  for (auto j : spikes) {
    for (auto s = syn.in_begin(j); s < syn.in_end(j); ++s) {
      const auto i = syn.pre[s];
      const double xi = x[i];
      if (xi == 0.0) continue;
      if (culture_->is_excitatory(i)) {
        weights_[s] = std::min(w_max_exc, weights_[s] + p.a_plus * xi);
      } else {
        weights_[s] = std::max(0.0, weights_[s] - p.a_plus * xi);
      }
    }
  }
  for (auto i : spikes) {
    const bool exc = culture_->is_excitatory(i);
    for (auto o = syn.out_offsets[i]; o < syn.out_offsets[i + 1]; ++o) {
      const double yj = y[syn.out_post[o]];
      if (yj == 0.0) continue;
      double& w = weights_[syn.out_synapse[o]];
      if (exc) {
        w = std::max(0.0, w - p.a_minus * yj);
      } else {
        w = std::min(w_max_inh, w + p.a_minus * yj);
      }
    }
  }
}

void Simulator::advance(const StimulusProgram& program, double duration_ms, SpikeRecord* record) {
  check_program(program);
  const auto& p = culture_->params;
  const std::int64_t n_steps = steps_for(duration_ms, p.dt);
  if (program.duration_ms > duration_ms + 1e-9) {
    throw ConfigError("program is longer than the requested run duration");
  }
  const std::size_t n = culture_->size();
  const auto& cm = culture_->coupling;
  external_.assign(n, 0.0);
  const std::int64_t start = state_.step;
  if (record) {
    record->dt = p.dt;
    if (record->spikes.empty() && record->duration_ms == 0.0) record->start_step = start;
    record->duration_ms += duration_ms;
  }

  std::size_t next = 0;
  std::vector<std::uint32_t> touched;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    while (next < program.events.size() &&
           std::llround(program.events[next].time_ms / p.dt) <= k) {
      const auto& ev = program.events[next++];
      if (std::llround(ev.time_ms / p.dt) < k) continue;
      const auto e = static_cast<std::size_t>(MeaGrid::index(ev.electrode));
      for (auto c = cm.offsets[e]; c < cm.offsets[e + 1]; ++c) {
        const auto j = cm.neuron[c];
        if (external_[j] == 0.0) touched.push_back(j);
        external_[j] += cm.value[c] * p.stim_amplitude;
      }
    }
    const auto spikes = step(external_);
    for (auto j : touched) external_[j] = 0.0;
    touched.clear();
    if (record) {
      for (auto j : spikes) record->spikes.push_back({start + k, j});
    }
  }
}

SpikeRecord run(Culture& culture, const StimulusProgram& program, double duration_ms,
                Plasticity plasticity, bool record) {
  Simulator sim(culture);
  sim.set_plasticity(plasticity == Plasticity::kOn);
  SpikeRecord out;
  out.seed = culture.params.seed;
  out.params_digest = params_digest(culture.params);
  sim.advance(program, duration_ms, record ? &out : nullptr);
  out.dt = culture.params.dt;
  out.duration_ms = duration_ms;
  return out;
}

SpikeRecord run(const Culture& culture, const StimulusProgram& program, double duration_ms,
                bool record) {
  Simulator sim(culture);
  SpikeRecord out;
  out.seed = culture.params.seed;
  out.params_digest = params_digest(culture.params);
  sim.advance(program, duration_ms, record ? &out : nullptr);
  out.dt = culture.params.dt;
  out.duration_ms = duration_ms;
  return out;
}

}  // namespace measim
