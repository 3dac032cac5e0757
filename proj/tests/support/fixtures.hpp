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

// Test-only helpers: hand-built cultures and reference computations that do
// not share code paths with the library implementations they check.

#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "measim/culture.hpp"
#include "measim/engine.hpp"

namespace measim::testing {

struct SynapseSpec {
  std::uint32_t pre;
  std::uint32_t post;
  double weight;
};

// Culture with explicit neurons and synapses and no electrode coupling.
inline Culture make_culture(const SimParams& params, const std::vector<bool>& excitatory,
                            const std::vector<SynapseSpec>& synapses, double w_max_exc = 100.0,
                            double w_max_inh = 100.0) {
  Culture c;
  c.params = params;
  c.params.n_neurons = static_cast<std::int64_t>(excitatory.size());
  const std::size_t n = excitatory.size();
  for (std::size_t i = 0; i < n; ++i) {
    c.placement.positions.push_back({1.5, 2.5});
    c.placement.excitatory.push_back(excitatory[i] ? 1 : 0);
  }
  c.synapses.offsets.assign(n + 1, 0);
  for (std::size_t post = 0; post < n; ++post) {
    for (const auto& s : synapses) {
      if (s.post != post) continue;
      c.synapses.pre.push_back(s.pre);
      c.synapses.weight.push_back(s.weight);
    }
    c.synapses.offsets[post + 1] = c.synapses.pre.size();
  }
  c.synapses.rebuild_out_index();
  c.coupling.offsets.assign(MeaGrid::kElectrodes + 1, 0);
  c.w_max_exc = w_max_exc;
  c.w_max_inh = w_max_inh;
  return c;
}

// Weight of synapse pre -> post (first match).
inline double weight_of(const Culture& c, std::uint32_t pre, std::uint32_t post) {
  for (auto s = c.synapses.in_begin(post); s < c.synapses.in_end(post); ++s) {
    if (c.synapses.pre[s] == pre) return c.synapses.weight[s];
  }
  return std::nan("");
}

// Direct evaluation of the pairwise rule for one spike pair, excitatory sign:
// t_out > t_in potentiates by a_plus * exp(-(t_out - t_in) / tau_plus),
// otherwise depresses by a_minus * exp((t_out - t_in) / tau_minus).
inline double pair_delta(double t_in, double t_out, const SimParams& p) {
  if (t_out > t_in) return p.a_plus * std::exp(-(t_out - t_in) / p.tau_plus);
  return -p.a_minus * std::exp((t_out - t_in) / p.tau_minus);
}

// Sum of pair_delta over every (pre spike, post spike) combination; sign
// flipped for inhibitory presynaptic neurons.
inline double all_pairs_delta(const std::vector<double>& pre_times,
                              const std::vector<double>& post_times, bool excitatory,
                              const SimParams& p) {
  double sum = 0.0;
  for (double tin : pre_times) {
    for (double tout : post_times) sum += pair_delta(tin, tout, p);
  }
  return excitatory ? sum : -sum;
}

inline std::vector<double> spike_times(const SpikeRecord& r, std::uint32_t neuron) {
  std::vector<double> out;
  for (const auto& s : r.spikes) {
    if (s.neuron == neuron) out.push_back(static_cast<double>(s.step) * r.dt);
  }
  return out;
}

// Steps the simulator, forcing a spike in every listed neuron at the listed
// steps with a large external kick. Returns the recorded spikes.
inline SpikeRecord drive(Simulator& sim, std::int64_t steps,
                         const std::vector<std::pair<std::int64_t, std::uint32_t>>& kicks,
                         double kick_mv = 1000.0) {
  SpikeRecord rec;
  rec.dt = sim.params().dt;
  const std::size_t n = sim.culture().size();
  std::vector<double> input(n, 0.0);
  for (std::int64_t k = 0; k < steps; ++k) {
    std::fill(input.begin(), input.end(), 0.0);
    for (const auto& [step, neuron] : kicks) {
      if (step == sim.state().step) input[neuron] = kick_mv;
    }
    const auto at = sim.state().step;
    for (auto j : sim.step(input)) rec.spikes.push_back({at, j});
  }
  rec.duration_ms = static_cast<double>(steps) * rec.dt;
  return rec;
}

}  // namespace measim::testing
