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
#include <span>
#include <vector>

#include "measim/config.hpp"
#include "measim/rng.hpp"

namespace measim {

// 1-based electrode coordinates on the 6 x 10 array.
struct Electrode {
  int row = 1;
  int col = 1;

  auto operator<=>(const Electrode&) const = default;
};

// Substrate coordinates in mm: `row_mm` runs along the 3 mm side (electrode
// rows), `col_mm` along the 5 mm side (electrode columns).
struct Position {
  double row_mm = 0.0;
  double col_mm = 0.0;

  bool operator==(const Position&) const = default;
};

inline double squared_distance(Position a, Position b) {
  const double dr = a.row_mm - b.row_mm;
  const double dc = a.col_mm - b.col_mm;
  return dr * dr + dc * dc;
}

struct MeaGrid {
  static constexpr int kRows = 6;
  static constexpr int kCols = 10;
  static constexpr int kElectrodes = kRows * kCols;
  static constexpr double kPitchMm = 0.5;
  static constexpr double kHeightMm = 3.0;
  static constexpr double kWidthMm = 5.0;

  static constexpr bool contains(Electrode e) {
    return e.row >= 1 && e.row <= kRows && e.col >= 1 && e.col <= kCols;
  }
  // Row-major, 0-based.
  static constexpr int index(Electrode e) { return (e.row - 1) * kCols + (e.col - 1); }
  static constexpr Electrode at(int index) { return {index / kCols + 1, index % kCols + 1}; }
  static constexpr Position center(Electrode e) {
    return {(e.row - 0.5) * kPitchMm, (e.col - 0.5) * kPitchMm};
  }
};

struct Placement {
  std::vector<Position> positions;
  std::vector<std::uint8_t> excitatory;  // 1 = excitatory, 0 = inhibitory

  std::size_t size() const { return positions.size(); }

  bool operator==(const Placement&) const = default;
};

// Synapses grouped by postsynaptic neuron (CSR). The sign of a synapse is
// implied by its presynaptic neuron's type; weights are stored as magnitudes.
// A second index groups the same synapses by presynaptic neuron for spike
// propagation and depression.
struct SynapseTable {
  std::vector<std::uint64_t> offsets{0};  // size n + 1
  std::vector<std::uint32_t> pre;
  std::vector<double> weight;

  std::vector<std::uint64_t> out_offsets{0};  // size n + 1
  std::vector<std::uint32_t> out_post;
  std::vector<std::uint32_t> out_synapse;  // index into pre/weight

  std::size_t neuron_count() const { return offsets.size() - 1; }
  std::size_t size() const { return pre.size(); }

  std::uint64_t in_begin(std::size_t post) const { return offsets[post]; }
  std::uint64_t in_end(std::size_t post) const { return offsets[post + 1]; }

  // Rebuilds the presynaptic index from offsets/pre.
  void rebuild_out_index();

  bool operator==(const SynapseTable&) const = default;
};

// Sparse electrode-to-neuron coupling, grouped by electrode.
struct CouplingMatrix {
  static constexpr double kCutoff = 1e-4;

  std::vector<std::uint64_t> offsets;  // size kElectrodes + 1
  std::vector<std::uint32_t> neuron;
  std::vector<double> value;

  bool operator==(const CouplingMatrix&) const = default;
};

struct Culture {
  SimParams params;
  Placement placement;
  SynapseTable synapses;
  CouplingMatrix coupling;
  double w_max_exc = 0.0;
  double w_max_inh = 0.0;

  std::size_t size() const { return placement.size(); }
  bool is_excitatory(std::size_t neuron) const { return placement.excitatory[neuron] != 0; }
  double w_max_for_pre(std::size_t pre) const {
    return is_excitatory(pre) ? w_max_exc : w_max_inh;
  }

  bool operator==(const Culture&) const = default;
};

// Diagnostics from connectivity generation, per presynaptic type
// (index 0 = excitatory, 1 = inhibitory).
struct ConnectivityReport {
  std::array<double, 2> mean_in_degree{};
  std::array<double, 2> expected_in_degree{};  // mean over neurons of sum_i p_ij
  // Fraction of postsynaptic neurons whose profile amplitude exceeds 1 (the
  // kernel saturates at p = 1 near the neuron).
  std::array<double, 2> saturated_fraction{};
  std::array<std::size_t, 2> unreachable{};
};

// n_neurons positions i.i.d. uniform over the substrate; floor(exc_frac * n)
// excitatory neurons chosen by a seeded shuffle.
Placement place_neurons(const SimParams& params, Rng& rng);

// Gaussian connection kernel exp(-d^2 / (2 sigma^2)) in log form.
inline double log_kernel(double d2, double sigma) { return -d2 / (2.0 * sigma * sigma); }

// Solves for log(alpha) such that sum_i min(1, alpha * exp(log_k[i])) equals
// `target`. `log_k` must be sorted in descending order. Returns +inf when
// target > log_k.size() (more connections than candidates).
double solve_log_amplitude(std::span<const double> log_k_desc, double target);

// Draws each ordered pair i -> j (i != j) independently with probability
// min(1, alpha_j * exp(-d^2 / (2 sigma_X^2))), where alpha_j is solved per
// postsynaptic neuron and presynaptic type so the expected in-degree equals
// k_exc (k_inh). Weights are left at zero.
// Throws ConfigError if more than 1% of neurons cannot reach a target.
SynapseTable build_connectivity(const Placement& placement, const SimParams& params, Rng& rng,
                                ConnectivityReport* report = nullptr);

struct WeightCaps {
  double exc = 0.0;
  double inh = 0.0;
};

// Uniform(0,1) weights rescaled so each neuron's excitatory in-weights sum to
// exc_strength and inhibitory in-weights to inh_strength. Returns the per-type
// caps (w_max_factor times the post-scaling mean weight of that type).
WeightCaps init_weights(SynapseTable& synapses, const Placement& placement,
                        const SimParams& params, Rng& rng);

CouplingMatrix electrode_coupling(std::span<const Position> positions, const SimParams& params);

// Full pipeline seeded from params.seed. Throws ConfigError on invalid params.
Culture generate_culture(const SimParams& params, ConnectivityReport* report = nullptr);

// Neurons strictly within `radius_mm` of any of the given electrodes, ascending.
std::vector<std::uint32_t> neurons_near(const Placement& placement,
                                        std::span<const Electrode> electrodes, double radius_mm);

}  // namespace measim
