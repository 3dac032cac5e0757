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

#include "measim/culture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "measim/error.hpp"

namespace measim {

void SynapseTable::rebuild_out_index() {
  const std::size_t n = neuron_count();
  if (pre.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("synapse count exceeds 32-bit index range");
  }
  out_offsets.assign(n + 1, 0);
  for (auto p : pre) ++out_offsets[p + 1];
  std::partial_sum(out_offsets.begin(), out_offsets.end(), out_offsets.begin());
  out_post.resize(pre.size());
  out_synapse.resize(pre.size());
  std::vector<std::uint64_t> cursor(out_offsets.begin(), out_offsets.end() - 1);
  for (std::size_t post = 0; post < n; ++post) {
    for (auto s = offsets[post]; s < offsets[post + 1]; ++s) {
      const auto slot = cursor[pre[s]]++;
      out_post[slot] = static_cast<std::uint32_t>(post);
      out_synapse[slot] = static_cast<std::uint32_t>(s);
    }
  }
}

Placement place_neurons(const SimParams& params, Rng& rng) {
  const auto n = static_cast<std::size_t>(params.n_neurons);
  Placement out;
  out.positions.resize(n);
  for (auto& p : out.positions) {
    p.row_mm = rng.uniform(0.0, MeaGrid::kHeightMm);
    p.col_mm = rng.uniform(0.0, MeaGrid::kWidthMm);
  }
  const auto n_exc = static_cast<std::size_t>(std::floor(params.exc_frac * static_cast<double>(n)));
  out.excitatory.assign(n, 0);
  std::fill_n(out.excitatory.begin(), n_exc, std::uint8_t{1});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(out.excitatory[i - 1], out.excitatory[rng.below(i)]);
  }
  return out;
}

double solve_log_amplitude(std::span<const double> log_k_desc, double target) {
  const std::size_t n = log_k_desc.size();
  if (target > static_cast<double>(n)) return std::numeric_limits<double>::infinity();
  if (target <= 0.0) return -std::numeric_limits<double>::infinity();

  // tail[m] = sum_{i >= m} exp(log_k[i] - log_k[m]), accumulated backwards.
  std::vector<double> tail(n);
  tail[n - 1] = 1.0;
  for (std::size_t m = n - 1; m-- > 0;) {
    tail[m] = 1.0 + std::exp(log_k_desc[m + 1] - log_k_desc[m]) * tail[m + 1];
  }
  // With the first m candidates saturated, alpha = (target - m) / sum_{i>=m}
  // k_i; the solution is the first m at which candidate m is not saturated.
  for (std::size_t m = 0; m < n; ++m) {
    const double remaining = target - static_cast<double>(m);
    if (remaining <= tail[m]) {
      return std::log(remaining) - std::log(tail[m]) - log_k_desc[m];
    }
  }
  return std::numeric_limits<double>::infinity();
}

SynapseTable build_connectivity(const Placement& placement, const SimParams& params, Rng& rng,
                                ConnectivityReport* report) {
  const std::size_t n = placement.size();
  const std::array<double, 2> sigma{params.sigma_e, params.sigma_i};
  const std::array<double, 2> target{static_cast<double>(params.k_exc),
                                     static_cast<double>(params.k_inh)};
  std::array<std::vector<std::uint32_t>, 2> by_type;
  for (std::uint32_t i = 0; i < n; ++i) by_type[placement.excitatory[i] ? 0 : 1].push_back(i);

  ConnectivityReport rep;
  SynapseTable table;
  table.offsets.assign(n + 1, 0);
  // Mean in-degrees are known in advance; reserving avoids repeated regrowth.
  table.pre.reserve(static_cast<std::size_t>(
      std::min<double>(static_cast<double>(n) * (target[0] + target[1]) * 1.05,
                       static_cast<double>(n) * static_cast<double>(n))));

  std::vector<double> log_amp(n * 2);
  std::vector<double> scratch;
  for (std::size_t j = 0; j < n; ++j) {
    const Position pj = placement.positions[j];
    for (int type = 0; type < 2; ++type) {
      scratch.clear();
      for (auto i : by_type[type]) {
        if (i == j) continue;
        scratch.push_back(log_kernel(squared_distance(placement.positions[i], pj), sigma[type]));
      }
      std::sort(scratch.begin(), scratch.end(), std::greater<>());
      const double la = solve_log_amplitude(scratch, target[type]);
      log_amp[2 * j + type] = la;
      if (std::isinf(la) && la > 0) ++rep.unreachable[type];
      if (!scratch.empty() && la + scratch.front() > 0) rep.saturated_fraction[type] += 1.0;
    }
  }
  for (int type = 0; type < 2; ++type) {
    if (static_cast<double>(rep.unreachable[type]) > 0.01 * static_cast<double>(n)) {
      throw ConfigError(std::string("target ") + (type == 0 ? "excitatory" : "inhibitory") +
                        " in-degree exceeds available presynaptic neurons for " +
                        std::to_string(rep.unreachable[type]) + " of " + std::to_string(n) +
                        " neurons");
    }
  }

  std::array<double, 2> drawn{};
  for (std::size_t j = 0; j < n; ++j) {
    const Position pj = placement.positions[j];
    for (std::uint32_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const int type = placement.excitatory[i] ? 0 : 1;
      const double la = log_amp[2 * j + type];
      const double logp = la + log_kernel(squared_distance(placement.positions[i], pj), sigma[type]);
      const double p = logp >= 0.0 ? 1.0 : std::exp(logp);
      rep.expected_in_degree[type] += p;
      if (rng.uniform() < p) {
        table.pre.push_back(i);
        drawn[type] += 1.0;
      }
    }
    table.offsets[j + 1] = table.pre.size();
  }
  table.weight.assign(table.pre.size(), 0.0);
  table.rebuild_out_index();

  if (report) {
    const double dn = n ? static_cast<double>(n) : 1.0;
    for (int type = 0; type < 2; ++type) {
      rep.mean_in_degree[type] = drawn[type] / dn;
      rep.expected_in_degree[type] /= dn;
      rep.saturated_fraction[type] /= dn;
    }
    *report = rep;
  }
  return table;
}

WeightCaps init_weights(SynapseTable& synapses, const Placement& placement,
                        const SimParams& params, Rng& rng) {
  std::array<double, 2> total{};
  std::array<std::size_t, 2> count{};
  for (std::size_t j = 0; j < synapses.neuron_count(); ++j) {
    std::array<double, 2> sum{};
    for (auto s = synapses.in_begin(j); s < synapses.in_end(j); ++s) {
      synapses.weight[s] = rng.uniform();
      sum[placement.excitatory[synapses.pre[s]] ? 0 : 1] += synapses.weight[s];
    }
    const std::array<double, 2> scale{sum[0] > 0 ? params.exc_strength / sum[0] : 0.0,
                                      sum[1] > 0 ? params.inh_strength / sum[1] : 0.0};
    for (auto s = synapses.in_begin(j); s < synapses.in_end(j); ++s) {
      const int type = placement.excitatory[synapses.pre[s]] ? 0 : 1;
      synapses.weight[s] *= scale[type];
      total[type] += synapses.weight[s];
      ++count[type];
    }
  }
  WeightCaps caps;
  caps.exc = count[0] ? params.w_max_factor * total[0] / static_cast<double>(count[0]) : 0.0;
  caps.inh = count[1] ? params.w_max_factor * total[1] / static_cast<double>(count[1]) : 0.0;
  return caps;
}

CouplingMatrix electrode_coupling(std::span<const Position> positions, const SimParams& params) {
  CouplingMatrix m;
  m.offsets.assign(MeaGrid::kElectrodes + 1, 0);
  for (int e = 0; e < MeaGrid::kElectrodes; ++e) {
    const Position c = MeaGrid::center(MeaGrid::at(e));
    for (std::uint32_t j = 0; j < positions.size(); ++j) {
      const double v = std::exp(log_kernel(squared_distance(positions[j], c), params.sigma_stim));
      if (v >= CouplingMatrix::kCutoff) {
        m.neuron.push_back(j);
        m.value.push_back(v);
      }
    }
    m.offsets[static_cast<std::size_t>(e) + 1] = m.neuron.size();
  }
  return m;
}

Culture generate_culture(const SimParams& params, ConnectivityReport* report) {
  require_valid(params);
  Culture c;
  c.params = params;
  Rng place_rng(derive_seed(params.seed, 1));
  Rng conn_rng(derive_seed(params.seed, 2));
  Rng weight_rng(derive_seed(params.seed, 3));
  c.placement = place_neurons(params, place_rng);
  c.synapses = build_connectivity(c.placement, params, conn_rng, report);
  const auto caps = init_weights(c.synapses, c.placement, params, weight_rng);
  c.w_max_exc = caps.exc;
  c.w_max_inh = caps.inh;
  c.coupling = electrode_coupling(c.placement.positions, params);
  return c;
}

std::vector<std::uint32_t> neurons_near(const Placement& placement,
                                        std::span<const Electrode> electrodes, double radius_mm) {
  std::vector<std::uint32_t> out;
  const double r2 = radius_mm * radius_mm;
  for (std::uint32_t j = 0; j < placement.size(); ++j) {
    for (const auto& e : electrodes) {
      if (squared_distance(placement.positions[j], MeaGrid::center(e)) < r2) {
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

}  // namespace measim
