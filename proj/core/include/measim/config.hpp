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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace measim {

// Complete parameter set for one simulated culture. Units: mV, ms, mm.
// The first block holds the values calibrated against biological recordings;
// the second block holds engine and geometry choices.
struct SimParams {
  double v_rest = -70.0;
  double v_thresh = -50.0;
  double v_reset = -70.0;
  double t_refrac = 5.0;
  double tau_m = 50.0;
  double tau_plus = 20.0;
  double tau_minus = 20.0;
  double a_plus = 1e-2;
  double a_minus = 1e-4;  // magnitude; depression is applied with negative sign
  double exc_strength = 1.0;
  double inh_strength = 10.0;
  double sigma_e = 1.2;
  double sigma_i = 0.15;

  std::int64_t n_neurons = 10000;
  std::int64_t k_exc = 3000;
  std::int64_t k_inh = 500;
  double dt = 1.0;
  double sigma_stim = 0.6;
  double stim_amplitude = 40.0;
  // Per-synapse cap as a multiple of the post-normalization mean weight of
  // the synapse's type.
  double w_max_factor = 10.0;
  double exc_frac = 0.8;
  std::uint64_t seed = 1;

  // Membrane increment (mV) delivered by one unit of synaptic weight.
  double weight_unit_mv() const { return v_thresh - v_rest; }

  bool operator==(const SimParams&) const = default;
};

SimParams default_params();

struct Violation {
  std::string field;
  std::string constraint;
};

// Empty result iff every parameter invariant holds.
std::vector<Violation> validate(const SimParams& params);

// Throws ConfigError listing all violations.
void require_valid(const SimParams& params);

// Multiplies n_neurons, k_exc and k_inh by `factor` (rounded to nearest).
SimParams scaled(SimParams params, double factor);

// --- field reflection -------------------------------------------------------

std::vector<std::string_view> param_field_names();
bool is_param_field(std::string_view name);
double get_field(const SimParams& params, std::string_view name);
// Throws ConfigError for unknown names or non-integral values of count fields.
void set_field(SimParams& params, std::string_view name, double value);

// --- parameter files --------------------------------------------------------

// `key = value` lines in field order. Doubles use the shortest representation
// that round-trips exactly.
std::string serialize(const SimParams& params);
// Starts from `base` and overrides every key present. '#' starts a comment;
// unknown keys and duplicates are errors (DataError).
SimParams parse_params(std::string_view text, const SimParams& base = default_params());
SimParams load_params(const std::filesystem::path& path,
                      const SimParams& base = default_params());
void save_params(const std::filesystem::path& path, const SimParams& params);

// 16 hex digits; FNV-1a over the serialized form.
std::string params_digest(const SimParams& params);

// --- search spaces ----------------------------------------------------------

// A grid entry: either a literal, or `factor * other_field` resolved per
// combination after all literal fields are assigned.
struct GridValue {
  double value = 0.0;
  std::string ref;

  static GridValue literal(double v) { return {v, {}}; }
  static GridValue scaled_ref(double factor, std::string field) {
    return {factor, std::move(field)};
  }
  bool is_ref() const { return !ref.empty(); }
  bool operator==(const GridValue&) const = default;
};

struct SearchSpace {
  SimParams base = default_params();
  // Ordered by field name; enumeration is lexicographic in this order, with
  // the first field varying slowest.
  std::map<std::string, std::vector<GridValue>> grids;
  std::size_t cap = 1'000'000;

  // Throws ConfigError on an empty grid, an unknown field, a bad reference,
  // or a product above `cap`.
  std::size_t size() const;
};

struct Enumeration {
  std::vector<SimParams> candidates;
  std::size_t excluded = 0;  // combinations failing validate()
};

Enumeration enumerate(const SearchSpace& space);

// Same keys as parameter files, values are comma-separated grids. A value of
// the form `F*name` refers to another field.
SearchSpace parse_space(std::string_view text, const SimParams& base = default_params());
SearchSpace load_space(const std::filesystem::path& path,
                       const SimParams& base = default_params());

// Default calibration ranges around `center`: strengths and learning rates
// at 0.1x/1x/10x, time constants and sigmas at 0.5x/1x/1.5x.
SearchSpace default_calibration_space(const SimParams& center);

}  // namespace measim
