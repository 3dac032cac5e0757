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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "measim/config.hpp"
#include "measim/error.hpp"

namespace measim {
namespace {

bool has_violation(const SimParams& p, const std::string& field) {
  const auto v = validate(p);
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.field == field; });
}

TEST(Params, DefaultsMatchPublishedTable) {
  const SimParams p = default_params();
  EXPECT_EQ(p.v_rest, -70.0);
  EXPECT_EQ(p.v_thresh, -50.0);
  EXPECT_EQ(p.v_reset, -70.0);
  EXPECT_EQ(p.t_refrac, 5.0);
  EXPECT_EQ(p.tau_m, 50.0);
  EXPECT_EQ(p.tau_plus, 20.0);
  EXPECT_EQ(p.tau_minus, 20.0);
  EXPECT_EQ(p.a_plus, 1e-2);
  EXPECT_EQ(p.a_minus, 1e-4);
  EXPECT_EQ(p.exc_strength, 1.0);
  EXPECT_EQ(p.inh_strength, 10.0);
  EXPECT_EQ(p.sigma_e, 1.2);
  EXPECT_EQ(p.sigma_i, 0.15);
  EXPECT_EQ(p.n_neurons, 10000);
  EXPECT_EQ(p.k_exc, 3000);
  EXPECT_EQ(p.k_inh, 500);
  EXPECT_TRUE(validate(p).empty());
  EXPECT_EQ(p.weight_unit_mv(), 20.0);
}

TEST(Params, ValidationNamesOffendingField) {
  SimParams p = default_params();
  p.v_thresh = -80.0;
  EXPECT_TRUE(has_violation(p, "v_thresh"));
  EXPECT_THROW(require_valid(p), ConfigError);

  p = default_params();
  p.tau_m = 0.0;
  EXPECT_TRUE(has_violation(p, "tau_m"));

  p = default_params();
  p.dt = 10.0;
  EXPECT_TRUE(has_violation(p, "dt"));

  p = default_params();
  p.a_minus = -1e-4;
  EXPECT_TRUE(has_violation(p, "a_minus"));

  p = default_params();
  p.k_exc = 20000;
  EXPECT_TRUE(has_violation(p, "k_exc"));

  p = default_params();
  p.sigma_e = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(has_violation(p, "sigma_e"));

  p = default_params();
  p.v_reset = -40.0;
  EXPECT_TRUE(has_violation(p, "v_reset"));
}

TEST(Params, ScaleMultipliesCountsOnly) {
  const SimParams p = scaled(default_params(), 0.2);
  EXPECT_EQ(p.n_neurons, 2000);
  EXPECT_EQ(p.k_exc, 600);
  EXPECT_EQ(p.k_inh, 100);
  EXPECT_EQ(p.sigma_e, 1.2);
  EXPECT_EQ(p.exc_strength, 1.0);
  EXPECT_THROW(scaled(default_params(), 0.0), ConfigError);
}

TEST(Params, TextRoundTripIsExact) {
  SimParams p = default_params();
  p.a_plus = 0.1 + 0.2;
  p.sigma_stim = 1.0 / 3.0;
  p.seed = 18446744073709551557ull;
  const SimParams q = parse_params(serialize(p));
  EXPECT_EQ(p, q);
  EXPECT_EQ(params_digest(p), params_digest(q));
}

TEST(Params, ParserRejectsUnknownAndDuplicateKeys) {
  EXPECT_THROW(parse_params("tau_q = 3\n"), DataError);
  EXPECT_THROW(parse_params("tau_m = 3\ntau_m = 4\n"), DataError);
  EXPECT_THROW(parse_params("tau_m = fast\n"), DataError);
  const SimParams p = parse_params("# comment\n\ntau_m = 30  # trailing\n");
  EXPECT_EQ(p.tau_m, 30.0);
  EXPECT_EQ(p.tau_plus, 20.0);
}

TEST(Params, DigestDistinguishesParameterSets) {
  SimParams a = default_params();
  SimParams b = a;
  b.sigma_e = 1.2000000000000002;
  EXPECT_NE(params_digest(a), params_digest(b));
  EXPECT_EQ(params_digest(a).size(), 16u);
}

TEST(Params, FieldReflectionCoversEveryField) {
  SimParams p = default_params();
  for (auto name : param_field_names()) {
    ASSERT_TRUE(is_param_field(name));
    const double before = get_field(p, name);
    set_field(p, name, before);
    EXPECT_EQ(get_field(p, name), before) << name;
  }
  EXPECT_FALSE(is_param_field("voltage"));
  EXPECT_THROW(get_field(p, "voltage"), ConfigError);
  EXPECT_THROW(set_field(p, "n_neurons", 2.5), ConfigError);
}

TEST(Params, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "measim_params_test.cfg";
  SimParams p = default_params();
  p.inh_strength = 800.0;
  save_params(path, p);
  EXPECT_EQ(load_params(path), p);
  std::filesystem::remove(path);
  EXPECT_THROW(load_params(path), DataError);
}

// --- search spaces -------------------------------------------------------------

TEST(Space, SizeIsProductOfAxes) {
  SearchSpace s;
  s.grids["a_plus"] = {GridValue::literal(1e-3), GridValue::literal(1e-2)};
  s.grids["tau_m"] = {GridValue::literal(10), GridValue::literal(20), GridValue::literal(50)};
  EXPECT_EQ(s.size(), 6u);
  const auto e = enumerate(s);
  EXPECT_EQ(e.candidates.size(), 6u);
  EXPECT_EQ(e.excluded, 0u);
  // Last axis (alphabetically: tau_m) varies fastest.
  EXPECT_EQ(e.candidates[0].tau_m, 10.0);
  EXPECT_EQ(e.candidates[1].tau_m, 20.0);
  EXPECT_EQ(e.candidates[3].a_plus, 1e-2);
}

TEST(Space, InvalidCombinationsAreExcludedAndCounted) {
  SearchSpace s;
  s.grids["v_thresh"] = {GridValue::literal(-80), GridValue::literal(-50)};
  const auto e = enumerate(s);
  EXPECT_EQ(e.candidates.size(), 1u);
  EXPECT_EQ(e.excluded, 1u);
}

TEST(Space, EmptyAxisIsRejected) {
  SearchSpace s;
  s.grids["tau_m"] = {};
  EXPECT_THROW(s.size(), ConfigError);
}

TEST(Space, CapIsEnforced) {
  SearchSpace s;
  std::vector<GridValue> many(1001, GridValue::literal(1.0));
  s.grids["a_plus"] = many;
  s.grids["a_minus"] = many;
  EXPECT_THROW(s.size(), ConfigError);
}

TEST(Space, ReferencesResolveAgainstCandidate) {
  const auto s = parse_space(
      "exc_strength = 1, 8\n"
      "inh_strength = 10, 100*exc_strength\n");
  EXPECT_EQ(s.size(), 4u);
  const auto e = enumerate(s);
  ASSERT_EQ(e.candidates.size(), 4u);
  EXPECT_EQ(e.candidates[1].inh_strength, 100.0);
  EXPECT_EQ(e.candidates[3].exc_strength, 8.0);
  EXPECT_EQ(e.candidates[3].inh_strength, 800.0);
  EXPECT_THROW(parse_space("inh_strength = 100*bogus\n"), DataError);
  EXPECT_THROW(parse_space("bogus = 1\n"), DataError);
}

TEST(Space, DefaultCalibrationSpaceHasTenThreeValueAxes) {
  const SearchSpace s = default_calibration_space(default_params());
  EXPECT_EQ(s.grids.size(), 10u);
  EXPECT_EQ(s.size(), 59049u);
  for (const auto& [name, values] : s.grids) EXPECT_EQ(values.size(), 3u) << name;
}

TEST(ShippedConfigs, ParseAndValidate) {
  const std::filesystem::path dir = MEASIM_CONFIG_DIR;
  const SimParams table = load_params(dir / "published.cfg");
  EXPECT_EQ(table, default_params());
  const SimParams tuned = load_params(dir / "tuned.cfg");
  EXPECT_EQ(tuned.exc_strength, 8.0);
  EXPECT_EQ(tuned.inh_strength, 100.0 * tuned.exc_strength);
  EXPECT_TRUE(validate(tuned).empty());
  EXPECT_EQ(load_space(dir / "calibration_space.cfg").size(), 81u);
  EXPECT_EQ(load_space(dir / "digit_space.cfg").size(), 10u);
}

}  // namespace
}  // namespace measim
