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

#include "measim/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "measim/error.hpp"
#include "measim/io.hpp"
#include "measim/parallel.hpp"

namespace measim {

void check_target(const CalibrationTarget& target) {
  for (const auto& t : target.traces) {
    if (t.bin_ms != 10.0 || t.window_ms != 150.0 || t.values.size() != 15) {
      throw ConfigError("calibration traces must have 15 bins of 10 ms");
    }
  }
}

void rank(SweepResult& result) {
  const bool minimize = result.direction == Objective::kMinimize;
  std::stable_sort(result.entries.begin(), result.entries.end(),
                   [minimize](const SweepEntry& a, const SweepEntry& b) {
                     const bool fa = std::isfinite(a.objective);
                     const bool fb = std::isfinite(b.objective);
                     if (fa != fb) return fa;
                     if (!fa) return false;
                     return minimize ? a.objective < b.objective : a.objective > b.objective;
                   });
}

CalibrationTarget synthesize_target(const SimParams& params, std::span<const std::uint64_t> seeds,
                                    const TetanizationOptions& options) {
  const auto result = tetanization_experiment(params, seeds, options);
  CalibrationTarget t;
  t.traces = result.mean_traces;
  return t;
}

SweepResult calibrate(const SearchSpace& space, const CalibrationTarget& target,
                      const CalibrateOptions& options) {
  check_target(target);
  if (options.seeds.empty()) throw ConfigError("calibration needs at least one seed");
  auto candidates = enumerate(space);
  if (candidates.candidates.empty()) throw ConfigError("search space has no valid candidates");

  SweepResult result;
  result.direction = Objective::kMinimize;
  result.excluded = candidates.excluded;
  result.entries.resize(candidates.candidates.size());
  // Parallelism is across candidates; each experiment then runs its
  // repetitions serially inside the worker.
  parallel_for(result.entries.size(), [&](std::size_t c) {
    auto& entry = result.entries[c];
    entry.params = candidates.candidates[c];
    entry.reps = options.seeds.size();
    try {
      const auto exp = tetanization_experiment(entry.params, options.seeds, options.tetanization);
      double obj = 0.0;
      for (std::size_t k = 0; k < 4; ++k) obj += mse(exp.mean_traces[k], target.traces[k]);
      entry.objective = std::isfinite(obj) ? obj : std::numeric_limits<double>::infinity();
    } catch (const Error& e) {
      entry.objective = std::numeric_limits<double>::infinity();
      entry.error = e.what();
    }
  });
  rank(result);
  return result;
}

SweepResult accuracy_sweep(const SearchSpace& space, std::span<const DigitImage> trainset,
                           std::span<const DigitImage> testset, const AccuracyOptions& options) {
  if (trainset.empty() || testset.empty()) throw ConfigError("accuracy sweep needs data");
  if (options.seeds.empty()) throw ConfigError("accuracy sweep needs at least one seed");
  auto candidates = enumerate(space);
  if (candidates.candidates.empty()) throw ConfigError("search space has no valid candidates");
  if (std::find(candidates.candidates.begin(), candidates.candidates.end(), space.base) ==
      candidates.candidates.end()) {
    require_valid(space.base);
    candidates.candidates.insert(candidates.candidates.begin(), space.base);
  }

  SweepResult result;
  result.direction = Objective::kMaximize;
  result.excluded = candidates.excluded;
  result.entries.resize(candidates.candidates.size());
  const std::size_t reps = options.seeds.size();
  std::vector<double> acc(result.entries.size() * reps, 0.0);
  std::vector<std::string> errors(acc.size());
  parallel_for(acc.size(), [&](std::size_t job) {
    SimParams p = candidates.candidates[job / reps];
    p.seed = options.seeds[job % reps];
    try {
      Culture culture = generate_culture(p);
      train_digits(culture, trainset);
      acc[job] = evaluate(culture, testset).accuracy();
    } catch (const Error& e) {
      acc[job] = std::numeric_limits<double>::quiet_NaN();
      errors[job] = e.what();
    }
  });
  for (std::size_t c = 0; c < result.entries.size(); ++c) {
    auto& entry = result.entries[c];
    entry.params = candidates.candidates[c];
    entry.reps = reps;
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      sum += acc[c * reps + r];
      if (entry.error.empty()) entry.error = errors[c * reps + r];
    }
    entry.objective = std::isfinite(sum) ? sum / static_cast<double>(reps)
                                         : -std::numeric_limits<double>::infinity();
  }
  rank(result);
  return result;
}

CalibrationTarget load_target(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  if (table.header != std::vector<std::string>{"regL_pre", "upsL_pre", "regL_post", "upsL_post"}) {
    throw DataError(DataError::Kind::kFormat,
                    path.string() + ": expected header regL_pre,upsL_pre,regL_post,upsL_post");
  }
  CalibrationTarget t;
  for (auto& tr : t.traces) tr = ResponseTrace{10.0, 150.0, {}};
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < 4; ++k) t.traces[k].values.push_back(parse_double(row[k]));
  }
  try {
    check_target(t);
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::kFormat, path.string() + ": " + e.what());
  }
  return t;
}

void save_target(const std::filesystem::path& path, const CalibrationTarget& target) {
  write_traces_csv(path, {"regL_pre", "upsL_pre", "regL_post", "upsL_post"},
                   {target.traces.begin(), target.traces.end()}, /*with_time=*/false);
}

void save_sweep(const std::filesystem::path& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError(DataError::Kind::kIo, "cannot write " + path.string());
  out << "rank";
  for (auto name : param_field_names()) out << ',' << name;
  out << ",reps,objective,error\n";
  std::size_t r = 1;
  for (const auto& e : result.entries) {
    out << r++;
    for (auto name : param_field_names()) {
      if (name == "seed") {
        out << ',' << e.params.seed;
      } else {
        out << ',' << format_number(get_field(e.params, name));
      }
    }
    out << ',' << e.reps << ',' << format_number(e.objective) << ',';
    std::string err = e.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << err << '\n';
  }
}

}  // namespace measim
