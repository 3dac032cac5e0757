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

#include "measim/protocols.hpp"

#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "measim/error.hpp"
#include "measim/parallel.hpp"
#include "measim/rng.hpp"

namespace measim {
namespace {

std::atomic<unsigned> g_threads{0};

std::optional<double> ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return std::nullopt;
}

}  // namespace

void set_worker_threads(unsigned threads) { g_threads = threads; }

unsigned worker_threads() {
  const unsigned t = g_threads.load();
  if (t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

ResponseTrace binned_response(const SpikeRecord& record, std::size_t n_neurons, double bin_ms,
                              double window_ms) {
  if (record.duration_ms + 1e-9 < window_ms) {
    throw ConfigError("record covers " + std::to_string(record.duration_ms) +
                      " ms, shorter than the " + std::to_string(window_ms) + " ms window");
  }
  if (n_neurons == 0) throw ConfigError("binned_response needs at least one neuron");
  const double bins_exact = window_ms / bin_ms;
  const auto bins = static_cast<std::size_t>(std::llround(bins_exact));
  if (std::abs(bins_exact - static_cast<double>(bins)) > 1e-9) {
    throw ConfigError("window is not a whole number of bins");
  }
  ResponseTrace trace{bin_ms, window_ms, std::vector<double>(bins, 0.0)};
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& s : record.spikes) {
    const double t = record.time_ms(s);
    if (t < 0 || t >= window_ms) continue;
    // Spike times are multiples of dt; the small offset keeps bin edges exact.
    const auto b = static_cast<std::size_t>(std::floor(t / bin_ms + 1e-9));
    if (b < bins) ++counts[b];
  }
  for (std::size_t b = 0; b < bins; ++b) {
    trace.values[b] = static_cast<double>(counts[b]) / static_cast<double>(n_neurons);
  }
  return trace;
}

double mse(const ResponseTrace& a, const ResponseTrace& b) {
  if (a.bin_ms != b.bin_ms || a.window_ms != b.window_ms || a.values.size() != b.values.size()) {
    throw ConfigError("trace shapes differ");
  }
  if (a.values.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.values.size());
}

double response_strength(const ResponseTrace& trace, double onset_ms) {
  const auto first = static_cast<std::size_t>(std::floor(onset_ms / trace.bin_ms + 1e-9));
  double sum = 0.0;
  for (std::size_t b = first; b < trace.values.size(); ++b) sum += trace.values[b];
  return sum;
}

ResponseTrace mean_trace(std::span<const ResponseTrace> traces) {
  if (traces.empty()) throw ConfigError("mean of zero traces");
  ResponseTrace out = traces.front();
  for (std::size_t t = 1; t < traces.size(); ++t) {
    if (traces[t].values.size() != out.values.size()) throw ConfigError("trace shapes differ");
    for (std::size_t b = 0; b < out.values.size(); ++b) out.values[b] += traces[t].values[b];
  }
  for (auto& v : out.values) v /= static_cast<double>(traces.size());
  return out;
}

AggregateResult aggregate(std::span<const double> values) {
  AggregateResult r;
  r.values.assign(values.begin(), values.end());
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  r.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(n);
  return r;
}

// --- tetanization -----------------------------------------------------------

std::optional<double> TetanizationReport::selectivity_pre() const {
  return ratio(response(ProbeCondition::kRegPre), response(ProbeCondition::kUpsPre));
}

std::optional<double> TetanizationReport::selectivity_post() const {
  return ratio(response(ProbeCondition::kRegPost), response(ProbeCondition::kUpsPost));
}

std::array<ResponseTrace, 2> probe_both(const Culture& culture) {
  std::array<ResponseTrace, 2> out;
  const std::array<LPattern, 2> kinds{LPattern::kRegular, LPattern::kUpsideDown};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto record = run(culture, probe_program(l_pattern(kinds[i])), kProbeWindowMs);
    out[i] = binned_response(record, culture.size());
  }
  return out;
}

TetanizationReport tetanize(Culture& culture, const TetanizationOptions& options) {
  TetanizationReport report;
  report.seed = culture.params.seed;
  const auto pre = probe_both(culture);
  report.traces[0] = pre[0];
  report.traces[1] = pre[1];

  if (options.trains > 0) {
    Simulator sim(culture);
    sim.set_plasticity(true);
    const auto train = tetanization_program(l_pattern(LPattern::kRegular), options.train);
    for (int t = 0; t < options.trains; ++t) sim.advance(train, train.duration_ms);
  }

  const auto post = probe_both(culture);
  report.traces[2] = post[0];
  report.traces[3] = post[1];
  return report;
}

std::vector<std::uint64_t> repetition_seeds(std::uint64_t base, int reps) {
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < reps; ++r) seeds.push_back(derive_seed(base, static_cast<std::uint64_t>(r)));
  return seeds;
}

TetanizationResult tetanization_experiment(const SimParams& params,
                                           std::span<const std::uint64_t> seeds,
                                           const TetanizationOptions& options) {
  require_valid(params);
  if (seeds.empty()) throw ConfigError("tetanization experiment needs at least one repetition");
  TetanizationResult result;
  result.reports.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t r) {
    SimParams p = params;
    p.seed = seeds[r];
    Culture culture = generate_culture(p);
    result.reports[r] = tetanize(culture, options);
  });

  std::vector<double> pre, post;
  for (const auto& rep : result.reports) {
    if (auto s = rep.selectivity_pre()) pre.push_back(*s);
    if (auto s = rep.selectivity_post()) post.push_back(*s);
  }
  result.selectivity_pre = aggregate(pre);
  result.selectivity_post = aggregate(post);
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<ResponseTrace> traces;
    for (const auto& rep : result.reports) traces.push_back(rep.traces[c]);
    result.mean_traces[c] = mean_trace(traces);
  }
  return result;
}

TetanizationResult tetanization_experiment(const SimParams& params, int reps,
                                           const TetanizationOptions& options) {
  const auto seeds = repetition_seeds(params.seed, reps);
  return tetanization_experiment(params, seeds, options);
}

// --- digit recognition ------------------------------------------------------

OutputGroups output_groups(const Culture& culture) {
  OutputGroups g;
  for (int label = 0; label < 2; ++label) {
    const auto electrodes = label_electrodes(label);
    g.members[static_cast<std::size_t>(label)] =
        neurons_near(culture.placement, electrodes, kOutputRadiusMm);
  }
  return g;
}

ClassifierReadout decide(std::size_t count0, std::size_t count1) {
  ClassifierReadout r;
  r.counts = {count0, count1};
  r.tie = count0 == count1;
  r.predicted = count1 > count0 ? 1 : 0;
  return r;
}

void train_digits(Culture& culture, std::span<const DigitImage> trainset) {
  if (trainset.empty()) throw ConfigError("training set is empty");
  Simulator sim(culture);
  sim.set_plasticity(true);
  const double dt = culture.params.dt;
  const StimulusProgram silence{{}, kRelaxationMs};
  for (const auto& img : trainset) {
    const auto program = merge({encode_digit(img, dt), teacher_program(img.label)});
    sim.advance(program, kPresentationMs);
    sim.advance(silence, kRelaxationMs);
  }
}

ClassifierReadout classify(const Culture& culture, const OutputGroups& groups,
                           const DigitImage& image) {
  const auto record = run(culture, encode_digit(image, culture.params.dt), kPresentationMs);
  std::vector<std::uint8_t> group(culture.size(), 0);
  for (auto j : groups.members[0]) group[j] = 1;
  for (auto j : groups.members[1]) group[j] = 2;
  std::array<std::size_t, 2> counts{};
  for (const auto& s : record.spikes) {
    if (group[s.neuron]) ++counts[group[s.neuron] - 1u];
  }
  return decide(counts[0], counts[1]);
}

ClassifierReadout classify(const Culture& culture, const DigitImage& image) {
  return classify(culture, output_groups(culture), image);
}

Evaluation evaluate(const Culture& culture, std::span<const DigitImage> testset) {
  if (testset.empty()) throw ConfigError("test set is empty");
  const auto groups = output_groups(culture);
  std::vector<ClassifierReadout> readouts(testset.size());
  parallel_for(testset.size(),
               [&](std::size_t i) { readouts[i] = classify(culture, groups, testset[i]); });
  Evaluation ev;
  ev.group_sizes = {groups.members[0].size(), groups.members[1].size()};
  for (std::size_t i = 0; i < testset.size(); ++i) {
    const int label = testset[i].label;
    const auto& r = readouts[i];
    ++ev.total;
    if (r.tie) ++ev.ties;
    if (r.predicted == label) ++ev.correct;
    ++ev.confusion[static_cast<std::size_t>(label)][static_cast<std::size_t>(r.predicted)];
  }
  return ev;
}

}  // namespace measim
