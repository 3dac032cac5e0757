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

// measim: command-line driver for culture generation, stimulation protocols,
// parameter search and digit-recognition experiments.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 input-data error,
// 3 simulation failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif

#include "measim/config.hpp"
#include "measim/culture.hpp"
#include "measim/engine.hpp"
#include "measim/error.hpp"
#include "measim/io.hpp"
#include "measim/mnist.hpp"
#include "measim/protocols.hpp"
#include "measim/search.hpp"
#include "measim/snapshot.hpp"

namespace fs = std::filesystem;
using namespace measim;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInputData = 2, kSimulation = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string params_file;
  std::optional<std::uint64_t> seed;
  double scale = 1.0;
  std::string out_dir;
  unsigned threads = 0;
};

struct Args {
  Common common;
  std::string culture_file;
  std::string program_file;
  std::string space_file;
  std::string target_file;
  std::string spikes_file;
  std::string mnist_dir;
  double duration_ms = 0.0;
  bool plastic = false;
  int reps = 4;
  int trains = 40;
  std::size_t limit_train = 0;
  std::size_t limit_test = 0;
  std::size_t neurons = 0;
};

SimParams resolve_params(const Common& c, RunManifest& m) {
  SimParams p = default_params();
  if (!c.params_file.empty()) {
    p = load_params(c.params_file);
    m.add_input(c.params_file);
  }
  if (c.scale != 1.0) p = scaled(p, c.scale);
  if (c.seed) p.seed = *c.seed;
  require_valid(p);
  return p;
}

Culture culture_from_args(const Args& a, RunManifest& m) {
  if (!a.culture_file.empty()) {
    if (!a.common.params_file.empty() || a.common.scale != 1.0 || a.common.seed) {
      throw UsageError("--culture carries its own parameters; drop --params/--scale/--seed");
    }
    m.add_input(a.culture_file);
    Culture c = load_culture(a.culture_file);
    m.params = c.params;
    return c;
  }
  m.params = resolve_params(a.common, m);
  return generate_culture(m.params);
}

fs::path out_path(const Common& c, RunManifest& m, const std::string& name) {
  m.outputs.push_back(name);
  return fs::path(c.out_dir) / name;
}

std::vector<DigitImage> load_split(const Args& a, Split split, std::size_t limit, RunManifest& m) {
  if (a.mnist_dir.empty()) throw UsageError("--mnist DIR is required");
  const std::string prefix = split == Split::kTrain ? "train" : "t10k";
  m.add_input(fs::path(a.mnist_dir) / (prefix + "-images-idx3-ubyte"));
  m.add_input(fs::path(a.mnist_dir) / (prefix + "-labels-idx1-ubyte"));
  auto ds = load_dataset(a.mnist_dir, split, limit);
  if (ds.images.empty()) throw DataError(DataError::Kind::kFormat, "no 0/1 digits in " + a.mnist_dir);
  return std::move(ds.images);
}

SearchSpace space_from_args(const Args& a, const SimParams& base, RunManifest& m, bool required) {
  if (a.space_file.empty()) {
    if (required) throw UsageError("--space FILE is required");
    return default_calibration_space(base);
  }
  m.add_input(a.space_file);
  return load_space(a.space_file, base);
}

// --- commands ---------------------------------------------------------------------

void cmd_generate(const Args& a, RunManifest& m) {
  m.params = resolve_params(a.common, m);
  m.seeds = {m.params.seed};
  ConnectivityReport rep;
  const Culture c = generate_culture(m.params, &rep);
  save_culture(out_path(a.common, m, "culture.bin"), c);
  m.options["synapses"] = std::to_string(c.synapses.size());
  m.options["mean_in_degree_exc"] = format_number(rep.mean_in_degree[0]);
  m.options["mean_in_degree_inh"] = format_number(rep.mean_in_degree[1]);
}

void cmd_run(const Args& a, RunManifest& m) {
  if (a.program_file.empty()) throw UsageError("--program FILE is required");
  Culture c = culture_from_args(a, m);
  m.seeds = {c.params.seed};
  m.add_input(a.program_file);
  const auto program = load_program(a.program_file);
  const double duration = a.duration_ms > 0 ? a.duration_ms : program.duration_ms;
  auto record = run(c, program, duration, a.plastic ? Plasticity::kOn : Plasticity::kOff);
  record.seed = c.params.seed;
  record.params_digest = params_digest(c.params);
  save_spike_record(out_path(a.common, m, "spikes.csv"), record);
  m.outputs.push_back("spikes.csv.meta");
  if (a.plastic) save_culture(out_path(a.common, m, "culture.bin"), c);
  m.options["plasticity"] = a.plastic ? "on" : "off";
  m.options["duration_ms"] = format_number(duration);
}

void cmd_tetanize(const Args& a, RunManifest& m) {
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  m.params = resolve_params(a.common, m);
  m.seeds = repetition_seeds(m.params.seed, a.reps);
  TetanizationOptions opt;
  opt.trains = a.trains;
  const auto result = tetanization_experiment(m.params, m.seeds, opt);
  save_tetanization_report(out_path(a.common, m, "report.txt"), result);
  const std::vector<std::string> names(kConditionNames.begin(), kConditionNames.end());
  for (std::size_t r = 0; r < result.reports.size(); ++r) {
    const auto& t = result.reports[r].traces;
    write_traces_csv(out_path(a.common, m, "traces_rep" + std::to_string(r) + ".csv"), names,
                     {t.begin(), t.end()});
  }
  write_traces_csv(out_path(a.common, m, "mean_traces.csv"), names,
                   {result.mean_traces.begin(), result.mean_traces.end()});
  m.options["reps"] = std::to_string(a.reps);
  m.options["trains"] = std::to_string(a.trains);
}

void cmd_calibrate(const Args& a, RunManifest& m) {
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  m.params = resolve_params(a.common, m);
  m.seeds = repetition_seeds(m.params.seed, a.reps);
  const SearchSpace space = space_from_args(a, m.params, m, false);
  TetanizationOptions opt;
  opt.trains = a.trains;
  CalibrationTarget target;
  if (a.target_file.empty()) {
    // Self-consistency mode: the target is synthesized at the base point on
    // the sweep's own seeds.
    target = synthesize_target(m.params, m.seeds, opt);
    save_target(out_path(a.common, m, "target.csv"), target);
    m.options["target"] = "synthesized";
  } else {
    m.add_input(a.target_file);
    target = load_target(a.target_file);
  }
  const auto result = calibrate(space, target, CalibrateOptions{m.seeds, opt});
  save_sweep(out_path(a.common, m, "sweep.csv"), result);
  save_params(out_path(a.common, m, "best.cfg"), result.best().params);
  m.options["candidates"] = std::to_string(result.entries.size());
  m.options["excluded"] = std::to_string(result.excluded);
  m.options["best_objective"] = format_number(result.best().objective);
}

void cmd_train(const Args& a, RunManifest& m) {
  Culture c = culture_from_args(a, m);
  m.seeds = {c.params.seed};
  const auto train = load_split(a, Split::kTrain, a.limit_train, m);
  train_digits(c, train);
  save_culture(out_path(a.common, m, "culture.bin"), c);
  m.options["train_samples"] = std::to_string(train.size());
}

void cmd_eval(const Args& a, RunManifest& m) {
  if (a.culture_file.empty()) {
    throw UsageError("eval needs a trained culture: --culture FILE (see `measim train`)");
  }
  const Culture c = culture_from_args(a, m);
  m.seeds = {c.params.seed};
  const auto test = load_split(a, Split::kTest, a.limit_test, m);
  const auto ev = evaluate(c, test);
  save_evaluation_report(out_path(a.common, m, "evaluation.txt"), ev, 0);
  m.options["accuracy"] = format_number(ev.accuracy());
  m.options["test_samples"] = std::to_string(ev.total);
  std::printf("accuracy %s (%zu/%zu, %zu ties)\n", format_number(ev.accuracy()).c_str(), ev.correct,
              ev.total, ev.ties);
}

void cmd_sweep(const Args& a, RunManifest& m) {
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  m.params = resolve_params(a.common, m);
  m.seeds = repetition_seeds(m.params.seed, a.reps);
  const SearchSpace space = space_from_args(a, m.params, m, true);
  const auto train = load_split(a, Split::kTrain, a.limit_train, m);
  const auto test = load_split(a, Split::kTest, a.limit_test, m);
  const auto result = accuracy_sweep(space, train, test, AccuracyOptions{m.seeds});
  save_sweep(out_path(a.common, m, "sweep.csv"), result);
  save_params(out_path(a.common, m, "best.cfg"), result.best().params);
  m.options["candidates"] = std::to_string(result.entries.size());
  m.options["best_accuracy"] = format_number(result.best().objective);
  m.options["train_samples"] = std::to_string(train.size());
  m.options["test_samples"] = std::to_string(test.size());
}

void cmd_traces(const Args& a, RunManifest& m) {
  if (a.spikes_file.empty()) throw UsageError("--spikes FILE is required");
  std::size_t n = a.neurons;
  if (n == 0) {
    if (!a.culture_file.empty()) {
      m.add_input(a.culture_file);
      n = load_culture(a.culture_file).size();
    } else {
      n = static_cast<std::size_t>(resolve_params(a.common, m).n_neurons);
    }
  }
  m.add_input(a.spikes_file);
  const auto record = load_spike_record(a.spikes_file);
  m.seeds = {record.seed};
  const auto trace = binned_response(record, n);
  write_traces_csv(out_path(a.common, m, "traces.csv"), {"response"}, {trace});
  m.options["neurons"] = std::to_string(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measim: simulated neuronal cultures on a 6x10 multi-electrode array"};
  app.require_subcommand(1);
  Args a;

  auto add_common = [&](CLI::App* sub, bool params) {
    if (params) {
      sub->add_option("--params", a.common.params_file, "Parameter file (key = value)");
      sub->add_option("--seed", a.common.seed, "Base seed");
      sub->add_option("--scale", a.common.scale, "Scale n_neurons, k_exc, k_inh by F")
          ->check(CLI::PositiveNumber);
    }
    sub->add_option("--out", a.common.out_dir, "Output directory")->required();
    sub->add_option("--threads", a.common.threads, "Worker threads (0 = hardware)");
  };

  auto* gen = app.add_subcommand("generate", "Generate a culture snapshot");
  add_common(gen, true);

  auto* run_cmd = app.add_subcommand("run", "Run a stimulus program on a culture");
  add_common(run_cmd, true);
  run_cmd->add_option("--culture", a.culture_file, "Culture snapshot");
  run_cmd->add_option("--program", a.program_file, "Program CSV");
  run_cmd->add_option("--duration", a.duration_ms, "Run length in ms (default: program duration)");
  run_cmd->add_flag("--plastic", a.plastic, "Enable STDP and save the updated culture");

  auto* tet = app.add_subcommand("tetanize", "Probe, tetanize with regL, probe again");
  add_common(tet, true);
  tet->add_option("--reps", a.reps, "Independent repetitions")->capture_default_str();
  tet->add_option("--trains", a.trains, "Tetanization trains")->capture_default_str();

  auto* cal = app.add_subcommand("calibrate", "Grid search against a response target");
  add_common(cal, true);
  cal->add_option("--space", a.space_file, "Search-space file (default: built-in ranges)");
  cal->add_option("--target", a.target_file, "Target traces CSV (default: synthesize at base)");
  cal->add_option("--reps", a.reps, "Seeds per candidate")->capture_default_str();
  cal->add_option("--trains", a.trains, "Tetanization trains")->capture_default_str();

  auto* train = app.add_subcommand("train", "Train a culture on MNIST 0/1 digits");
  add_common(train, true);
  train->add_option("--culture", a.culture_file, "Start from this snapshot");
  train->add_option("--mnist", a.mnist_dir, "Directory with IDX files");
  train->add_option("--limit-train", a.limit_train, "Use at most N training samples");

  auto* ev = app.add_subcommand("eval", "Evaluate a trained culture");
  add_common(ev, false);
  ev->add_option("--culture", a.culture_file, "Trained culture snapshot");
  ev->add_option("--mnist", a.mnist_dir, "Directory with IDX files");
  ev->add_option("--limit-test", a.limit_test, "Use at most N test samples");

  auto* sw = app.add_subcommand("sweep", "Accuracy grid search");
  add_common(sw, true);
  sw->add_option("--space", a.space_file, "Search-space file");
  sw->add_option("--mnist", a.mnist_dir, "Directory with IDX files");
  sw->add_option("--limit-train", a.limit_train, "Use at most N training samples");
  sw->add_option("--limit-test", a.limit_test, "Use at most N test samples");
  sw->add_option("--reps", a.reps, "Seeds per candidate")->capture_default_str();

  auto* tr = app.add_subcommand("traces", "Re-bin a spike record into a response trace");
  add_common(tr, true);
  tr->add_option("--spikes", a.spikes_file, "Spike CSV written by `run`");
  tr->add_option("--culture", a.culture_file, "Snapshot giving the neuron count");
  tr->add_option("--neurons", a.neurons, "Neuron count (overrides --culture/--params)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const std::vector<std::pair<std::string, void (*)(const Args&, RunManifest&)>> commands{
      {"generate", cmd_generate}, {"run", cmd_run},     {"tetanize", cmd_tetanize},
      {"calibrate", cmd_calibrate}, {"train", cmd_train}, {"eval", cmd_eval},
      {"sweep", cmd_sweep},       {"traces", cmd_traces}};

  RunManifest manifest;
  manifest.command = name;
  for (int i = 1; i < argc; ++i) manifest.options["argv"] += (i > 1 ? " " : "") + std::string(argv[i]);
  const auto t0 = std::chrono::steady_clock::now();
  int rc = kOk;
  try {
    std::error_code ec;
    fs::create_directories(a.common.out_dir, ec);
    if (ec) throw DataError(DataError::Kind::kIo, "cannot create " + a.common.out_dir);
    set_worker_threads(a.common.threads);
    for (const auto& [cmd, fn] : commands) {
      if (cmd == name) fn(a, manifest);
    }
  } catch (const UsageError& e) {
    std::cerr << "measim " << name << ": " << e.what() << "\n\n" << app.get_subcommand(name)->help();
    rc = kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "measim " << name << ": configuration error: " << e.what() << '\n';
    rc = kUsage;
  } catch (const DataError& e) {
    std::cerr << "measim " << name << ": input data error: " << e.what() << '\n';
    rc = kInputData;
  } catch (const std::exception& e) {
    std::cerr << "measim " << name << ": simulation failure: " << e.what() << '\n';
    rc = kSimulation;
  }
  manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.options["exit_code"] = std::to_string(rc);
  if (fs::is_directory(a.common.out_dir)) {
    try {
      save_manifest(fs::path(a.common.out_dir) / "manifest.txt", manifest);
    } catch (const Error& e) {
      std::cerr << "measim: cannot write manifest: " << e.what() << '\n';
      if (rc == kOk) rc = kInputData;
    }
  }
  return rc;
}
