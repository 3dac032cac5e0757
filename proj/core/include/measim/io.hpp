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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "measim/engine.hpp"
#include "measim/protocols.hpp"
#include "measim/stimuli.hpp"

namespace measim {

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
// Throws DataError(kFormat).
double parse_double(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each row has header.size() cells
};

// Plain comma-separated values without quoting. Lines starting with '#' are
// skipped.
CsvTable read_csv(const std::filesystem::path& path);

// Columns: optional bin start time (`t_ms`) then one column per trace.
void write_traces_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                      const std::vector<ResponseTrace>& traces, bool with_time = true);

// `time_ms,neuron` rows plus a `<path>.meta` key=value sidecar with dt,
// duration_ms, seed and params_digest.
void save_spike_record(const std::filesystem::path& path, const SpikeRecord& record);
SpikeRecord load_spike_record(const std::filesystem::path& path);

// First line `duration_ms=<value>`, then header `time_ms,row,col` and one
// 1-based pulse per row.
void save_program(const std::filesystem::path& path, const StimulusProgram& program);
StimulusProgram load_program(const std::filesystem::path& path);

// key=value sections (`[section]`) followed by an embedded trace table.
void save_tetanization_report(const std::filesystem::path& path, const TetanizationResult& result);
void save_evaluation_report(const std::filesystem::path& path, const Evaluation& evaluation,
                            std::size_t train_samples);

// 16 hex digits of FNV-1a over the file bytes.
std::string file_digest(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  SimParams params;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> inputs;  // path -> digest
  std::vector<std::string> outputs;
  std::map<std::string, std::string> options;
  double wall_seconds = 0.0;

  void add_input(const std::filesystem::path& path);
};

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace measim
