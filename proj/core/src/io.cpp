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

#include "measim/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "measim/error.hpp"

namespace measim {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = line.find(sep);
    out.emplace_back(trim(line.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    line = line.substr(pos + 1);
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataError::Kind::kIo, "cannot write " + path.string());
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::int64_t parse_int(std::string_view text) {
  text = trim(text);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError(DataError::Kind::kFormat, "invalid integer '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError(DataError::Kind::kFormat, "invalid number '" + std::string(text) + "'");
  }
  return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
  CsvTable t;
  bool have_header = false;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError(DataError::Kind::kFormat, path.string() + ":" + std::to_string(line_no) +
                                                    ": expected " +
                                                    std::to_string(t.header.size()) + " columns");
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError(DataError::Kind::kFormat, path.string() + ": empty CSV");
  return t;
}

void write_traces_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                      const std::vector<ResponseTrace>& traces, bool with_time) {
  if (names.size() != traces.size() || traces.empty()) {
    throw ConfigError("trace names and traces differ in length");
  }
  auto out = open_out(path);
  bool first = true;
  if (with_time) {
    out << "t_ms";
    first = false;
  }
  for (const auto& n : names) {
    out << (first ? "" : ",") << n;
    first = false;
  }
  out << '\n';
  for (std::size_t b = 0; b < traces.front().values.size(); ++b) {
    first = true;
    if (with_time) {
      out << format_number(static_cast<double>(b) * traces.front().bin_ms);
      first = false;
    }
    for (const auto& t : traces) {
      out << (first ? "" : ",") << format_number(t.values.at(b));
      first = false;
    }
    out << '\n';
  }
}

void save_spike_record(const std::filesystem::path& path, const SpikeRecord& record) {
  {
    auto out = open_out(path);
    out << "time_ms,neuron\n";
    for (const auto& s : record.spikes) out << format_number(record.time_ms(s)) << ',' << s.neuron << '\n';
  }
  auto meta = open_out(path.string() + ".meta");
  meta << "dt = " << format_number(record.dt) << '\n'
       << "duration_ms = " << format_number(record.duration_ms) << '\n'
       << "seed = " << record.seed << '\n'
       << "params_digest = " << record.params_digest << '\n';
}

SpikeRecord load_spike_record(const std::filesystem::path& path) {
  SpikeRecord r;
  for (const auto& line : read_lines(path.string() + ".meta")) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    if (key == "dt") r.dt = parse_double(value);
    else if (key == "duration_ms") r.duration_ms = parse_double(value);
    else if (key == "seed") r.seed = static_cast<std::uint64_t>(parse_int(value));
    else if (key == "params_digest") r.params_digest = std::string(value);
  }
  const auto table = read_csv(path);
  if (table.header != std::vector<std::string>{"time_ms", "neuron"}) {
    throw DataError(DataError::Kind::kFormat, path.string() + ": expected header time_ms,neuron");
  }
  for (const auto& row : table.rows) {
    const double t = parse_double(row[0]);
    r.spikes.push_back({std::llround(t / r.dt), static_cast<std::uint32_t>(parse_int(row[1]))});
  }
  if (!std::is_sorted(r.spikes.begin(), r.spikes.end())) {
    throw DataError(DataError::Kind::kFormat, path.string() + ": spikes are not time-sorted");
  }
  return r;
}

void save_program(const std::filesystem::path& path, const StimulusProgram& program) {
  auto out = open_out(path);
  out << "duration_ms=" << format_number(program.duration_ms) << '\n' << "time_ms,row,col\n";
  for (const auto& e : program.events) {
    out << format_number(e.time_ms) << ',' << e.electrode.row << ',' << e.electrode.col << '\n';
  }
}

StimulusProgram load_program(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 2 || lines[0].rfind("duration_ms=", 0) != 0) {
    throw DataError(DataError::Kind::kFormat, path.string() + ": expected duration_ms= header");
  }
  if (trim(lines[1]) != "time_ms,row,col") {
    throw DataError(DataError::Kind::kFormat, path.string() + ": expected header time_ms,row,col");
  }
  StimulusProgram p;
  p.duration_ms = parse_double(std::string_view(lines[0]).substr(12));
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split(lines[i], ',');
    if (cells.size() != 3) {
      throw DataError(DataError::Kind::kFormat,
                      path.string() + ":" + std::to_string(i + 1) + ": expected 3 columns");
    }
    p.events.push_back({parse_double(cells[0]),
                        {static_cast<int>(parse_int(cells[1])), static_cast<int>(parse_int(cells[2]))}});
  }
  try {
    check_program(p);
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::kFormat, path.string() + ": " + e.what());
  }
  return p;
}

void save_tetanization_report(const std::filesystem::path& path, const TetanizationResult& result) {
  auto out = open_out(path);
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("undefined"); };
  out << "[summary]\n"
      << "repetitions = " << result.reports.size() << '\n'
      << "selectivity_pre_mean = " << format_number(result.selectivity_pre.mean) << '\n'
      << "selectivity_pre_ci95 = " << opt(result.selectivity_pre.half_width) << '\n'
      << "selectivity_post_mean = " << format_number(result.selectivity_post.mean) << '\n'
      << "selectivity_post_ci95 = " << opt(result.selectivity_post.half_width) << '\n';
  for (std::size_t r = 0; r < result.reports.size(); ++r) {
    const auto& rep = result.reports[r];
    out << "\n[repetition." << r << "]\n" << "seed = " << rep.seed << '\n';
    for (std::size_t c = 0; c < 4; ++c) {
      out << "response_" << kConditionNames[c] << " = "
          << format_number(rep.response(static_cast<ProbeCondition>(c))) << '\n';
    }
    out << "selectivity_pre = " << opt(rep.selectivity_pre()) << '\n'
        << "selectivity_post = " << opt(rep.selectivity_post()) << '\n';
  }
  out << "\n[mean_traces]\n" << "t_ms";
  for (auto n : kConditionNames) out << ',' << n;
  out << '\n';
  for (std::size_t b = 0; b < result.mean_traces[0].values.size(); ++b) {
    out << format_number(static_cast<double>(b) * result.mean_traces[0].bin_ms);
    for (const auto& t : result.mean_traces) out << ',' << format_number(t.values[b]);
    out << '\n';
  }
}

void save_evaluation_report(const std::filesystem::path& path, const Evaluation& ev,
                            std::size_t train_samples) {
  auto out = open_out(path);
  out << "[evaluation]\n"
      << "train_samples = " << train_samples << '\n'
      << "test_samples = " << ev.total << '\n'
      << "correct = " << ev.correct << '\n'
      << "accuracy = " << format_number(ev.accuracy()) << '\n'
      << "ties = " << ev.ties << '\n'
      << "output_group_0 = " << ev.group_sizes[0] << '\n'
      << "output_group_1 = " << ev.group_sizes[1] << '\n'
      << "\n[confusion]\n" << "label,pred0,pred1\n";
  for (std::size_t l = 0; l < 2; ++l) {
    out << l << ',' << ev.confusion[l][0] << ',' << ev.confusion[l][1] << '\n';
  }
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::kIo, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ull;
    }
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return out;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs[path.string()] = file_digest(path);
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  auto out = open_out(path);
  out << "[run]\n" << "command = " << m.command << '\n'
      << "wall_seconds = " << format_number(m.wall_seconds) << '\n' << "seeds =";
  for (std::size_t i = 0; i < m.seeds.size(); ++i) out << (i ? ", " : " ") << m.seeds[i];
  out << "\n\n[options]\n";
  for (const auto& [k, v] : m.options) out << k << " = " << v << '\n';
  out << "\n[inputs]\n";
  for (const auto& [k, v] : m.inputs) out << k << " = " << v << '\n';
  out << "\n[outputs]\n";
  for (const auto& o : m.outputs) out << o << '\n';
  out << "\n[params]\n" << serialize(m.params);
}

}  // namespace measim
