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

#include "measim/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "measim/error.hpp"

namespace measim {
namespace {

enum class Kind { kReal, kCount, kSeed };

struct FieldInfo {
  std::string_view name;
  Kind kind;
  double SimParams::*real = nullptr;
  std::int64_t SimParams::*count = nullptr;
};

constexpr std::array<FieldInfo, 22> kFields{{
    {"v_rest", Kind::kReal, &SimParams::v_rest},
    {"v_thresh", Kind::kReal, &SimParams::v_thresh},
    {"v_reset", Kind::kReal, &SimParams::v_reset},
    {"t_refrac", Kind::kReal, &SimParams::t_refrac},
    {"tau_m", Kind::kReal, &SimParams::tau_m},
    {"tau_plus", Kind::kReal, &SimParams::tau_plus},
    {"tau_minus", Kind::kReal, &SimParams::tau_minus},
    {"a_plus", Kind::kReal, &SimParams::a_plus},
    {"a_minus", Kind::kReal, &SimParams::a_minus},
    {"exc_strength", Kind::kReal, &SimParams::exc_strength},
    {"inh_strength", Kind::kReal, &SimParams::inh_strength},
    {"sigma_e", Kind::kReal, &SimParams::sigma_e},
    {"sigma_i", Kind::kReal, &SimParams::sigma_i},
    {"n_neurons", Kind::kCount, nullptr, &SimParams::n_neurons},
    {"k_exc", Kind::kCount, nullptr, &SimParams::k_exc},
    {"k_inh", Kind::kCount, nullptr, &SimParams::k_inh},
    {"dt", Kind::kReal, &SimParams::dt},
    {"sigma_stim", Kind::kReal, &SimParams::sigma_stim},
    {"stim_amplitude", Kind::kReal, &SimParams::stim_amplitude},
    {"w_max_factor", Kind::kReal, &SimParams::w_max_factor},
    {"exc_frac", Kind::kReal, &SimParams::exc_frac},
    {"seed", Kind::kSeed},
}};

const FieldInfo* find_field(std::string_view name) {
  for (const auto& f : kFields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::string_view context) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw DataError(DataError::Kind::kFormat,
                    "invalid number '" + std::string(text) + "' for " + std::string(context));
  }
  return value;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// Splits text into (line number, key, value) triples, dropping comments and
// blank lines.
struct KeyValueLine {
  std::size_t line;
  std::string key;
  std::string value;
};

std::vector<KeyValueLine> split_key_values(std::string_view text) {
  std::vector<KeyValueLine> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(DataError::Kind::kFormat,
                      "line " + std::to_string(line_no) + ": expected key = value");
    }
    out.push_back({line_no, std::string(trim(line.substr(0, eq))),
                   std::string(trim(line.substr(eq + 1)))});
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(DataError::Kind::kIo, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SimParams default_params() { return SimParams{}; }

std::vector<Violation> validate(const SimParams& p) {
  std::vector<Violation> out;
  auto check = [&](bool ok, std::string field, std::string constraint) {
    if (!ok) out.push_back({std::move(field), std::move(constraint)});
  };
  for (const auto& f : kFields) {
    if (f.kind == Kind::kReal && !std::isfinite(p.*f.real)) {
      check(false, std::string(f.name), "finite");
    }
  }
  check(p.v_reset <= p.v_rest, "v_reset", "v_reset <= v_rest");
  check(p.v_rest < p.v_thresh, "v_thresh", "v_rest < v_thresh");
  check(p.t_refrac > 0, "t_refrac", "t_refrac > 0");
  check(p.tau_m > 0, "tau_m", "tau_m > 0");
  check(p.tau_plus > 0, "tau_plus", "tau_plus > 0");
  check(p.tau_minus > 0, "tau_minus", "tau_minus > 0");
  check(p.a_plus > 0, "a_plus", "a_plus > 0");
  check(p.a_minus > 0, "a_minus", "a_minus > 0");
  check(p.exc_strength > 0, "exc_strength", "exc_strength > 0");
  check(p.inh_strength > 0, "inh_strength", "inh_strength > 0");
  check(p.sigma_e > 0, "sigma_e", "sigma_e > 0");
  check(p.sigma_i > 0, "sigma_i", "sigma_i > 0");
  check(p.n_neurons > 0, "n_neurons", "n_neurons > 0");
  check(p.k_exc > 0, "k_exc", "k_exc > 0");
  check(p.k_inh > 0, "k_inh", "k_inh > 0");
  check(p.dt > 0, "dt", "dt > 0");
  check(p.dt <= p.t_refrac, "dt", "dt <= t_refrac");
  check(p.sigma_stim > 0, "sigma_stim", "sigma_stim > 0");
  check(p.stim_amplitude > 0, "stim_amplitude", "stim_amplitude > 0");
  check(p.w_max_factor > 0, "w_max_factor", "w_max_factor > 0");
  check(p.exc_frac > 0 && p.exc_frac < 1, "exc_frac", "0 < exc_frac < 1");
  const double n = static_cast<double>(p.n_neurons);
  check(static_cast<double>(p.k_exc) < p.exc_frac * n, "k_exc", "k_exc < exc_frac * n_neurons");
  check(static_cast<double>(p.k_inh) < (1.0 - p.exc_frac) * n, "k_inh",
        "k_inh < (1 - exc_frac) * n_neurons");
  return out;
}

void require_valid(const SimParams& params) {
  const auto violations = validate(params);
  if (violations.empty()) return;
  std::string msg = "invalid parameters:";
  for (const auto& v : violations) msg += " [" + v.field + ": " + v.constraint + "]";
  throw ConfigError(msg);
}

SimParams scaled(SimParams params, double factor) {
  if (!(factor > 0) || !std::isfinite(factor)) {
    throw ConfigError("scale factor must be positive and finite");
  }
  auto scale = [factor](std::int64_t v) {
    return std::max<std::int64_t>(1, std::llround(static_cast<double>(v) * factor));
  };
  params.n_neurons = scale(params.n_neurons);
  params.k_exc = scale(params.k_exc);
  params.k_inh = scale(params.k_inh);
  return params;
}

std::vector<std::string_view> param_field_names() {
  std::vector<std::string_view> names;
  for (const auto& f : kFields) names.push_back(f.name);
  return names;
}

bool is_param_field(std::string_view name) { return find_field(name) != nullptr; }

double get_field(const SimParams& params, std::string_view name) {
  const auto* f = find_field(name);
  if (!f) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  switch (f->kind) {
    case Kind::kReal:
      return params.*f->real;
    case Kind::kCount:
      return static_cast<double>(params.*f->count);
    case Kind::kSeed:
      return static_cast<double>(params.seed);
  }
  return 0.0;
}

void set_field(SimParams& params, std::string_view name, double value) {
  const auto* f = find_field(name);
  if (!f) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  if (f->kind == Kind::kReal) {
    params.*f->real = value;
    return;
  }
  if (value != std::floor(value) || value < 0 || value > 9.007199254740992e15) {
    throw ConfigError("parameter '" + std::string(name) + "' must be a non-negative integer");
  }
  if (f->kind == Kind::kCount) {
    params.*f->count = static_cast<std::int64_t>(value);
  } else {
    params.seed = static_cast<std::uint64_t>(value);
  }
}

std::string serialize(const SimParams& params) {
  std::string out;
  for (const auto& f : kFields) {
    out += f.name;
    out += " = ";
    switch (f.kind) {
      case Kind::kReal:
        out += format_double(params.*f.real);
        break;
      case Kind::kCount:
        out += std::to_string(params.*f.count);
        break;
      case Kind::kSeed:
        out += std::to_string(params.seed);
        break;
    }
    out += '\n';
  }
  return out;
}

SimParams parse_params(std::string_view text, const SimParams& base) {
  SimParams params = base;
  std::set<std::string> seen;
  for (const auto& kv : split_key_values(text)) {
    const auto* f = find_field(kv.key);
    const std::string where = "line " + std::to_string(kv.line) + ": ";
    if (!f) throw DataError(DataError::Kind::kFormat, where + "unknown key '" + kv.key + "'");
    if (!seen.insert(kv.key).second) {
      throw DataError(DataError::Kind::kFormat, where + "duplicate key '" + kv.key + "'");
    }
    if (f->kind == Kind::kSeed) {
      std::uint64_t seed = 0;
      const auto* end = kv.value.data() + kv.value.size();
      auto [ptr, ec] = std::from_chars(kv.value.data(), end, seed);
      if (ec != std::errc{} || ptr != end) {
        throw DataError(DataError::Kind::kFormat, where + "invalid seed '" + kv.value + "'");
      }
      params.seed = seed;
      continue;
    }
    const double value = parse_number(kv.value, kv.key);
    try {
      set_field(params, kv.key, value);
    } catch (const ConfigError& e) {
      throw DataError(DataError::Kind::kFormat, where + e.what());
    }
  }
  return params;
}

SimParams load_params(const std::filesystem::path& path, const SimParams& base) {
  return parse_params(read_file(path), base);
}

void save_params(const std::filesystem::path& path, const SimParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataError::Kind::kIo, "cannot write " + path.string());
  out << serialize(params);
}

std::string params_digest(const SimParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize(params)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return out;
}

// --- search spaces ----------------------------------------------------------

std::size_t SearchSpace::size() const {
  std::size_t total = 1;
  for (const auto& [name, grid] : grids) {
    if (!is_param_field(name)) throw ConfigError("unknown search field '" + name + "'");
    if (grid.empty()) throw ConfigError("empty grid for '" + name + "'");
    for (const auto& v : grid) {
      if (!v.is_ref()) continue;
      if (!is_param_field(v.ref)) {
        throw ConfigError("grid for '" + name + "' refers to unknown field '" + v.ref + "'");
      }
      if (v.ref == name) throw ConfigError("grid for '" + name + "' refers to itself");
      if (auto it = grids.find(v.ref); it != grids.end() &&
          std::any_of(it->second.begin(), it->second.end(),
                      [](const GridValue& g) { return g.is_ref(); })) {
        throw ConfigError("chained references are not supported ('" + name + "' -> '" + v.ref +
                          "')");
      }
    }
    if (total > cap / grid.size()) {
      throw ConfigError("search space exceeds cap of " + std::to_string(cap) + " candidates");
    }
    total *= grid.size();
  }
  if (total > cap) {
    throw ConfigError("search space exceeds cap of " + std::to_string(cap) + " candidates");
  }
  return total;
}

Enumeration enumerate(const SearchSpace& space) {
  const std::size_t total = space.size();
  std::vector<std::pair<const std::string*, const std::vector<GridValue>*>> axes;
  for (const auto& [name, grid] : space.grids) axes.emplace_back(&name, &grid);

  Enumeration out;
  out.candidates.reserve(total);
  std::vector<std::size_t> index(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    SimParams p = space.base;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& g = (*axes[a].second)[index[a]];
      if (!g.is_ref()) set_field(p, *axes[a].first, g.value);
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& g = (*axes[a].second)[index[a]];
      if (g.is_ref()) set_field(p, *axes[a].first, g.value * get_field(p, g.ref));
    }
    if (validate(p).empty()) {
      out.candidates.push_back(p);
    } else {
      ++out.excluded;
    }
    // Odometer increment, last axis fastest.
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++index[a] < axes[a].second->size()) break;
      index[a] = 0;
    }
  }
  return out;
}

SearchSpace parse_space(std::string_view text, const SimParams& base) {
  SearchSpace space;
  space.base = base;
  for (const auto& kv : split_key_values(text)) {
    const std::string where = "line " + std::to_string(kv.line) + ": ";
    if (!is_param_field(kv.key)) {
      throw DataError(DataError::Kind::kFormat, where + "unknown key '" + kv.key + "'");
    }
    if (space.grids.count(kv.key)) {
      throw DataError(DataError::Kind::kFormat, where + "duplicate key '" + kv.key + "'");
    }
    std::vector<GridValue> grid;
    std::string_view rest = kv.value;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      if (item.empty()) {
        throw DataError(DataError::Kind::kFormat, where + "empty value in grid '" + kv.key + "'");
      }
      if (const auto star = item.find('*'); star != std::string_view::npos) {
        const double factor = parse_number(item.substr(0, star), kv.key);
        const std::string ref(trim(item.substr(star + 1)));
        if (!is_param_field(ref)) {
          throw DataError(DataError::Kind::kFormat, where + "unknown field '" + ref + "'");
        }
        grid.push_back(GridValue::scaled_ref(factor, ref));
      } else {
        grid.push_back(GridValue::literal(parse_number(item, kv.key)));
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    space.grids.emplace(kv.key, std::move(grid));
  }
  try {
    space.size();
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::kFormat, e.what());
  }
  return space;
}

SearchSpace load_space(const std::filesystem::path& path, const SimParams& base) {
  return parse_space(read_file(path), base);
}

SearchSpace default_calibration_space(const SimParams& center) {
  SearchSpace space;
  space.base = center;
  auto around = [&](std::string_view field, std::initializer_list<double> factors) {
    std::vector<GridValue> grid;
    for (double f : factors) grid.push_back(GridValue::literal(f * get_field(center, field)));
    space.grids.emplace(std::string(field), std::move(grid));
  };
  for (auto f : {"exc_strength", "inh_strength", "a_plus", "a_minus"}) around(f, {0.1, 1.0, 10.0});
  for (auto f : {"tau_m", "tau_plus", "tau_minus", "sigma_e", "sigma_i", "sigma_stim"}) {
    around(f, {0.5, 1.0, 1.5});
  }
  return space;
}

}  // namespace measim
