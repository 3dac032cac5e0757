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

#include "measim/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "measim/error.hpp"

namespace measim {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

 private:
  template <typename T>
  void le(T v) {
    char b[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(b, sizeof(T));
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le<std::uint8_t>()); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) truncated();
  }
  // Guards allocations against corrupt length fields.
  std::uint64_t count(std::uint64_t limit, const char* what) {
    const auto v = u64();
    if (v > limit) {
      throw DataError(DataError::Kind::kFormat, std::string("snapshot: implausible ") + what);
    }
    return v;
  }

 private:
  template <typename T>
  T le() {
    unsigned char b[sizeof(T)];
    in_.read(reinterpret_cast<char*>(b), sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) truncated();
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{b[i]} << (8 * i));
    return v;
  }
  [[noreturn]] static void truncated() {
    throw DataError(DataError::Kind::kTruncated, "snapshot: truncated file");
  }
  std::istream& in_;
};

}  // namespace

void write_culture(std::ostream& out, const Culture& c) {
  Writer w(out);
  w.bytes(kSnapshotMagic, sizeof kSnapshotMagic);
  w.u32(kSnapshotVersion);
  w.u32(0);
  const std::string text = serialize(c.params);
  w.u64(text.size());
  w.bytes(text.data(), text.size());
  const std::size_t n = c.size();
  w.u64(n);
  w.u64(c.synapses.size());
  w.u64(c.coupling.neuron.size());
  w.f64(c.w_max_exc);
  w.f64(c.w_max_inh);
  for (const auto& p : c.placement.positions) {
    w.f64(p.row_mm);
    w.f64(p.col_mm);
  }
  for (auto f : c.placement.excitatory) w.u8(f);
  for (auto o : c.synapses.offsets) w.u64(o);
  for (auto p : c.synapses.pre) w.u32(p);
  for (auto x : c.synapses.weight) w.f64(x);
  for (int e = 0; e < MeaGrid::kElectrodes; ++e) {
    for (auto k = c.coupling.offsets[static_cast<std::size_t>(e)];
         k < c.coupling.offsets[static_cast<std::size_t>(e) + 1]; ++k) {
      w.u32(static_cast<std::uint32_t>(e));
      w.u32(c.coupling.neuron[k]);
      w.f64(c.coupling.value[k]);
    }
  }
  if (!out) throw DataError(DataError::Kind::kIo, "snapshot: write failed");
}

Culture read_culture(std::istream& in) {
  Reader r(in);
  char magic[sizeof kSnapshotMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0) {
    throw DataError(DataError::Kind::kBadMagic, "snapshot: bad magic");
  }
  if (const auto version = r.u32(); version != kSnapshotVersion) {
    throw DataError(DataError::Kind::kFormat,
                    "snapshot: unsupported version " + std::to_string(version));
  }
  r.u32();
  std::string text(r.count(1 << 20, "parameter block"), '\0');
  r.bytes(text.data(), text.size());

  Culture c;
  c.params = parse_params(text);
  const auto n = r.count(1ull << 32, "neuron count");
  const auto s = r.count(1ull << 32, "synapse count");
  const auto k = r.count(1ull << 40, "coupling count");
  c.w_max_exc = r.f64();
  c.w_max_inh = r.f64();
  c.placement.positions.resize(n);
  for (auto& p : c.placement.positions) {
    p.row_mm = r.f64();
    p.col_mm = r.f64();
  }
  c.placement.excitatory.resize(n);
  for (auto& f : c.placement.excitatory) f = r.u8();
  c.synapses.offsets.resize(n + 1);
  for (auto& o : c.synapses.offsets) o = r.u64();
  if (c.synapses.offsets.front() != 0 || c.synapses.offsets.back() != s) {
    throw DataError(DataError::Kind::kFormat, "snapshot: inconsistent synapse offsets");
  }
  c.synapses.pre.resize(s);
  for (auto& p : c.synapses.pre) {
    p = r.u32();
    if (p >= n) throw DataError(DataError::Kind::kFormat, "snapshot: synapse index out of range");
  }
  c.synapses.weight.resize(s);
  for (auto& x : c.synapses.weight) x = r.f64();
  c.coupling.offsets.assign(MeaGrid::kElectrodes + 1, 0);
  c.coupling.neuron.resize(k);
  c.coupling.value.resize(k);
  std::uint32_t last_e = 0;
  for (std::uint64_t i = 0; i < k; ++i) {
    const auto e = r.u32();
    if (e >= MeaGrid::kElectrodes || e < last_e) {
      throw DataError(DataError::Kind::kFormat, "snapshot: bad coupling electrode");
    }
    last_e = e;
    c.coupling.neuron[i] = r.u32();
    c.coupling.value[i] = r.f64();
    ++c.coupling.offsets[e + 1];
  }
  for (std::size_t e = 0; e < MeaGrid::kElectrodes; ++e) {
    c.coupling.offsets[e + 1] += c.coupling.offsets[e];
  }
  c.synapses.rebuild_out_index();
  return c;
}

void save_culture(const std::filesystem::path& path, const Culture& culture) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataError::Kind::kIo, "cannot write " + path.string());
  write_culture(out, culture);
}

Culture load_culture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::kIo, "cannot open " + path.string());
  return read_culture(in);
}

}  // namespace measim
