/* Copyright 2026 The RSCF-KGE Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rscf/config/run_config.hpp"
#include "rscf/core/rng.hpp"
#include "rscf/error.hpp"
#include "rscf/model/model.hpp"

namespace rscf {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

inline constexpr std::string_view kCheckpointMagic = "RSCFCKP1";
inline constexpr int kCheckpointVersion = 1;

// A trained (or freshly initialised) run: parameters with optimizer state,
// the vocabulary they index, the config that produced them, and where the
// run stopped.
template <typename Real>
struct Checkpoint {
  RunConfig config;
  Vocabulary vocabulary;
  Model<Real> model;
  std::size_t epoch = 0;
  std::string rng_state;
};

template <typename Real>
constexpr const char* dtype_name() {
  return sizeof(Real) == 8 ? "f64" : "f32";
}

namespace detail {

template <typename Real>
void append_raw(std::string& out, std::span<const Real> xs) {
  out.append(reinterpret_cast<const char*>(xs.data()), xs.size_bytes());
}

inline void append_u64(std::string& out, std::uint64_t x) {
  out.append(reinterpret_cast<const char*>(&x), sizeof x);
}

inline std::uint64_t read_u64(std::string_view s, std::size_t at) {
  std::uint64_t x;
  std::memcpy(&x, s.data() + at, sizeof x);
  return x;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

template <typename Dst, typename Src>
void read_array(std::string_view blob, std::size_t& pos, std::span<Dst> out) {
  const std::size_t bytes = out.size() * sizeof(Src);
  if (pos + bytes > blob.size()) throw DataError("checkpoint payload shorter than manifest");
  for (std::size_t i = 0; i < out.size(); ++i) {
    Src x;
    std::memcpy(&x, blob.data() + pos + i * sizeof(Src), sizeof(Src));
    out[i] = static_cast<Dst>(x);
  }
  pos += bytes;
}

// Validates framing and returns (metadata, payload) views.
inline std::pair<nlohmann::json, std::string_view> open_checkpoint(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 7) != kCheckpointMagic.substr(0, 7))
    throw DataError("not a checkpoint file");
  if (bytes.substr(0, 8) != kCheckpointMagic)
    throw VersionMismatch("unsupported checkpoint version '" + std::string(bytes.substr(7, 1)) +
                          "'");
  if (bytes.size() < 24) throw ChecksumMismatch("checkpoint truncated");
  const auto body = bytes.substr(0, bytes.size() - 8);
  if (fnv1a64(body) != read_u64(bytes, bytes.size() - 8))
    throw ChecksumMismatch("checkpoint checksum mismatch");
  const auto len = read_u64(bytes, 8);
  if (16 + len > body.size()) throw DataError("checkpoint metadata length out of range");
  auto meta = nlohmann::json::parse(body.substr(16, len), nullptr, false);
  if (meta.is_discarded()) throw DataError("checkpoint metadata is not valid JSON");
  if (meta.value("version", 0) != kCheckpointVersion)
    throw VersionMismatch("checkpoint metadata version " + meta.value("version", nlohmann::json()).dump());
  return {std::move(meta), body.substr(16 + len)};
}

}  // namespace detail

template <typename Real>
std::string serialize_checkpoint(const Checkpoint<Real>& ck) {
  nlohmann::ordered_json meta;
  meta["version"] = kCheckpointVersion;
  meta["dtype"] = dtype_name<Real>();
  meta["config"] = to_key_values(ck.config);
  meta["vocabulary"] = {{"entities", ck.vocabulary.entities.names()},
                        {"relations", ck.vocabulary.relations.names()}};
  meta["num_entities"] = ck.model.num_entities;
  meta["num_relations"] = ck.model.num_relations;
  meta["filters_active"] = ck.model.filters_active;
  meta["epoch"] = ck.epoch;
  meta["rng_state"] = ck.rng_state;
  auto& manifest = meta["tables"] = nlohmann::ordered_json::array();
  std::string payload;
  for (Table t : ck.model.params.present()) {
    for (const char* role : {"param", "accum"}) {
      const auto& tab = std::string_view(role) == "param" ? ck.model.params[t]
                                                          : ck.model.params.accumulator(t);
      manifest.push_back({{"name", table_name(t)},
                          {"role", role},
                          {"rows", tab.rows()},
                          {"dim", tab.dim()},
                          {"dtype", dtype_name<Real>()}});
      detail::append_raw<Real>(payload, tab.flat());
    }
  }
  const std::string json = meta.dump();
  std::string out(kCheckpointMagic);
  detail::append_u64(out, json.size());
  out += json;
  out += payload;
  detail::append_u64(out, fnv1a64(out));
  return out;
}

template <typename Real>
void save_checkpoint(const std::string& path, const Checkpoint<Real>& ck) {
  const auto bytes = serialize_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

// Arrays stored in the other precision are converted on load.
template <typename Real>
Checkpoint<Real> deserialize_checkpoint(std::string_view bytes) {
  auto [meta, payload] = detail::open_checkpoint(bytes);
  try {
    Checkpoint<Real> ck;
    ck.config = from_key_values(meta.at("config").get<KeyValues>());
    ck.vocabulary.entities =
        NameIndex::from_names(meta.at("vocabulary").at("entities").get<std::vector<std::string>>());
    ck.vocabulary.relations = NameIndex::from_names(
        meta.at("vocabulary").at("relations").get<std::vector<std::string>>());
    ck.epoch = meta.at("epoch").get<std::size_t>();
    ck.rng_state = meta.at("rng_state").get<std::string>();

    auto& m = ck.model;
    m.spec = ck.config.train.model;
    m.filter = ck.config.train.filter;
    m.num_entities = meta.at("num_entities").get<std::size_t>();
    m.num_relations = meta.at("num_relations").get<std::size_t>();
    m.filters_active = meta.at("filters_active").get<bool>();
    m.validate();

    std::size_t pos = 0;
    for (const auto& entry : meta.at("tables")) {
      const Table t = table_from_name(entry.at("name").get<std::string>());
      const auto role = entry.at("role").get<std::string>();
      const auto rows = entry.at("rows").get<std::size_t>();
      const auto dim = entry.at("dim").get<std::size_t>();
      const auto dtype = entry.at("dtype").get<std::string>();
      if (role == "param") {
        m.params.add(t, EmbeddingTable<Real>(rows, dim));
      } else if (role != "accum" || !m.params.has(t)) {
        throw DataError("checkpoint manifest entry out of order: " + entry.dump());
      }
      auto dst = role == "param" ? m.params[t].flat() : m.params.accumulator(t).flat();
      if (dtype == "f64")
        detail::read_array<Real, double>(payload, pos, dst);
      else if (dtype == "f32")
        detail::read_array<Real, float>(payload, pos, dst);
      else
        throw DataError("unknown dtype " + dtype);
    }
    if (pos != payload.size()) throw DataError("checkpoint payload longer than manifest");
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
}

template <typename Real>
Checkpoint<Real> load_checkpoint(const std::string& path) {
  return deserialize_checkpoint<Real>(detail::read_file(path));
}

// Stored precision ("f64" or "f32") without decoding the arrays.
inline std::string peek_checkpoint_dtype(const std::string& path) {
  const auto bytes = detail::read_file(path);
  return detail::open_checkpoint(bytes).first.value("dtype", "f64");
}

}  // namespace rscf
