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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rscf/core/tensor.hpp"
#include "rscf/error.hpp"

namespace rscf {

// Every trainable array a run can own.
enum class Table : int {
  Entity = 0,
  Relation,
  A1,     // relation -> entity change (RSCF)
  A2,     // head entity -> relation change (RT)
  A3,     // tail entity -> relation change (RT, distance models only)
  SfbrW,  // per-relation SFBR weights
  SfbrB,  // per-relation SFBR bias (Diag only)
};
inline constexpr std::size_t kTableCount = 7;

inline constexpr std::array<std::string_view, kTableCount> kTableNames = {
    "entity", "relation", "A1", "A2", "A3", "sfbr_w", "sfbr_b"};

inline std::string_view table_name(Table t) {
  return kTableNames[static_cast<std::size_t>(t)];
}

inline Table table_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTableCount; ++i)
    if (kTableNames[i] == name) return static_cast<Table>(i);
  throw DataError("unknown parameter table: " + std::string(name));
}

inline constexpr std::array<Table, kTableCount> kAllTables = {
    Table::Entity, Table::Relation, Table::A1,   Table::A2,
    Table::A3,     Table::SfbrW,    Table::SfbrB};

template <typename Real>
class ParameterStore {
 public:
  bool has(Table t) const { return slot(t).has_value(); }

  void add(Table t, EmbeddingTable<Real> table) {
    const auto rows = table.rows();
    const auto dim = table.dim();
    slot(t) = std::move(table);
    accumulator_slot(t) = EmbeddingTable<Real>(rows, dim, Real(0));
  }

  EmbeddingTable<Real>& operator[](Table t) {
    auto& s = slot(t);
    if (!s) throw OutOfRange("missing parameter table " + std::string(table_name(t)));
    return *s;
  }
  const EmbeddingTable<Real>& operator[](Table t) const {
    const auto& s = slot(t);
    if (!s) throw OutOfRange("missing parameter table " + std::string(table_name(t)));
    return *s;
  }

  EmbeddingTable<Real>& accumulator(Table t) { return *accumulator_slot(t); }
  const EmbeddingTable<Real>& accumulator(Table t) const {
    return *accumulators_[static_cast<std::size_t>(t)];
  }

  std::vector<Table> present() const {
    std::vector<Table> out;
    for (Table t : kAllTables)
      if (has(t)) out.push_back(t);
    return out;
  }

  friend bool operator==(const ParameterStore&, const ParameterStore&) = default;

 private:
  std::optional<EmbeddingTable<Real>>& slot(Table t) {
    return tables_[static_cast<std::size_t>(t)];
  }
  const std::optional<EmbeddingTable<Real>>& slot(Table t) const {
    return tables_[static_cast<std::size_t>(t)];
  }
  std::optional<EmbeddingTable<Real>>& accumulator_slot(Table t) {
    return accumulators_[static_cast<std::size_t>(t)];
  }

  std::array<std::optional<EmbeddingTable<Real>>, kTableCount> tables_;
  std::array<std::optional<EmbeddingTable<Real>>, kTableCount> accumulators_;
};

// Row-sparse gradient accumulator mirroring a ParameterStore's shapes.
// Storage is dense per table; only rows marked touched are read by the
// optimizer and reset by clear().
template <typename Real>
class GradientBuffer {
 public:
  GradientBuffer() = default;

  template <typename StoreReal>
  explicit GradientBuffer(const ParameterStore<StoreReal>& store) {
    for (Table t : store.present()) {
      const auto& tab = store[t];
      auto& e = entries_[static_cast<std::size_t>(t)];
      e.emplace();
      e->grad = EmbeddingTable<Real>(tab.rows(), tab.dim(), Real(0));
      e->touched.assign(tab.rows(), 0);
    }
  }

  bool has(Table t) const { return entries_[static_cast<std::size_t>(t)].has_value(); }

  // Marks the row touched and returns it for accumulation.
  std::span<Real> row(Table t, std::size_t i) {
    auto& e = entry(t);
    if (!e.touched[i]) {
      e.touched[i] = 1;
      e.touched_rows.push_back(i);
    }
    return e.grad.row(i);
  }

  std::span<const Real> row(Table t, std::size_t i) const {
    return entry(t).grad.row(i);
  }

  const EmbeddingTable<Real>& table(Table t) const { return entry(t).grad; }

  const std::vector<std::size_t>& touched_rows(Table t) const {
    return entry(t).touched_rows;
  }

  bool touched(Table t, std::size_t i) const { return entry(t).touched[i] != 0; }

  void clear() {
    for (auto& e : entries_) {
      if (!e) continue;
      for (auto i : e->touched_rows) {
        auto r = e->grad.row(i);
        std::fill(r.begin(), r.end(), Real(0));
        e->touched[i] = 0;
      }
      e->touched_rows.clear();
    }
  }

  // Adds other into this buffer (single-writer merge of worker buffers).
  void merge(const GradientBuffer& other) {
    for (std::size_t k = 0; k < kTableCount; ++k) {
      const auto& src = other.entries_[k];
      if (!src) continue;
      for (auto i : src->touched_rows) {
        auto dst = row(static_cast<Table>(k), i);
        auto s = src->grad.row(i);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += s[j];
      }
    }
  }

  bool all_finite() const {
    for (const auto& e : entries_) {
      if (!e) continue;
      for (auto i : e->touched_rows)
        for (Real x : e->grad.row(i))
          if (!std::isfinite(x)) return false;
    }
    return true;
  }

 private:
  struct Entry {
    EmbeddingTable<Real> grad;
    std::vector<std::uint8_t> touched;
    std::vector<std::size_t> touched_rows;
  };

  Entry& entry(Table t) {
    auto& e = entries_[static_cast<std::size_t>(t)];
    if (!e) throw OutOfRange("gradient buffer has no table " + std::string(table_name(t)));
    return *e;
  }
  const Entry& entry(Table t) const {
    const auto& e = entries_[static_cast<std::size_t>(t)];
    if (!e) throw OutOfRange("gradient buffer has no table " + std::string(table_name(t)));
    return *e;
  }

  std::array<std::optional<Entry>, kTableCount> entries_;
};

}  // namespace rscf
