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

#include <gtest/gtest.h>

#include "rscf/core/params.hpp"

namespace rscf {
namespace {

ParameterStore<double> small_store() {
  ParameterStore<double> p;
  p.add(Table::Entity, EmbeddingTable<double>(4, 3, 1.0));
  p.add(Table::A1, EmbeddingTable<double>(3, 3, 0.0));
  return p;
}

TEST(TableNameTest, RoundTrip) {
  for (Table t : kAllTables) EXPECT_EQ(table_from_name(table_name(t)), t);
  EXPECT_THROW(table_from_name("bogus"), DataError);
}

TEST(ParameterStoreTest, AddCreatesZeroAccumulator) {
  auto p = small_store();
  EXPECT_TRUE(p.has(Table::Entity));
  EXPECT_FALSE(p.has(Table::Relation));
  EXPECT_EQ(p.accumulator(Table::Entity).rows(), 4u);
  for (double x : p.accumulator(Table::Entity).flat()) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(p[Table::Relation], OutOfRange);
  EXPECT_EQ(p.present(), (std::vector<Table>{Table::Entity, Table::A1}));
}

TEST(GradientBufferTest, TouchedRowsTrackedAndCleared) {
  auto p = small_store();
  GradientBuffer<double> g(p);
  g.row(Table::Entity, 2)[1] = 5.0;
  g.row(Table::Entity, 2)[0] += 1.0;
  g.row(Table::Entity, 0)[0] = 1.0;
  EXPECT_EQ(g.touched_rows(Table::Entity), (std::vector<std::size_t>{2, 0}));
  EXPECT_TRUE(g.touched(Table::Entity, 2));
  EXPECT_FALSE(g.touched(Table::Entity, 1));
  g.clear();
  EXPECT_TRUE(g.touched_rows(Table::Entity).empty());
  for (double x : g.table(Table::Entity).flat()) EXPECT_EQ(x, 0.0);
}

TEST(GradientBufferTest, MergeAddsTouchedRows) {
  auto p = small_store();
  GradientBuffer<double> a(p), b(p);
  a.row(Table::Entity, 1)[0] = 1.0;
  b.row(Table::Entity, 1)[0] = 2.0;
  b.row(Table::A1, 2)[2] = 3.0;
  a.merge(b);
  EXPECT_EQ(a.row(Table::Entity, 1)[0], 3.0);
  EXPECT_EQ(a.row(Table::A1, 2)[2], 3.0);
  EXPECT_TRUE(a.touched(Table::A1, 2));
}

TEST(GradientBufferTest, DetectsNonFinite) {
  auto p = small_store();
  GradientBuffer<double> g(p);
  EXPECT_TRUE(g.all_finite());
  g.row(Table::A1, 0)[0] = INFINITY;
  EXPECT_FALSE(g.all_finite());
}

TEST(GradientBufferTest, MissingTableThrows) {
  auto p = small_store();
  GradientBuffer<double> g(p);
  EXPECT_THROW(g.row(Table::A2, 0), OutOfRange);
}

}  // namespace
}  // namespace rscf
