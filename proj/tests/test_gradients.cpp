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

#include "rscf/train/gradient_check.hpp"

namespace rscf {
namespace {

class ObjectiveGradientTest : public ::testing::TestWithParam<ObjectiveGradCase> {};

TEST_P(ObjectiveGradientTest, MatchesCentralDifferences) {
  const auto res = check_objective_gradient(GetParam());
  EXPECT_LT(res.max_relative_error, 1e-4)
      << GetParam().label() << " worst " << res.worst_table << "[" << res.worst_index
      << "] numeric=" << res.worst_numeric << " analytic=" << res.worst_analytic;
  EXPECT_GT(res.coordinates_checked, 0u);
}

std::string case_name(const ::testing::TestParamInfo<ObjectiveGradCase>& info) {
  std::string s = info.param.label() + "_p" + std::to_string(info.param.filter_p) + "_d" +
                  std::to_string(info.param.distance_p);
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  return s;
}

INSTANTIATE_TEST_SUITE_P(FullGrid, ObjectiveGradientTest,
                         ::testing::ValuesIn(objective_gradient_grid(11)), case_name);

std::vector<ObjectiveGradCase> l1_and_l2_variants() {
  std::vector<ObjectiveGradCase> out;
  for (auto c : objective_gradient_grid(101, 6)) {
    if (c.rp_weight == 0.0) continue;
    c.filter_p = 1;
    c.distance_p = 2;
    out.push_back(c);
  }
  return out;
}

INSTANTIATE_TEST_SUITE_P(FilterL1DistanceL2, ObjectiveGradientTest,
                         ::testing::ValuesIn(l1_and_l2_variants()), case_name);

TEST(ObjectiveGradientTest, CorruptedGradientIsCaught) {
  ObjectiveGradCase c;
  c.model = ModelKind::ComplEx;
  c.filter = FilterKind::Rscf;
  c.rt = true;
  c.dura_weight = 0.05;
  c.dim = 4;
  auto fx = make_objective_fixture(c);
  GradientBuffer<double> g(fx.model.params);
  total_objective<double>(fx.model, fx.batch, fx.loss, &g);
  // Halve the A1 gradient; the checker must notice.
  for (auto i : g.touched_rows(Table::A1))
    for (auto& x : g.row(Table::A1, i)) x *= 0.5;
  Model<double> work = fx.model;
  auto res = finite_difference_check<double>(
      [&](const ParameterStore<double>& p) {
        work.params = p;
        return total_objective<double>(work, fx.batch, fx.loss).total;
      },
      fx.model.params, g);
  EXPECT_GT(res.max_relative_error, 1e-3);
  EXPECT_EQ(res.worst_table, "A1");
}

}  // namespace
}  // namespace rscf
