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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "support.hpp"

namespace rscf {
namespace {

Dataset toy(std::uint64_t seed = 4, std::size_t entities = 10, std::size_t relations = 3,
            std::size_t triples = 40) {
  Rng rng(seed);
  return testing::random_dataset(rng, entities, relations, triples, 8);
}

RunConfig toy_config(ModelKind kind, FilterKind filter, std::size_t epochs) {
  auto c = testing::synthetic_run(kind, 8, epochs);
  c.data.synthetic = false;
  c.train.filter.kind = filter;
  c.train.batch_size = 16;
  c.train.loss.negatives = 8;
  c.train.loss.margin = 4;
  c.train.init.scale = 0.1;
  return c;
}

TEST(TrainerTest, ZeroEpochsReturnsInitialisation) {
  const auto d = toy();
  const auto cfg = toy_config(ModelKind::TransE, FilterKind::Rscf, 0);
  const auto res = train<double>(d, cfg);
  EXPECT_TRUE(res.report.epochs.empty());
  const auto init = Model<double>::create(cfg.train.model, cfg.train.filter, d.num_entities(),
                                          d.num_relations(), cfg.train.init, cfg.train.seed);
  EXPECT_TRUE(res.checkpoint.model.params == init.params);
  EXPECT_EQ(res.checkpoint.epoch, 0u);
}

TEST(TrainerTest, ToyTransELossDecreases) {
  const auto d = make_dataset({{"a", "r", "b"}, {"b", "r", "c"}, {"c", "s", "a"},
                               {"d", "s", "b"}, {"e", "r", "d"}},
                              {}, {});
  auto cfg = toy_config(ModelKind::TransE, FilterKind::None, 100);
  cfg.train.batch_size = 5;
  cfg.train.loss.negatives = 4;
  const auto res = train<double>(d, cfg);
  ASSERT_EQ(res.report.epochs.size(), 100u);
  EXPECT_LT(res.report.epochs.back().loss, res.report.epochs.front().loss);
}

TEST(TrainerTest, InertBeforePluginEpoch) {
  const auto d = toy();
  auto cfg = toy_config(ModelKind::ComplEx, FilterKind::Rscf, 100);
  cfg.train.plugin_epoch = 50;
  const auto res = train<double>(d, cfg);
  ASSERT_EQ(res.report.epochs.size(), 100u);
  for (std::size_t e = 0; e < 100; ++e) {
    const auto& r = res.report.epochs[e];
    ASSERT_TRUE(r.scale.has_value());
    EXPECT_EQ(r.filters_active, e >= 50);
    if (e < 50) {
      EXPECT_EQ(r.scale->transformation, 1.0) << e;
    }
  }
  EXPECT_NE(res.report.epochs.back().scale->transformation, 1.0);
}

TEST(TrainerTest, FilterParametersFrozenBeforePlugin) {
  const auto d = toy();
  auto cfg = toy_config(ModelKind::TransE, FilterKind::SfbrDiag, 5);
  cfg.train.plugin_epoch = 5;
  cfg.train.filter.rt_enabled = true;
  const auto res = train<double>(d, cfg);
  const auto init = Model<double>::create(cfg.train.model, cfg.train.filter, d.num_entities(),
                                          d.num_relations(), cfg.train.init, cfg.train.seed);
  for (Table t : {Table::SfbrW, Table::SfbrB, Table::A2, Table::A3})
    EXPECT_TRUE(res.checkpoint.model.params[t] == init.params[t]) << table_name(t);
  EXPECT_FALSE(res.checkpoint.model.params[Table::Entity] == init.params[Table::Entity]);
}

// A filter that never activates gives exactly the filter-free run.
TEST(TrainerTest, InertFilterEqualsNoFilterRun) {
  for (auto kind : {ModelKind::TransE, ModelKind::ComplEx, ModelKind::RotatE}) {
    const auto d = toy();
    auto with = toy_config(kind, FilterKind::RscfLinear2, 6);
    with.train.plugin_epoch = 6;
    with.train.filter.rt_enabled = true;
    with.train.loss.rp_weight = 0.1;
    auto without = toy_config(kind, FilterKind::None, 6);
    without.train.loss.rp_weight = 0.1;
    const auto a = train<double>(d, with);
    const auto b = train<double>(d, without);
    for (std::size_t e = 0; e < 6; ++e)
      EXPECT_EQ(a.report.epochs[e].loss, b.report.epochs[e].loss) << to_string(kind);
    for (Table t : {Table::Entity, Table::Relation})
      EXPECT_TRUE(a.checkpoint.model.params[t] == b.checkpoint.model.params[t]);
    const auto fi = build_filter_index(d);
    EXPECT_EQ(evaluate_split(a.checkpoint.model, d, fi, Split::Test).overall.mrr,
              evaluate_split(b.checkpoint.model, d, fi, Split::Test).overall.mrr);
  }
}

TEST(TrainerTest, SameSeedSameRun) {
  const auto d = toy();
  const auto cfg = toy_config(ModelKind::RotatE, FilterKind::Rscf, 5);
  const auto a = train<double>(d, cfg);
  const auto b = train<double>(d, cfg);
  for (std::size_t e = 0; e < 5; ++e) EXPECT_EQ(a.report.epochs[e].loss, b.report.epochs[e].loss);
  EXPECT_TRUE(a.checkpoint.model.params == b.checkpoint.model.params);
}

// Replays the epoch by hand: seeded shuffle, per-batch objective at the
// pre-step parameters, then an optimizer step.
TEST(TrainerTest, EpochLossMatchesReplay) {
  for (std::size_t batch : {std::size_t{40}, std::size_t{7}}) {
    const auto d = toy();
    auto cfg = toy_config(ModelKind::TransE, FilterKind::Rscf, 1);
    cfg.train.batch_size = batch;
    cfg.train.loss.rp_weight = 0.2;
    auto st = make_train_state<double>(d, cfg);
    auto replay = make_train_state<double>(d, cfg);

    const auto rec = train_epoch(st, d.train, cfg.train, 0);

    std::vector<std::size_t> order(d.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    replay.rng.shuffle(order.begin(), order.end());
    GradientBuffer<double> g(replay.model.params);
    double total = 0;
    for (std::size_t s = 0; s < order.size(); s += batch) {
      std::vector<Triple> b;
      for (std::size_t i = s; i < std::min(order.size(), s + batch); ++i)
        b.push_back(d.train[order[i]]);
      const auto ex = make_examples<double>(replay.model, b, cfg.train.loss, replay.rng);
      total += total_objective<double>(replay.model, ex, cfg.train.loss).total;
      total_objective<double>(replay.model, ex, cfg.train.loss, &g);
      optimizer_step(replay.model.params, g, cfg.train.optimizer);
    }
    EXPECT_NEAR(rec.loss, total / static_cast<double>(d.train.size()), 1e-12);
    EXPECT_TRUE(st.model.params == replay.model.params) << batch;
  }
}

TEST(TrainerTest, WorkersAgreeWithSerialRun) {
  const auto d = toy();
  auto cfg = toy_config(ModelKind::ComplEx, FilterKind::Rscf, 3);
  cfg.train.loss.dura_weight = 0.05;
  const auto serial = train<double>(d, cfg);
  cfg.train.workers = 3;
  const auto par1 = train<double>(d, cfg);
  const auto par2 = train<double>(d, cfg);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_NEAR(par1.report.epochs[e].loss, serial.report.epochs[e].loss, 1e-9);
    EXPECT_EQ(par1.report.epochs[e].loss, par2.report.epochs[e].loss);
  }
}

TEST(TrainerTest, WarmStartResumesExactly) {
  const auto d = toy();
  auto cfg = toy_config(ModelKind::TransE, FilterKind::SfbrN, 4);
  const auto straight = train<double>(d, cfg);
  cfg.train.epochs = 2;
  auto first = train<double>(d, cfg);
  const auto second = train<double>(d, cfg, &first.checkpoint);
  EXPECT_EQ(second.checkpoint.epoch, 4u);
  EXPECT_EQ(second.report.epochs.front().epoch, 3u);
  EXPECT_TRUE(second.checkpoint.model.params == straight.checkpoint.model.params);
  EXPECT_EQ(second.report.epochs.back().loss, straight.report.epochs.back().loss);
}

TEST(TrainerTest, WarmStartPlugsInNewFilter) {
  const auto d = toy();
  auto cfg = toy_config(ModelKind::ComplEx, FilterKind::None, 2);
  const auto pre = train<double>(d, cfg);
  cfg.train.filter.kind = FilterKind::SfbrDiag;
  const auto plugged = make_train_state<double>(d, cfg, &pre.checkpoint);
  EXPECT_TRUE(plugged.model.params[Table::Entity] == pre.checkpoint.model.params[Table::Entity]);
  EXPECT_TRUE(plugged.model.params.has(Table::SfbrW));
  cfg.train.model.dim = 6;
  EXPECT_THROW(make_train_state<double>(d, cfg, &pre.checkpoint), InvalidConfig);
}

TEST(TrainerTest, DivergenceKeepsPartialReport) {
  const auto d = toy();
  auto cfg = toy_config(ModelKind::Rescal, FilterKind::None, 50);
  cfg.train.optimizer.kind = OptimizerKind::Sgd;
  cfg.train.optimizer.lr = 1e6;
  cfg.train.init.scale = 1.0;
  try {
    train<double>(d, cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_LT(e.partial.epochs.size(), 50u);
    EXPECT_EQ(e.category(), ErrorCategory::Numerical);
  }
}

TEST(TrainerTest, ValidationCadence) {
  auto d = toy();
  d.valid = d.test;
  auto cfg = toy_config(ModelKind::CP, FilterKind::None, 6);
  cfg.train.telemetry.valid_every = 3;
  const auto res = train<double>(d, cfg);
  for (const auto& r : res.report.epochs) EXPECT_EQ(r.valid_mrr.has_value(), r.epoch % 3 == 0);
}

TEST(TrainerTest, ReportSerialization) {
  const auto d = toy();
  const auto res = train<double>(d, toy_config(ModelKind::TransE, FilterKind::Rscf, 3));
  std::ostringstream csv;
  write_train_report_csv(csv, res.report);
  const auto text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  const auto j = train_report_json(res.report);
  ASSERT_EQ(j["epochs"].size(), 3u);
  EXPECT_EQ(j["epochs"][2]["epoch"], 3);
  EXPECT_TRUE(j["epochs"][0]["valid_mrr"].is_null());
}

}  // namespace
}  // namespace rscf
