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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rscf/core/gradcheck.hpp"
#include "rscf/model/model.hpp"
#include "rscf/train/objectives.hpp"

namespace rscf {

// One point of the model x filter x RT x RP x DURA gradient grid.
struct ObjectiveGradCase {
  ModelKind model = ModelKind::ComplEx;
  FilterKind filter = FilterKind::None;
  bool rt = false;
  double rp_weight = 0.0;
  double dura_weight = 0.0;
  std::size_t dim = 8;
  std::size_t triples = 5;
  std::size_t entities = 6;
  std::size_t relations = 2;
  std::size_t negatives = 4;
  int filter_p = 2;
  int distance_p = 1;
  std::uint64_t seed = 1;

  std::string label() const {
    return to_string(model) + "/" + to_string(filter) + "/rt=" + (rt ? "on" : "off") +
           "/rp=" + std::to_string(rp_weight).substr(0, 4) +
           "/dura=" + (dura_weight > 0 ? "on" : "off");
  }
};

// Every combination: 5 models x 6 filters x RT on/off x RP in {0, 0.1} x DURA
// (tensor models only).
inline std::vector<ObjectiveGradCase> objective_gradient_grid(std::uint64_t seed = 1,
                                                              std::size_t dim = 8) {
  std::vector<ObjectiveGradCase> out;
  for (auto m : {ModelKind::TransE, ModelKind::RotatE, ModelKind::ComplEx, ModelKind::CP,
                 ModelKind::Rescal})
    for (auto f : {FilterKind::None, FilterKind::SfbrDiag, FilterKind::SfbrN,
                   FilterKind::SfbrLinear2, FilterKind::Rscf, FilterKind::RscfLinear2})
      for (bool rt : {false, true})
        for (double rp : {0.0, 0.1})
          for (double dura : is_distance_model(m) ? std::vector<double>{0.0}
                                                  : std::vector<double>{0.0, 0.05}) {
            ObjectiveGradCase c;
            c.model = m;
            c.filter = f;
            c.rt = rt;
            c.rp_weight = rp;
            c.dura_weight = dura;
            c.dim = dim;
            c.seed = seed + out.size();
            out.push_back(c);
          }
  return out;
}

struct ObjectiveFixture {
  Model<double> model;
  std::vector<TrainingExample> batch;
  LossConfig loss;
};

// Random model with every parameter perturbed away from its initialisation and
// a random batch with pre-drawn negatives.
inline ObjectiveFixture make_objective_fixture(const ObjectiveGradCase& c) {
  ModelSpec spec;
  spec.kind = c.model;
  spec.dim = c.dim;
  spec.distance_p = c.distance_p;
  FilterSpec fs;
  fs.kind = c.filter;
  fs.p = c.filter_p;
  fs.rt_enabled = c.rt;
  fs.apply_to = spec.distance_based() ? ApplyTo::HeadAndTail : ApplyTo::HeadOnly;
  ObjectiveFixture fx{Model<double>::create(spec, fs, c.entities, c.relations, {}, c.seed),
                      {},
                      {}};
  Rng rng(c.seed, 0x6c0a);
  for (Table t : fx.model.params.present())
    for (auto& x : fx.model.params[t].flat()) x = rng.gaussian(0.0, 0.5);
  fx.loss.rp_weight = c.rp_weight;
  fx.loss.dura_weight = c.dura_weight;
  fx.loss.negatives = c.negatives;
  fx.loss.margin = 2.0;
  std::vector<Triple> triples;
  for (std::size_t i = 0; i < c.triples; ++i)
    triples.push_back({static_cast<EntityId>(rng.below(c.entities)),
                       static_cast<RelationId>(rng.below(c.relations)),
                       static_cast<EntityId>(rng.below(c.entities))});
  fx.batch = make_examples<double>(fx.model, triples, fx.loss, rng);
  return fx;
}

// Analytic gradient of total_objective against central differences.
inline GradCheckResult check_objective_gradient(const ObjectiveGradCase& c,
                                                GradCheckOptions opts = {}) {
  auto fx = make_objective_fixture(c);
  fx.loss.validate(fx.model.spec);
  GradientBuffer<double> g(fx.model.params);
  total_objective<double>(fx.model, fx.batch, fx.loss, &g);
  Model<double> work = fx.model;
  auto loss_fn = [&](const ParameterStore<double>& p) {
    work.params = p;
    return total_objective<double>(work, fx.batch, fx.loss).total;
  };
  if (opts.seed == 0) opts.seed = c.seed;
  return finite_difference_check<double>(loss_fn, fx.model.params, g, opts);
}

}  // namespace rscf
