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

#include <string>
#include <vector>

#include "rscf/rscf.hpp"

namespace rscf::testing {

// Random KG whose vocabulary covers exactly `entities` and `relations` names.
inline Dataset random_dataset(Rng& rng, std::size_t entities, std::size_t relations,
                              std::size_t triples, std::size_t test_triples) {
  std::vector<RawTriple> train, test;
  auto e = [](std::size_t i) { return "e" + std::to_string(i); };
  auto r = [](std::size_t i) { return "r" + std::to_string(i); };
  for (std::size_t i = 0; i < std::max(entities, relations); ++i)
    train.push_back({e(i % entities), r(i % relations), e((i + 1) % entities)});
  while (train.size() < triples)
    train.push_back({e(rng.below(entities)), r(rng.below(relations)), e(rng.below(entities))});
  for (std::size_t i = 0; i < test_triples; ++i)
    test.push_back({e(rng.below(entities)), r(rng.below(relations)), e(rng.below(entities))});
  return make_dataset(train, {}, test);
}

inline ModelSpec model_spec(ModelKind k, std::size_t dim) {
  ModelSpec m;
  m.kind = k;
  m.dim = dim;
  return m;
}

inline FilterSpec filter_spec(FilterKind k, bool distance_model, bool rt = false) {
  FilterSpec f;
  f.kind = k;
  f.apply_to = distance_model ? ApplyTo::HeadAndTail : ApplyTo::HeadOnly;
  f.rt_enabled = rt;
  return f;
}

inline Model<double> random_model(ModelKind kind, FilterKind filter, std::size_t entities,
                                  std::size_t relations, std::size_t dim, std::uint64_t seed,
                                  double scale = 0.5, bool rt = false) {
  InitConfig init;
  init.scale = scale;
  return Model<double>::create(model_spec(kind, dim),
                               filter_spec(filter, is_distance_model(kind), rt), entities,
                               relations, init, seed);
}

inline RunConfig synthetic_run(ModelKind kind, std::size_t dim, std::size_t epochs) {
  RunConfig c = from_key_values({});
  c.data.synthetic = true;
  c.train.model = model_spec(kind, dim);
  c.train.filter.apply_to = is_distance_model(kind) ? ApplyTo::HeadAndTail : ApplyTo::HeadOnly;
  c.train.epochs = epochs;
  c.train.telemetry.valid_every = 0;
  return c;
}

}  // namespace rscf::testing
