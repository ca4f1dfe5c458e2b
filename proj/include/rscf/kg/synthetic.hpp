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
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rscf/core/rng.hpp"
#include "rscf/kg/data.hpp"

namespace rscf {

// Deterministic toy KG with learnable structure.
//
// Entities sit on a width x height torus. Half of the relations are "base"
// translations by a random offset; the rest are compositions (sums of two base
// offsets). Every head has its translated image as a tail and, with
// probability `second_tail_prob`, also the cell one step further along y, so
// relations are partly 1-to-N. Valid and test triples are held out at random
// from the full fact set; the remaining facts form train.
struct SyntheticKgConfig {
  std::size_t width = 20;
  std::size_t height = 10;
  std::size_t base_relations = 6;
  std::size_t composed_relations = 6;
  double second_tail_prob = 0.5;
  double valid_fraction = 0.08;
  double test_fraction = 0.08;
  std::uint64_t seed = 17;
};

struct SyntheticKg {
  std::vector<RawTriple> train;
  std::vector<RawTriple> valid;
  std::vector<RawTriple> test;

  Dataset dataset() const { return make_dataset(train, valid, test); }
};

inline SyntheticKg make_synthetic_kg(const SyntheticKgConfig& cfg = {}) {
  Rng rng(cfg.seed, 0x5eed);
  const auto w = static_cast<long>(cfg.width);
  const auto h = static_cast<long>(cfg.height);
  auto cell = [&](long x, long y) {
    x = ((x % w) + w) % w;
    y = ((y % h) + h) % h;
    return "e" + std::to_string(y * w + x);
  };

  std::vector<std::pair<long, long>> offsets;
  for (std::size_t i = 0; i < cfg.base_relations; ++i) {
    long dx = 0, dy = 0;
    while (dx == 0 && dy == 0) {
      dx = static_cast<long>(rng.below(cfg.width));
      dy = static_cast<long>(rng.below(cfg.height));
    }
    offsets.emplace_back(dx, dy);
  }
  for (std::size_t i = 0; i < cfg.composed_relations; ++i) {
    const auto a = rng.below(cfg.base_relations);
    auto b = rng.below(cfg.base_relations);
    if (cfg.base_relations > 1)
      while (b == a) b = rng.below(cfg.base_relations);
    offsets.emplace_back(offsets[a].first + offsets[b].first,
                         offsets[a].second + offsets[b].second);
  }

  std::vector<RawTriple> facts;
  for (std::size_t r = 0; r < offsets.size(); ++r) {
    const std::string rel = "r" + std::to_string(r);
    const auto [dx, dy] = offsets[r];
    for (long y = 0; y < h; ++y)
      for (long x = 0; x < w; ++x) {
        facts.push_back({cell(x, y), rel, cell(x + dx, y + dy)});
        if (rng.uniform() < cfg.second_tail_prob)
          facts.push_back({cell(x, y), rel, cell(x + dx, y + dy + 1)});
      }
  }
  rng.shuffle(facts.begin(), facts.end());

  SyntheticKg kg;
  const auto n = facts.size();
  const auto n_valid = static_cast<std::size_t>(cfg.valid_fraction * n);
  const auto n_test = static_cast<std::size_t>(cfg.test_fraction * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_valid)
      kg.valid.push_back(facts[i]);
    else if (i < n_valid + n_test)
      kg.test.push_back(facts[i]);
    else
      kg.train.push_back(facts[i]);
  }
  return kg;
}

inline void write_triples(std::ostream& out, const std::vector<RawTriple>& ts) {
  for (const auto& t : ts) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

}  // namespace rscf
