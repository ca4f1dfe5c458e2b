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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "rscf/core/rng.hpp"
#include "rscf/error.hpp"
#include "rscf/model/model.hpp"

namespace rscf {

struct ScaleRecord {
  double transformation = 0.0;  // normalized so the inert filter reads 1.0
  double embedding = 0.0;       // mean p-norm of the filtered head
};

// Fixed random subset of at most k triples, in original order.
inline std::vector<Triple> sample_triples(std::span<const Triple> triples, std::size_t k,
                                          std::uint64_t seed) {
  if (k >= triples.size()) return {triples.begin(), triples.end()};
  std::vector<std::size_t> idx(triples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto rng = Rng::for_name(seed, "scale_sample");
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<Triple> out;
  out.reserve(k);
  for (auto i : idx) out.push_back(triples[i]);
  return out;
}

// Transformation scale is the mean of ||f||_p / n^(1/p) over the sample, where
// f is the entity filter's multiplicative vector for the triple's relation.
// Models with only a relation transform use the per-triple RT factor instead
// (head factor times tail factor for distance models), with n the relation
// row length.
template <typename Real>
ScaleRecord scale_trace(const Model<Real>& model, std::span<const Triple> sample) {
  const bool et = model.filter.kind != FilterKind::None;
  if (!et && !model.filter.rt_enabled) throw NoFilter();
  if (sample.empty()) throw EmptySplit("scale_trace: empty sample");
  const int p = model.filter.p;
  ScaleRecord rec;
  std::vector<Real> filtered(model.dim());
  for (const auto& t : sample) {
    if (et) {
      const auto v = model.filter_vector(t.relation);
      rec.transformation += static_cast<double>(vec::pnorm<Real>(v, p)) /
                            std::pow(static_cast<double>(model.dim()), 1.0 / p);
    } else {
      std::vector<Real> f(model.relation_dim(), Real(1));
      if (model.rt_on()) {
        f = model.relation_factor(model.entity(t.head), Table::A2);
        if (model.rt_uses_tail()) {
          const auto ft = model.relation_factor(model.entity(t.tail), Table::A3);
          for (std::size_t i = 0; i < f.size(); ++i) f[i] *= ft[i];
        }
      }
      rec.transformation += static_cast<double>(vec::pnorm<Real>(f, p)) /
                            std::pow(static_cast<double>(f.size()), 1.0 / p);
    }
    model.entity_filter(t.relation).apply(model.entity(t.head), filtered);
    rec.embedding += static_cast<double>(vec::pnorm<Real>(filtered, p));
  }
  rec.transformation /= static_cast<double>(sample.size());
  rec.embedding /= static_cast<double>(sample.size());
  return rec;
}

}  // namespace rscf
