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

#include <ostream>
#include <utility>
#include <vector>

#include "rscf/error.hpp"
#include "rscf/eval/evaluation.hpp"
#include "rscf/model/model.hpp"

namespace rscf {

// One row per (h, r) query with the score of every candidate tail; the header
// row holds entity ids.
template <typename Real>
void export_score_distribution(std::ostream& os, const Model<Real>& model,
                               const std::vector<std::pair<EntityId, RelationId>>& queries) {
  CandidateScorer<Real> scorer(model);
  for (std::size_t e = 0; e < model.num_entities; ++e) os << (e ? "," : "") << e;
  os << '\n';
  for (const auto& [h, r] : queries) {
    if (h >= model.num_entities || r >= model.num_relations)
      throw OutOfRange("export_score_distribution: query out of range");
    const auto s = scorer.score_tails(h, r);
    for (std::size_t e = 0; e < s.size(); ++e)
      os << (e ? "," : "") << detail::fmt_double(static_cast<double>(s[e]));
    os << '\n';
  }
}

}  // namespace rscf
