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
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "rscf/core/params.hpp"
#include "rscf/core/rng.hpp"
#include "rscf/error.hpp"

namespace rscf {

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t coords_per_table = 64;
  bool full_sweep = false;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_table;
  std::size_t worst_index = 0;
  double worst_numeric = 0.0;
  double worst_analytic = 0.0;
  std::size_t coordinates_checked = 0;
};

// Central-difference check of analytic gradients.
//
// For each present table, a random subset of coordinates (all of them when the
// table is small or full_sweep is set) is perturbed by +-eps. The error per
// coordinate is |fd - an| / max(1, |fd|, |an|); the maximum is returned.
// Coordinates of tables absent from `analytic` are treated as zero-gradient.
template <typename Real>
GradCheckResult finite_difference_check(
    const std::function<double(const ParameterStore<Real>&)>& loss_fn,
    const ParameterStore<Real>& params, const GradientBuffer<Real>& analytic,
    const GradCheckOptions& opts = {}) {
  if (!(opts.eps > 0)) throw InvalidConfig("finite_difference_check: eps must be > 0");
  ParameterStore<Real> work = params;
  Rng rng(opts.seed, 0x9c4eu);
  GradCheckResult res;

  const double base = loss_fn(work);
  if (!std::isfinite(base)) throw NonFinite("finite_difference_check: loss is not finite");

  for (Table t : params.present()) {
    auto flat = work[t].flat();
    const std::size_t n = flat.size();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (!opts.full_sweep && n > opts.coords_per_table) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(opts.coords_per_table);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      const Real saved = flat[idx];
      flat[idx] = static_cast<Real>(saved + opts.eps);
      const double up = loss_fn(work);
      flat[idx] = static_cast<Real>(saved - opts.eps);
      const double down = loss_fn(work);
      flat[idx] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NonFinite("finite_difference_check: loss is not finite");
      const double fd = (up - down) / (2.0 * opts.eps);
      double an = 0.0;
      if (analytic.has(t)) an = static_cast<double>(analytic.table(t).flat()[idx]);
      const double err =
          std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      ++res.coordinates_checked;
      if (err > res.max_relative_error || res.worst_table.empty()) {
        res.max_relative_error = err;
        res.worst_table = std::string(table_name(t));
        res.worst_index = idx;
        res.worst_numeric = fd;
        res.worst_analytic = an;
      }
    }
  }
  return res;
}

}  // namespace rscf
