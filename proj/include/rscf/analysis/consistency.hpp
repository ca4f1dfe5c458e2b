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
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rscf/core/rng.hpp"
#include "rscf/error.hpp"
#include "rscf/model/transforms.hpp"

namespace rscf {

struct ConsistencySimConfig {
  std::size_t dim = 32;
  std::size_t samples = 10000;
  std::array<double, 3> thresholds = {1.0, 1.01, 1.02};
  int p = 2;
  double line_scale_max = 3.0;  // on-a-line s is drawn from U(-max, max), |s| > 1
  std::uint64_t seed = 7;
  std::size_t workers = 1;

  void validate() const {
    if (dim == 0) throw InvalidConfig("dim must be >= 1");
    if (samples == 0) throw InvalidConfig("samples must be >= 1");
    for (double t : thresholds)
      if (!(t >= 1.0)) throw InvalidConfig("ratio thresholds must be >= 1");
    if (p != 1 && p != 2) throw InvalidConfig("p must be 1 or 2");
    if (!(line_scale_max > 1.0)) throw InvalidConfig("line_scale_max must exceed 1");
    if (workers == 0) throw InvalidConfig("workers must be >= 1");
  }
};

inline constexpr std::array<const char*, 3> kConsistencyRows = {"Transformation",
                                                                 "Normalization", "AddOne"};

struct ConsistencyReport {
  ConsistencySimConfig config;
  std::array<std::string, 4> columns;
  // rates[row][col]; rows follow kConsistencyRows.
  std::array<std::array<double, 4>, 3> rates{};
  std::array<std::array<std::size_t, 4>, 3> successes{};
  std::size_t rejected_line_samples = 0;
  std::size_t rejected_matrices = 0;
};

namespace detail {

inline std::string format_threshold(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Rank check by Gaussian elimination with partial pivoting.
inline bool full_rank(std::vector<double> m, std::size_t n) {
  double scale = 0;
  for (double x : m) scale = std::max(scale, std::abs(x));
  const double tol = 1e-12 * std::max(1.0, scale) * static_cast<double>(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
    if (std::abs(m[piv * n + c]) <= tol) return false;
    if (piv != c)
      for (std::size_t j = 0; j < n; ++j) std::swap(m[c * n + j], m[piv * n + j]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r * n + c] / m[c * n + c];
      for (std::size_t j = c; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
    }
  }
  return true;
}

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct McCounts {
  std::array<std::array<std::size_t, 4>, 3> ok{};
  std::size_t rejected_line = 0;
  std::size_t rejected_matrix = 0;
};

inline constexpr std::size_t kMcChunk = 250;

// One chunk of one condition column; its own stream keeps results
// independent of how chunks are spread over workers.
inline void mc_chunk(const ConsistencySimConfig& cfg, std::size_t col, std::size_t chunk,
                     McCounts& counts) {
  const std::size_t n = cfg.dim;
  Rng rng(cfg.seed, (static_cast<std::uint64_t>(col) << 32) | chunk);
  const std::size_t lo = chunk * kMcChunk;
  const std::size_t hi = std::min(cfg.samples, lo + kMcChunk);
  std::vector<double> m(n * n), a(n), b(n), c(n);
  std::array<std::vector<double>, 3> img{std::vector<double>(n), std::vector<double>(n),
                                         std::vector<double>(n)};
  std::array<std::vector<double>, 3> nrm = img;
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  auto gauss = [&](std::vector<double>& v) {
    for (auto& x : v) x = rng.gaussian();
  };
  for (std::size_t s = lo; s < hi; ++s) {
    do {
      for (auto& x : m) x = sd * rng.gaussian();
      if (full_rank(m, n)) break;
      ++counts.rejected_matrix;
    } while (true);

    if (col == 0) {
      gauss(a);
      gauss(b);
      double t = 0;
      do {
        t = rng.uniform(-cfg.line_scale_max, cfg.line_scale_max);
        if (std::abs(t) - 1.0 >= 1e-9) break;
        ++counts.rejected_line;
      } while (true);
      for (std::size_t i = 0; i < n; ++i) c[i] = a[i] + t * (b[i] - a[i]);
    } else {
      const double thr = cfg.thresholds[col - 1];
      do {
        gauss(a);
        gauss(b);
        gauss(c);
      } while (!(dist(a, c) > thr * dist(a, b)));
    }

    const std::array<const std::vector<double>*, 3> pts = {&a, &b, &c};
    for (std::size_t k = 0; k < 3; ++k) {
      std::fill(img[k].begin(), img[k].end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) img[k][j] += (*pts[k])[i] * m[i * n + j];
      p_normalize<double>(img[k], cfg.p, 1e-12, nrm[k]);
    }
    // (a) x -> xM
    const bool ta = dist(img[0], img[2]) > dist(img[0], img[1]);
    // (b) x -> N_p(xM)
    const bool tb = dist(nrm[0], nrm[2]) > dist(nrm[0], nrm[1]);
    // (c) adding the ones vector keeps the post-normalization ordering
    for (auto& v : nrm)
      for (auto& x : v) x += 1.0;
    const bool tc = (dist(nrm[0], nrm[2]) > dist(nrm[0], nrm[1])) == tb;
    counts.ok[0][col] += ta;
    counts.ok[1][col] += tb;
    counts.ok[2][col] += tc;
  }
}

}  // namespace detail

// Per trial: points A, B, C in R^n and a full-rank M with N(0, 1/n) entries.
// Column 0 places C on the line through A and B beyond B's distance; columns
// 1..3 resample until |AC|/|AB| exceeds the threshold. Rows count trials where
// |AC| > |AB| survives the map (Transformation, Normalization), and where the
// added ones vector leaves the normalized ordering unchanged (AddOne).
inline ConsistencyReport monte_carlo_consistency(const ConsistencySimConfig& cfg) {
  cfg.validate();
  const std::size_t chunks = (cfg.samples + detail::kMcChunk - 1) / detail::kMcChunk;
  const std::size_t jobs = 4 * chunks;
  std::vector<detail::McCounts> parts(jobs);
  const std::size_t workers = std::min(cfg.workers, jobs);
  auto run = [&](std::size_t w) {
    for (std::size_t j = w; j < jobs; j += workers)
      detail::mc_chunk(cfg, j / chunks, j % chunks, parts[j]);
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  ConsistencyReport rep;
  rep.config = cfg;
  rep.columns[0] = "OnALine";
  for (std::size_t k = 0; k < 3; ++k)
    rep.columns[k + 1] = "ratio>" + detail::format_threshold(cfg.thresholds[k]);
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 4; ++c) rep.successes[r][c] += p.ok[r][c];
    rep.rejected_line_samples += p.rejected_line;
    rep.rejected_matrices += p.rejected_matrix;
  }
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      rep.rates[r][c] =
          static_cast<double>(rep.successes[r][c]) / static_cast<double>(cfg.samples);
  return rep;
}

// Rates may dip between consecutive thresholds by at most 3 binomial
// standard deviations of the difference.
inline bool monotone_with_slack(const ConsistencyReport& rep, std::size_t row) {
  const double n = static_cast<double>(rep.config.samples);
  for (std::size_t c = 1; c + 1 < 4; ++c) {
    const double p1 = rep.rates[row][c], p2 = rep.rates[row][c + 1];
    const double sigma = std::sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n);
    if (p2 < p1 - 3.0 * sigma) return false;
  }
  return true;
}

inline nlohmann::ordered_json consistency_report_json(const ConsistencyReport& rep) {
  nlohmann::ordered_json j;
  j["dim"] = rep.config.dim;
  j["samples"] = rep.config.samples;
  j["p"] = rep.config.p;
  j["seed"] = rep.config.seed;
  j["columns"] = rep.columns;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < 3; ++r) {
    nlohmann::ordered_json row;
    row["name"] = kConsistencyRows[r];
    row["rates"] = rep.rates[r];
    row["successes"] = rep.successes[r];
    rows.push_back(row);
  }
  j["monotone_transformation"] = monotone_with_slack(rep, 0);
  j["monotone_normalization"] = monotone_with_slack(rep, 1);
  j["rejected_line_samples"] = rep.rejected_line_samples;
  j["rejected_matrices"] = rep.rejected_matrices;
  return j;
}

// ---------------------------------------------------------------------------
// DURA sign lemma: d/dw [w^2 (h r)^2 + w^2 h^2] = 2 w ((h r)^2 + h^2) has the
// sign of w, so the penalty always shrinks |w|.

struct DuraSignSample {
  double w = 0, h = 0, r = 0, gradient = 0;
};

struct DuraSignReport {
  std::size_t trials = 0;
  std::vector<DuraSignSample> failures;
};

inline double dura_scalar_gradient(double w, double h, double r) {
  return 2.0 * w * (h * r) * (h * r) + 2.0 * w * h * h;
}

inline DuraSignReport dura_sign_check(std::size_t trials, Rng& rng) {
  if (trials == 0) throw InvalidConfig("trials must be >= 1");
  DuraSignReport rep;
  rep.trials = trials;
  auto nonzero = [&] {
    double x = 0;
    while (std::abs(x) < 1e-12) x = rng.gaussian();
    return x;
  };
  for (std::size_t i = 0; i < trials; ++i) {
    DuraSignSample s{nonzero(), nonzero(), nonzero(), 0};
    s.gradient = dura_scalar_gradient(s.w, s.h, s.r);
    if (!((s.gradient > 0) == (s.w > 0) && s.gradient != 0)) rep.failures.push_back(s);
  }
  return rep;
}

inline nlohmann::ordered_json dura_sign_json(const DuraSignReport& rep) {
  nlohmann::ordered_json j;
  j["trials"] = rep.trials;
  j["failures"] = rep.failures.size();
  auto& ce = j["counterexamples"] = nlohmann::ordered_json::array();
  for (const auto& s : rep.failures)
    ce.push_back({{"w", s.w}, {"h", s.h}, {"r", s.r}, {"gradient", s.gradient}});
  j["pass"] = rep.failures.empty();
  return j;
}

}  // namespace rscf
