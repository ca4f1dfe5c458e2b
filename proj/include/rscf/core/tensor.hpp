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
#include <span>
#include <string>
#include <vector>

#include "rscf/core/rng.hpp"
#include "rscf/error.hpp"

namespace rscf {

// Dense row-major 2-D array. Used for embedding tables as well as the shared
// affine matrices (rows = dim_in, cols = dim_out).
template <typename Real>
class EmbeddingTable {
 public:
  using value_type = Real;

  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t dim, Real fill = Real(0))
      : rows_(rows), dim_(dim), data_(rows * dim, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<Real> row(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const Real> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  Real& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  Real operator()(std::size_t i, std::size_t j) const {
    return data_[i * dim_ + j];
  }

  std::span<Real> flat() { return data_; }
  std::span<const Real> flat() const { return data_; }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](Real x) { return std::isfinite(x); });
  }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<Real> data_;
};

template <typename Real>
using AffineMatrix = EmbeddingTable<Real>;

namespace vec {

template <typename Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// p in {1, 2}.
template <typename Real>
Real pnorm(std::span<const Real> v, int p) {
  Real s = 0;
  if (p == 1) {
    for (Real x : v) s += std::abs(x);
    return s;
  }
  for (Real x : v) s += x * x;
  return std::sqrt(s);
}

// Generic p-norm for the scale diagnostics, where p is a run setting.
template <typename Real>
Real pnorm_general(std::span<const Real> v, double p) {
  if (p == 1.0 || p == 2.0) return pnorm(v, static_cast<int>(p));
  double s = 0;
  for (Real x : v) s += std::pow(std::abs(static_cast<double>(x)), p);
  return static_cast<Real>(std::pow(s, 1.0 / p));
}

template <typename Real>
Real squared_norm(std::span<const Real> v) {
  Real s = 0;
  for (Real x : v) s += x * x;
  return s;
}

template <typename Real>
void hadamard(std::span<const Real> a, std::span<const Real> b,
              std::span<Real> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

template <typename Real>
void axpy(Real alpha, std::span<const Real> x, std::span<Real> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

// out = x * M for a row vector x (length M.rows()).
template <typename Real>
void row_times_matrix(std::span<const Real> x, const AffineMatrix<Real>& m,
                      std::span<Real> out) {
  if (x.size() != m.rows() || out.size() != m.dim())
    throw ShapeMismatch("row_times_matrix: vector length " +
                        std::to_string(x.size()) + " vs matrix " +
                        std::to_string(m.rows()) + "x" +
                        std::to_string(m.dim()));
  std::fill(out.begin(), out.end(), Real(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Real xi = x[i];
    if (xi == Real(0)) continue;
    const auto r = m.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += xi * r[j];
  }
}

// Backward of out = x * M: dx += dout * M^T, dM += x^T dout.
template <typename Real>
void row_times_matrix_backward(std::span<const Real> x,
                               const AffineMatrix<Real>& m,
                               std::span<const Real> dout,
                               std::span<Real> dx, std::span<Real> dm_flat) {
  const std::size_t cols = m.dim();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    Real acc = 0;
    for (std::size_t j = 0; j < cols; ++j) acc += r[j] * dout[j];
    if (!dx.empty()) dx[i] += acc;
    if (!dm_flat.empty()) {
      const Real xi = x[i];
      Real* dst = dm_flat.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) dst[j] += xi * dout[j];
    }
  }
}

}  // namespace vec

enum class InitScheme { Uniform, Gaussian };

inline InitScheme parse_init_scheme(const std::string& s) {
  if (s == "uniform") return InitScheme::Uniform;
  if (s == "gaussian") return InitScheme::Gaussian;
  throw InvalidConfig("unknown init scheme: " + s);
}

inline std::string to_string(InitScheme s) {
  return s == InitScheme::Uniform ? "uniform" : "gaussian";
}

// Uniform: U(-b, b) with b = scale * 6 / sqrt(dim). Gaussian: N(0, scale).
template <typename Real>
EmbeddingTable<Real> init_embeddings(std::size_t rows, std::size_t dim,
                                     InitScheme scheme, double scale,
                                     Rng& rng) {
  if (rows == 0 || dim == 0)
    throw ShapeMismatch("init_embeddings: rows and dim must be >= 1");
  EmbeddingTable<Real> t(rows, dim);
  auto data = t.flat();
  if (scheme == InitScheme::Uniform) {
    const double bound = scale * 6.0 / std::sqrt(static_cast<double>(dim));
    for (auto& x : data) x = static_cast<Real>(rng.uniform(-bound, bound));
  } else {
    for (auto& x : data) x = static_cast<Real>(scale * rng.gaussian());
  }
  return t;
}

}  // namespace rscf
