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

#include "rscf/core/tensor.hpp"
#include "rscf/error.hpp"

namespace rscf {

enum class FilterKind { None, SfbrDiag, SfbrLinear2, SfbrN, Rscf, RscfLinear2 };

inline FilterKind parse_filter_kind(const std::string& s) {
  if (s == "None" || s == "none") return FilterKind::None;
  if (s == "SfbrDiag" || s == "sfbr-diag") return FilterKind::SfbrDiag;
  if (s == "SfbrLinear2" || s == "sfbr-linear2") return FilterKind::SfbrLinear2;
  if (s == "SfbrN" || s == "sfbr-n") return FilterKind::SfbrN;
  if (s == "Rscf" || s == "rscf") return FilterKind::Rscf;
  if (s == "RscfLinear2" || s == "rscf-linear2") return FilterKind::RscfLinear2;
  throw InvalidConfig("unknown filter kind: " + s);
}

inline std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::None: return "None";
    case FilterKind::SfbrDiag: return "SfbrDiag";
    case FilterKind::SfbrLinear2: return "SfbrLinear2";
    case FilterKind::SfbrN: return "SfbrN";
    case FilterKind::Rscf: return "Rscf";
    case FilterKind::RscfLinear2: return "RscfLinear2";
  }
  return "?";
}

inline bool is_linear2(FilterKind k) {
  return k == FilterKind::SfbrLinear2 || k == FilterKind::RscfLinear2;
}
inline bool is_sfbr(FilterKind k) {
  return k == FilterKind::SfbrDiag || k == FilterKind::SfbrLinear2 ||
         k == FilterKind::SfbrN;
}
inline bool is_rscf(FilterKind k) {
  return k == FilterKind::Rscf || k == FilterKind::RscfLinear2;
}

enum class ApplyTo { HeadAndTail, HeadOnly };

// Where the +1 goes when an RSCF change vector is turned into a Linear-2
// operator: on all four blocks, or only on the diagonal blocks (zero change is
// then the identity operator).
enum class Linear2AddOne { DiagonalBlocks, AllBlocks };

struct FilterSpec {
  FilterKind kind = FilterKind::None;
  int p = 2;
  ApplyTo apply_to = ApplyTo::HeadAndTail;
  bool rt_enabled = false;
  double zero_change_epsilon = 1e-12;
  Linear2AddOne linear2_add_one = Linear2AddOne::DiagonalBlocks;
};

// Result of N_p: either a unit vector or the ZeroChange marker (the output is
// then all zeros, so the rooted transform falls back to the identity).
struct NormalizeResult {
  bool zero_change = false;
  double norm = 0.0;
};

// out = v / ||v||_p, or zeros when ||v||_p < eps.
template <typename Real>
NormalizeResult p_normalize(std::span<const Real> v, int p, double eps,
                            std::span<Real> out) {
  const Real norm = vec::pnorm(v, p);
  if (!(static_cast<double>(norm) >= eps)) {
    std::fill(out.begin(), out.end(), Real(0));
    return {true, static_cast<double>(norm)};
  }
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return {false, static_cast<double>(norm)};
}

template <typename Real>
std::vector<Real> p_normalize(std::span<const Real> v, int p, double eps,
                              bool* zero_change = nullptr) {
  std::vector<Real> out(v.size());
  const auto res = p_normalize(v, p, eps, std::span<Real>(out));
  if (zero_change) *zero_change = res.zero_change;
  return out;
}

// dv += J_N(v)^T dout. No contribution on ZeroChange.
template <typename Real>
void p_normalize_backward(std::span<const Real> v, int p, double eps,
                          std::span<const Real> dout, std::span<Real> dv) {
  const Real norm = vec::pnorm(v, p);
  if (!(static_cast<double>(norm) >= eps)) return;
  if (p == 2) {
    Real proj = 0;
    for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * dout[i];
    proj /= norm * norm;
    for (std::size_t i = 0; i < v.size(); ++i) dv[i] += (dout[i] - v[i] * proj) / norm;
    return;
  }
  Real proj = 0;
  for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * dout[i];
  proj /= norm * norm;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Real sgn = v[i] > 0 ? Real(1) : (v[i] < 0 ? Real(-1) : Real(0));
    dv[i] += dout[i] / norm - sgn * proj;
  }
}

// N_p(v) + 1 written into out; on ZeroChange out is all ones.
template <typename Real>
void unit_change(std::span<const Real> v, int p, double eps, std::span<Real> out) {
  p_normalize(v, p, eps, out);
  for (auto& x : out) x += Real(1);
}

// ---------------------------------------------------------------------------
// Linear-2 block operator.
//
// A length-2n vector is split into w1..w4 (each n/2) forming
//   [diag(w1) diag(w2)]
//   [diag(w3) diag(w4)]
// which multiplies e = [e1; e2].

template <typename Real>
void linear2_apply(std::span<const Real> w, std::span<const Real> e,
                   std::span<Real> out) {
  const std::size_t n = e.size();
  if (n % 2 != 0) throw ShapeMismatch("Linear-2 needs an even dimension");
  if (w.size() != 2 * n) throw ShapeMismatch("Linear-2 weights must have length 2n");
  const std::size_t k = n / 2;
  const Real* w1 = w.data();
  const Real* w2 = w1 + k;
  const Real* w3 = w2 + k;
  const Real* w4 = w3 + k;
  for (std::size_t i = 0; i < k; ++i) {
    const Real e1 = e[i], e2 = e[k + i];
    out[i] = w1[i] * e1 + w2[i] * e2;
    out[k + i] = w3[i] * e1 + w4[i] * e2;
  }
}

template <typename Real>
void linear2_backward(std::span<const Real> w, std::span<const Real> e,
                      std::span<const Real> dout, std::span<Real> dw,
                      std::span<Real> de) {
  const std::size_t k = e.size() / 2;
  for (std::size_t i = 0; i < k; ++i) {
    const Real e1 = e[i], e2 = e[k + i];
    const Real g1 = dout[i], g2 = dout[k + i];
    if (!dw.empty()) {
      dw[i] += g1 * e1;
      dw[k + i] += g1 * e2;
      dw[2 * k + i] += g2 * e1;
      dw[3 * k + i] += g2 * e2;
    }
    if (!de.empty()) {
      de[i] += w[i] * g1 + w[2 * k + i] * g2;
      de[k + i] += w[k + i] * g1 + w[3 * k + i] * g2;
    }
  }
}

template <typename Real>
class Linear2Operator {
 public:
  explicit Linear2Operator(std::vector<Real> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.size() % 4 != 0)
      throw ShapeMismatch("Linear-2 change vector length must be a multiple of 4");
  }

  std::size_t dim() const { return blocks_.size() / 2; }
  std::span<const Real> blocks() const { return blocks_; }

  std::vector<Real> apply(std::span<const Real> e) const {
    std::vector<Real> out(e.size());
    linear2_apply<Real>(blocks_, e, out);
    return out;
  }

  // Dense n x n matrix M with out = M e.
  EmbeddingTable<Real> dense() const {
    const std::size_t n = dim(), k = n / 2;
    EmbeddingTable<Real> m(n, n, Real(0));
    for (std::size_t i = 0; i < k; ++i) {
      m(i, i) = blocks_[i];
      m(i, k + i) = blocks_[k + i];
      m(k + i, i) = blocks_[2 * k + i];
      m(k + i, k + i) = blocks_[3 * k + i];
    }
    return m;
  }

 private:
  std::vector<Real> blocks_;
};

// Builds the operator from a length-2n change vector as given (no add-one).
template <typename Real>
Linear2Operator<Real> build_linear2_matrix(std::span<const Real> change) {
  if (change.size() % 4 != 0)
    throw ShapeMismatch("build_linear2_matrix: stored dimension must be even");
  return Linear2Operator<Real>(std::vector<Real>(change.begin(), change.end()));
}

// RSCF-Linear2 change vector: N_p(r A1') plus ones on the blocks selected by
// `mode`.
template <typename Real>
void rscf_linear2_blocks(std::span<const Real> ra, int p, double eps,
                         Linear2AddOne mode, std::span<Real> out) {
  p_normalize(ra, p, eps, out);
  const std::size_t k = out.size() / 4;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t block = i / k;
    if (mode == Linear2AddOne::AllBlocks || block == 0 || block == 3) out[i] += Real(1);
  }
}

// ---------------------------------------------------------------------------
// Standalone transforms. The training path goes through Model, which reuses
// the primitives above; these are the direct forms used by tools and tests.

// e_r = (N_p(r A1) + 1) (x) e; e_r = e on ZeroChange.
template <typename Real>
std::vector<Real> rscf_entity_transform(std::span<const Real> e,
                                        std::span<const Real> r,
                                        const AffineMatrix<Real>& a1, int p,
                                        double eps = 1e-12) {
  if (a1.dim() != e.size())
    throw ShapeMismatch("rscf_entity_transform: A1 output dim != entity dim");
  std::vector<Real> ra(a1.dim()), factor(a1.dim()), out(e.size());
  vec::row_times_matrix<Real>(r, a1, ra);
  unit_change<Real>(ra, p, eps, factor);
  vec::hadamard<Real>(factor, e, out);
  return out;
}

// Distance models: r_ht = (N_p(h A2) + 1) (x) (N_p(t A3) + 1) (x) r.
// Tensor models (a3 == nullptr): r_h = (N_p(h A2) + 1) (x) r.
template <typename Real>
std::vector<Real> rscf_relation_transform(std::span<const Real> r,
                                          std::span<const Real> h,
                                          std::span<const Real> t,
                                          const AffineMatrix<Real>& a2,
                                          const AffineMatrix<Real>* a3, int p,
                                          double eps = 1e-12) {
  if (a2.dim() != r.size() || (a3 && a3->dim() != r.size()))
    throw ShapeMismatch("rscf_relation_transform: A2/A3 output dim != relation dim");
  std::vector<Real> tmp(r.size()), factor(r.size()), out(r.begin(), r.end());
  vec::row_times_matrix<Real>(h, a2, tmp);
  unit_change<Real>(tmp, p, eps, factor);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor[i];
  if (a3) {
    vec::row_times_matrix<Real>(t, *a3, tmp);
    unit_change<Real>(tmp, p, eps, factor);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor[i];
  }
  return out;
}

enum class SfbrVariant { Diag, Linear2, N };

// Diag: w (x) e + b.  Linear2: block operator from w (length 2n).
// N: (N_p(w) + 1) (x) e.
template <typename Real>
std::vector<Real> sfbr_transform(std::span<const Real> e, std::span<const Real> w,
                                 std::span<const Real> b, SfbrVariant variant,
                                 int p = 2, double eps = 1e-12) {
  std::vector<Real> out(e.size());
  switch (variant) {
    case SfbrVariant::Diag:
      if (w.size() != e.size() || (!b.empty() && b.size() != e.size()))
        throw ShapeMismatch("sfbr_transform: weight/bias length mismatch");
      for (std::size_t i = 0; i < e.size(); ++i)
        out[i] = w[i] * e[i] + (b.empty() ? Real(0) : b[i]);
      break;
    case SfbrVariant::Linear2:
      linear2_apply<Real>(w, e, out);
      break;
    case SfbrVariant::N: {
      if (w.size() != e.size()) throw ShapeMismatch("sfbr_transform: weight length mismatch");
      std::vector<Real> factor(e.size());
      unit_change<Real>(w, p, eps, factor);
      vec::hadamard<Real>(factor, e, out);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// A relation-specific entity filter materialised for one relation.

template <typename Real>
struct EntityFilterOp {
  enum class Shape { Identity, Diagonal, Linear2 };
  Shape shape = Shape::Identity;
  std::vector<Real> weights;  // diag: n, linear2: 2n
  std::vector<Real> bias;     // empty unless SFBR Diag

  void apply(std::span<const Real> e, std::span<Real> out) const {
    switch (shape) {
      case Shape::Identity:
        std::copy(e.begin(), e.end(), out.begin());
        return;
      case Shape::Diagonal:
        for (std::size_t i = 0; i < e.size(); ++i)
          out[i] = weights[i] * e[i] + (bias.empty() ? Real(0) : bias[i]);
        return;
      case Shape::Linear2:
        linear2_apply<Real>(weights, e, out);
        return;
    }
  }

  // de += d/de, dweights += d/dweights, dbias += d/dbias (spans may be empty).
  void backward(std::span<const Real> e, std::span<const Real> dout,
                std::span<Real> de, std::span<Real> dweights,
                std::span<Real> dbias) const {
    switch (shape) {
      case Shape::Identity:
        if (!de.empty())
          for (std::size_t i = 0; i < e.size(); ++i) de[i] += dout[i];
        return;
      case Shape::Diagonal:
        for (std::size_t i = 0; i < e.size(); ++i) {
          if (!de.empty()) de[i] += weights[i] * dout[i];
          if (!dweights.empty()) dweights[i] += e[i] * dout[i];
          if (!dbias.empty()) dbias[i] += dout[i];
        }
        return;
      case Shape::Linear2:
        linear2_backward<Real>(weights, e, dout, dweights, de);
        return;
    }
  }
};

}  // namespace rscf
