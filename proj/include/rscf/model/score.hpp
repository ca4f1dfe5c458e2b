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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rscf/core/tensor.hpp"
#include "rscf/error.hpp"

namespace rscf {

enum class ModelKind { TransE, RotatE, ComplEx, CP, Rescal };

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "TransE" || s == "transe") return ModelKind::TransE;
  if (s == "RotatE" || s == "rotate") return ModelKind::RotatE;
  if (s == "ComplEX" || s == "ComplEx" || s == "complex") return ModelKind::ComplEx;
  if (s == "CP" || s == "cp") return ModelKind::CP;
  if (s == "RESCAL" || s == "Rescal" || s == "rescal") return ModelKind::Rescal;
  throw InvalidConfig("unknown model kind: " + s);
}

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::TransE: return "TransE";
    case ModelKind::RotatE: return "RotatE";
    case ModelKind::ComplEx: return "ComplEX";
    case ModelKind::CP: return "CP";
    case ModelKind::Rescal: return "RESCAL";
  }
  return "?";
}

// Distance-based models score by a negated distance; the rest are
// tensor-decomposition models.
inline bool is_distance_model(ModelKind k) {
  return k == ModelKind::TransE || k == ModelKind::RotatE;
}

struct ModelSpec {
  ModelKind kind = ModelKind::ComplEx;
  std::size_t dim = 0;  // stored entity dimension
  int distance_p = 1;   // 1 or 2, distance models only

  bool distance_based() const { return is_distance_model(kind); }

  // Length of a relation parameter row: RotatE stores phases (dim/2), RESCAL a
  // dim x dim matrix, everything else dim.
  std::size_t relation_dim() const {
    switch (kind) {
      case ModelKind::RotatE: return dim / 2;
      case ModelKind::Rescal: return dim * dim;
      default: return dim;
    }
  }

  void validate() const {
    if (dim == 0) throw InvalidConfig("model dim must be >= 1");
    if ((kind == ModelKind::RotatE || kind == ModelKind::ComplEx) && dim % 2 != 0)
      throw InvalidConfig(to_string(kind) + " needs an even stored dimension");
    if (distance_p != 1 && distance_p != 2)
      throw InvalidConfig("distance p must be 1 or 2");
  }
};

namespace detail {

inline void check_shapes(const ModelSpec& m, std::size_t h, std::size_t r,
                         std::size_t t) {
  if (h != m.dim || t != m.dim || r != m.relation_dim())
    throw ShapeMismatch("score: expected entity dim " + std::to_string(m.dim) +
                        " and relation dim " + std::to_string(m.relation_dim()) +
                        ", got h=" + std::to_string(h) + " r=" + std::to_string(r) +
                        " t=" + std::to_string(t));
}

}  // namespace detail

// Plausibility of (h, r, t); higher is better for every kind.
//
//   TransE   -||h + r - t||_p
//   RotatE   -||h o e^{i theta} - t||  (p=1: sum of complex moduli, p=2: l2)
//   ComplEX  Re<h, r, conj(t)>
//   CP       <h, r, t>
//   RESCAL   h^T R t
//
// Complex vectors store real parts in the first half and imaginary parts in
// the second half.
template <typename Real>
Real score(const ModelSpec& m, std::span<const Real> h, std::span<const Real> r,
           std::span<const Real> t) {
  detail::check_shapes(m, h.size(), r.size(), t.size());
  const std::size_t n = m.dim;
  switch (m.kind) {
    case ModelKind::TransE: {
      Real acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const Real z = h[i] + r[i] - t[i];
        acc += m.distance_p == 1 ? std::abs(z) : z * z;
      }
      return m.distance_p == 1 ? -acc : -std::sqrt(acc);
    }
    case ModelKind::RotatE: {
      const std::size_t k = n / 2;
      Real acc = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const Real c = std::cos(r[i]), s = std::sin(r[i]);
        const Real zr = h[i] * c - h[k + i] * s - t[i];
        const Real zi = h[i] * s + h[k + i] * c - t[k + i];
        const Real sq = zr * zr + zi * zi;
        acc += m.distance_p == 1 ? std::sqrt(sq) : sq;
      }
      return m.distance_p == 1 ? -acc : -std::sqrt(acc);
    }
    case ModelKind::ComplEx: {
      const std::size_t k = n / 2;
      Real acc = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const Real a = h[i], b = h[k + i], c = r[i], d = r[k + i];
        const Real e = t[i], f = t[k + i];
        acc += a * c * e + b * c * f + a * d * f - b * d * e;
      }
      return acc;
    }
    case ModelKind::CP: {
      Real acc = 0;
      for (std::size_t i = 0; i < n; ++i) acc += h[i] * r[i] * t[i];
      return acc;
    }
    case ModelKind::Rescal: {
      Real acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        Real row = 0;
        for (std::size_t j = 0; j < n; ++j) row += r[i * n + j] * t[j];
        acc += h[i] * row;
      }
      return acc;
    }
  }
  return 0;
}

// Accumulates g * d score / d{h, r, t} into dh, dr, dt. Empty spans are
// skipped.
template <typename Real>
void score_backward(const ModelSpec& m, std::span<const Real> h,
                    std::span<const Real> r, std::span<const Real> t, Real g,
                    std::span<Real> dh, std::span<Real> dr, std::span<Real> dt) {
  const std::size_t n = m.dim;
  switch (m.kind) {
    case ModelKind::TransE: {
      Real norm = 0;
      if (m.distance_p == 2) {
        for (std::size_t i = 0; i < n; ++i) {
          const Real z = h[i] + r[i] - t[i];
          norm += z * z;
        }
        norm = std::sqrt(norm);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Real z = h[i] + r[i] - t[i];
        Real dz;
        if (m.distance_p == 1)
          dz = z > 0 ? Real(1) : (z < 0 ? Real(-1) : Real(0));
        else
          dz = norm > 0 ? z / norm : Real(0);
        const Real gz = -g * dz;
        if (!dh.empty()) dh[i] += gz;
        if (!dr.empty()) dr[i] += gz;
        if (!dt.empty()) dt[i] -= gz;
      }
      return;
    }
    case ModelKind::RotatE: {
      const std::size_t k = n / 2;
      Real norm = 0;
      if (m.distance_p == 2) {
        for (std::size_t i = 0; i < k; ++i) {
          const Real c = std::cos(r[i]), s = std::sin(r[i]);
          const Real zr = h[i] * c - h[k + i] * s - t[i];
          const Real zi = h[i] * s + h[k + i] * c - t[k + i];
          norm += zr * zr + zi * zi;
        }
        norm = std::sqrt(norm);
      }
      for (std::size_t i = 0; i < k; ++i) {
        const Real c = std::cos(r[i]), s = std::sin(r[i]);
        const Real a = h[i], b = h[k + i];
        const Real zr = a * c - b * s - t[i];
        const Real zi = a * s + b * c - t[k + i];
        const Real denom = m.distance_p == 1 ? std::sqrt(zr * zr + zi * zi) : norm;
        if (denom <= 0) continue;
        const Real gr = -g * zr / denom;
        const Real gi = -g * zi / denom;
        if (!dh.empty()) {
          dh[i] += gr * c + gi * s;
          dh[k + i] += -gr * s + gi * c;
        }
        if (!dr.empty()) dr[i] += gr * (-a * s - b * c) + gi * (a * c - b * s);
        if (!dt.empty()) {
          dt[i] -= gr;
          dt[k + i] -= gi;
        }
      }
      return;
    }
    case ModelKind::ComplEx: {
      const std::size_t k = n / 2;
      for (std::size_t i = 0; i < k; ++i) {
        const Real a = h[i], b = h[k + i], c = r[i], d = r[k + i];
        const Real e = t[i], f = t[k + i];
        if (!dh.empty()) {
          dh[i] += g * (c * e + d * f);
          dh[k + i] += g * (c * f - d * e);
        }
        if (!dr.empty()) {
          dr[i] += g * (a * e + b * f);
          dr[k + i] += g * (a * f - b * e);
        }
        if (!dt.empty()) {
          dt[i] += g * (a * c - b * d);
          dt[k + i] += g * (b * c + a * d);
        }
      }
      return;
    }
    case ModelKind::CP: {
      for (std::size_t i = 0; i < n; ++i) {
        if (!dh.empty()) dh[i] += g * r[i] * t[i];
        if (!dr.empty()) dr[i] += g * h[i] * t[i];
        if (!dt.empty()) dt[i] += g * h[i] * r[i];
      }
      return;
    }
    case ModelKind::Rescal: {
      for (std::size_t i = 0; i < n; ++i) {
        Real row = 0;
        for (std::size_t j = 0; j < n; ++j) {
          row += r[i * n + j] * t[j];
          if (!dr.empty()) dr[i * n + j] += g * h[i] * t[j];
        }
        if (!dh.empty()) dh[i] += g * row;
      }
      if (!dt.empty()) {
        for (std::size_t j = 0; j < n; ++j) {
          Real col = 0;
          for (std::size_t i = 0; i < n; ++i) col += h[i] * r[i * n + j];
          dt[j] += g * col;
        }
      }
      return;
    }
  }
}

// Tensor-decomposition scores are linear in the tail: score = <q(h, r), t>.
template <typename Real>
void tdm_query(const ModelSpec& m, std::span<const Real> h,
               std::span<const Real> r, std::span<Real> q) {
  const std::size_t n = m.dim;
  switch (m.kind) {
    case ModelKind::ComplEx: {
      const std::size_t k = n / 2;
      for (std::size_t i = 0; i < k; ++i) {
        const Real a = h[i], b = h[k + i], c = r[i], d = r[k + i];
        q[i] = a * c - b * d;
        q[k + i] = b * c + a * d;
      }
      return;
    }
    case ModelKind::CP:
      for (std::size_t i = 0; i < n; ++i) q[i] = h[i] * r[i];
      return;
    case ModelKind::Rescal:
      for (std::size_t j = 0; j < n; ++j) {
        Real acc = 0;
        for (std::size_t i = 0; i < n; ++i) acc += h[i] * r[i * n + j];
        q[j] = acc;
      }
      return;
    default:
      throw UnsupportedModel("tdm_query: " + to_string(m.kind) + " is distance-based");
  }
}

template <typename Real>
void tdm_query_backward(const ModelSpec& m, std::span<const Real> h,
                        std::span<const Real> r, std::span<const Real> dq,
                        std::span<Real> dh, std::span<Real> dr) {
  const std::size_t n = m.dim;
  switch (m.kind) {
    case ModelKind::ComplEx: {
      const std::size_t k = n / 2;
      for (std::size_t i = 0; i < k; ++i) {
        const Real a = h[i], b = h[k + i], c = r[i], d = r[k + i];
        const Real gr = dq[i], gi = dq[k + i];
        if (!dh.empty()) {
          dh[i] += gr * c + gi * d;
          dh[k + i] += -gr * d + gi * c;
        }
        if (!dr.empty()) {
          dr[i] += gr * a + gi * b;
          dr[k + i] += -gr * b + gi * a;
        }
      }
      return;
    }
    case ModelKind::CP:
      for (std::size_t i = 0; i < n; ++i) {
        if (!dh.empty()) dh[i] += dq[i] * r[i];
        if (!dr.empty()) dr[i] += dq[i] * h[i];
      }
      return;
    case ModelKind::Rescal:
      for (std::size_t i = 0; i < n; ++i) {
        Real acc = 0;
        for (std::size_t j = 0; j < n; ++j) {
          acc += r[i * n + j] * dq[j];
          if (!dr.empty()) dr[i * n + j] += h[i] * dq[j];
        }
        if (!dh.empty()) dh[i] += acc;
      }
      return;
    default:
      throw UnsupportedModel("tdm_query_backward: " + to_string(m.kind) +
                             " is distance-based");
  }
}

struct IdentityTail {
  template <typename Real>
  std::span<const Real> operator()(std::size_t, std::span<const Real> e,
                                   std::vector<Real>&) const {
    return e;
  }
};

// scores[e] = score(h, r, tail_transform(e)) for every row of the table.
// `tail_transform(id, row, scratch)` returns the (possibly transformed) tail.
template <typename Real, typename TailTransform = IdentityTail>
std::vector<Real> score_all_tails(const ModelSpec& m, std::span<const Real> h,
                                  std::span<const Real> r,
                                  const EmbeddingTable<Real>& entities,
                                  TailTransform&& tail_transform = {}) {
  if (entities.dim() != m.dim)
    throw ShapeMismatch("score_all_tails: entity table dim mismatch");
  detail::check_shapes(m, h.size(), r.size(), m.dim);
  std::vector<Real> out(entities.rows());
  std::vector<Real> scratch(m.dim);
  for (std::size_t e = 0; e < entities.rows(); ++e) {
    auto t = tail_transform(e, entities.row(e), scratch);
    out[e] = score<Real>(m, h, r, t);
  }
  return out;
}

// scores[r] = score(h, r, t) over every relation row (base embeddings).
template <typename Real>
std::vector<Real> score_all_relations(const ModelSpec& m, std::span<const Real> h,
                                      std::span<const Real> t,
                                      const EmbeddingTable<Real>& relations,
                                      std::size_t count = 0) {
  if (relations.dim() != m.relation_dim())
    throw ShapeMismatch("score_all_relations: relation table dim mismatch");
  const std::size_t n = count == 0 ? relations.rows() : count;
  std::vector<Real> out(n);
  for (std::size_t r = 0; r < n; ++r) out[r] = score<Real>(m, h, relations.row(r), t);
  return out;
}

}  // namespace rscf
