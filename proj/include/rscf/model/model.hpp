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
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "rscf/core/params.hpp"
#include "rscf/core/rng.hpp"
#include "rscf/core/tensor.hpp"
#include "rscf/error.hpp"
#include "rscf/kg/data.hpp"
#include "rscf/model/score.hpp"
#include "rscf/model/transforms.hpp"

namespace rscf {

struct InitConfig {
  InitScheme scheme = InitScheme::Gaussian;
  double scale = 1e-3;
  // Std-dev multiplier for A1/A2/A3; entries are N(0, affine_scale / sqrt(rows)).
  double affine_scale = 1.0;
};

// Scores, filters and parameter layout for one run.
//
// Tensor-decomposition models keep a reciprocal relation row per relation
// (ids [R, 2R)) so head queries are answered as tail queries of the inverse.
// While `filters_active` is false the entity filter and the relation transform
// act as the identity and their parameters receive no gradient.
template <typename Real>
class Model {
 public:
  ModelSpec spec;
  FilterSpec filter;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // base relations, without reciprocals
  ParameterStore<Real> params;
  bool filters_active = true;

  Model() = default;

  static Model create(const ModelSpec& spec, const FilterSpec& filter,
                      std::size_t num_entities, std::size_t num_relations,
                      const InitConfig& init, std::uint64_t seed) {
    Model m;
    m.spec = spec;
    m.filter = filter;
    m.num_entities = num_entities;
    m.num_relations = num_relations;
    m.validate();
    m.init_parameters(init, seed);
    return m;
  }

  void validate() const {
    spec.validate();
    if (filter.p != 1 && filter.p != 2) throw InvalidConfig("filter p must be 1 or 2");
    if (!spec.distance_based() && filter.apply_to != ApplyTo::HeadOnly)
      throw InvalidConfig("tensor-decomposition models apply filters to the head only");
    if (is_linear2(filter.kind) && spec.dim % 2 != 0)
      throw InvalidConfig("Linear-2 filters need an even dimension");
    if (num_entities == 0 || num_relations == 0)
      throw InvalidConfig("model needs at least one entity and one relation");
  }

  bool reciprocal() const { return !spec.distance_based(); }
  std::size_t relation_rows() const {
    return reciprocal() ? 2 * num_relations : num_relations;
  }
  RelationId inverse(RelationId r) const {
    return static_cast<RelationId>(r + num_relations);
  }
  std::size_t dim() const { return spec.dim; }
  std::size_t relation_dim() const { return spec.relation_dim(); }

  bool et_on() const { return filters_active && filter.kind != FilterKind::None; }
  bool rt_on() const { return filters_active && filter.rt_enabled; }
  bool tail_filtered() const {
    return et_on() && filter.apply_to == ApplyTo::HeadAndTail;
  }
  // Tensor models transform the relation with the head factor only.
  bool rt_uses_tail() const { return spec.distance_based(); }

  std::span<const Real> entity(EntityId e) const { return params[Table::Entity].row(e); }
  std::span<const Real> relation(RelationId r) const {
    return params[Table::Relation].row(r);
  }

  // Length of the filter's weight vector: 2n for Linear-2, n otherwise.
  std::size_t filter_width() const {
    return is_linear2(filter.kind) ? 2 * spec.dim : spec.dim;
  }

  // ---- entity filter ------------------------------------------------------

  EntityFilterOp<Real> entity_filter(RelationId r) const {
    EntityFilterOp<Real> op;
    if (!et_on()) return op;
    const auto n = spec.dim;
    const auto eps = filter.zero_change_epsilon;
    switch (filter.kind) {
      case FilterKind::None:
        return op;
      case FilterKind::SfbrDiag: {
        op.shape = EntityFilterOp<Real>::Shape::Diagonal;
        auto w = params[Table::SfbrW].row(r);
        auto b = params[Table::SfbrB].row(r);
        op.weights.assign(w.begin(), w.end());
        op.bias.assign(b.begin(), b.end());
        return op;
      }
      case FilterKind::SfbrLinear2: {
        op.shape = EntityFilterOp<Real>::Shape::Linear2;
        auto w = params[Table::SfbrW].row(r);
        op.weights.assign(w.begin(), w.end());
        return op;
      }
      case FilterKind::SfbrN: {
        op.shape = EntityFilterOp<Real>::Shape::Diagonal;
        op.weights.resize(n);
        unit_change<Real>(params[Table::SfbrW].row(r), filter.p, eps, op.weights);
        return op;
      }
      case FilterKind::Rscf: {
        op.shape = EntityFilterOp<Real>::Shape::Diagonal;
        std::vector<Real> ra(n);
        vec::row_times_matrix<Real>(relation(r), params[Table::A1], ra);
        op.weights.resize(n);
        unit_change<Real>(ra, filter.p, eps, op.weights);
        return op;
      }
      case FilterKind::RscfLinear2: {
        op.shape = EntityFilterOp<Real>::Shape::Linear2;
        std::vector<Real> ra(2 * n);
        vec::row_times_matrix<Real>(relation(r), params[Table::A1], ra);
        op.weights.resize(2 * n);
        rscf_linear2_blocks<Real>(ra, filter.p, eps, filter.linear2_add_one, op.weights);
        return op;
      }
    }
    return op;
  }

  // The multiplicative filter vector for relation r (all ones when inert).
  std::vector<Real> filter_vector(RelationId r) const {
    auto op = entity_filter(r);
    if (op.shape == EntityFilterOp<Real>::Shape::Identity) {
      if (is_linear2(filter.kind)) {
        std::vector<Real> v(2 * spec.dim, Real(0));
        const auto k = spec.dim / 2;
        for (std::size_t i = 0; i < k; ++i) v[i] = v[3 * k + i] = Real(1);
        return v;
      }
      return std::vector<Real>(spec.dim, Real(1));
    }
    return op.weights;
  }

  // Routes gradients w.r.t. the materialised filter weights/bias back to the
  // parameters that produced them.
  void entity_filter_backward(RelationId r, std::span<const Real> dweights,
                              std::span<const Real> dbias,
                              GradientBuffer<Real>& g) const {
    if (!et_on()) return;
    const auto eps = filter.zero_change_epsilon;
    switch (filter.kind) {
      case FilterKind::None:
        return;
      case FilterKind::SfbrDiag: {
        vec::axpy<Real>(Real(1), dweights, g.row(Table::SfbrW, r));
        vec::axpy<Real>(Real(1), dbias, g.row(Table::SfbrB, r));
        return;
      }
      case FilterKind::SfbrLinear2:
        vec::axpy<Real>(Real(1), dweights, g.row(Table::SfbrW, r));
        return;
      case FilterKind::SfbrN:
        p_normalize_backward<Real>(params[Table::SfbrW].row(r), filter.p, eps,
                                   dweights, g.row(Table::SfbrW, r));
        return;
      case FilterKind::Rscf:
      case FilterKind::RscfLinear2: {
        const auto width = filter_width();
        std::vector<Real> ra(width), dra(width, Real(0));
        vec::row_times_matrix<Real>(relation(r), params[Table::A1], ra);
        p_normalize_backward<Real>(ra, filter.p, eps, dweights, dra);
        matrix_backward(relation(r), Table::A1, dra, g.row(Table::Relation, r), g);
        return;
      }
    }
  }

  // Applies the filter op to entity e; backward accumulates into e's row and
  // the filter parameters.
  void filtered_entity_backward(const EntityFilterOp<Real>& op, RelationId r,
                                EntityId e, std::span<const Real> dout,
                                GradientBuffer<Real>& g) const {
    if (op.shape == EntityFilterOp<Real>::Shape::Identity) {
      vec::axpy<Real>(Real(1), dout, g.row(Table::Entity, e));
      return;
    }
    std::vector<Real> dw(op.weights.size(), Real(0));
    std::vector<Real> db(op.bias.size(), Real(0));
    op.backward(entity(e), dout, g.row(Table::Entity, e), dw, db);
    entity_filter_backward(r, dw, db, g);
  }

  // ---- relation transformation -------------------------------------------

  // N_p(x A) + 1 for A2 (head side) or A3 (tail side).
  std::vector<Real> relation_factor(std::span<const Real> e, Table which) const {
    std::vector<Real> tmp(relation_dim()), out(relation_dim());
    vec::row_times_matrix<Real>(e, params[which], tmp);
    unit_change<Real>(tmp, filter.p, filter.zero_change_epsilon, out);
    return out;
  }

  void relation_factor_backward(EntityId e, Table which, std::span<const Real> dfactor,
                                GradientBuffer<Real>& g) const {
    std::vector<Real> tmp(relation_dim()), dtmp(relation_dim(), Real(0));
    vec::row_times_matrix<Real>(entity(e), params[which], tmp);
    p_normalize_backward<Real>(tmp, filter.p, filter.zero_change_epsilon, dfactor, dtmp);
    matrix_backward(entity(e), which, dtmp, g.row(Table::Entity, e), g);
  }

  // ---- parameter layout -----------------------------------------------------

  void init_parameters(const InitConfig& init, std::uint64_t seed) {
    const auto n = spec.dim;
    const auto rd = relation_dim();
    {
      auto rng = Rng::for_name(seed, "entity");
      params.add(Table::Entity,
                 init_embeddings<Real>(num_entities, n, init.scheme, init.scale, rng));
    }
    {
      auto rng = Rng::for_name(seed, "relation");
      if (spec.kind == ModelKind::RotatE) {
        EmbeddingTable<Real> phases(relation_rows(), rd);
        for (auto& x : phases.flat())
          x = static_cast<Real>(rng.uniform(-std::numbers::pi, std::numbers::pi));
        params.add(Table::Relation, std::move(phases));
      } else {
        params.add(Table::Relation, init_embeddings<Real>(relation_rows(), rd, init.scheme,
                                                          init.scale, rng));
      }
    }
    auto affine = [&](std::string_view name, std::size_t rows, std::size_t cols) {
      auto rng = Rng::for_name(seed, name);
      return init_embeddings<Real>(rows, cols, InitScheme::Gaussian,
                                   init.affine_scale / std::sqrt(static_cast<double>(rows)),
                                   rng);
    };
    if (is_rscf(filter.kind)) params.add(Table::A1, affine("A1", rd, filter_width()));
    if (filter.rt_enabled) {
      params.add(Table::A2, affine("A2", n, rd));
      if (rt_uses_tail()) params.add(Table::A3, affine("A3", n, rd));
    }
    switch (filter.kind) {
      case FilterKind::SfbrDiag:
        params.add(Table::SfbrW, EmbeddingTable<Real>(relation_rows(), n, Real(1)));
        params.add(Table::SfbrB, EmbeddingTable<Real>(relation_rows(), n, Real(0)));
        break;
      case FilterKind::SfbrLinear2: {
        EmbeddingTable<Real> w(relation_rows(), 2 * n, Real(0));
        const auto k = n / 2;
        for (std::size_t r = 0; r < w.rows(); ++r)
          for (std::size_t i = 0; i < k; ++i) w(r, i) = w(r, 3 * k + i) = Real(1);
        params.add(Table::SfbrW, std::move(w));
        break;
      }
      case FilterKind::SfbrN: {
        auto rng = Rng::for_name(seed, "sfbr_w");
        params.add(Table::SfbrW,
                   init_embeddings<Real>(relation_rows(), n, InitScheme::Gaussian, 1.0, rng));
        break;
      }
      default:
        break;
    }
  }

 private:
  // Backward of y = x M with x a parameter row: dx += dy M^T and the rows of
  // M's gradient are accumulated through the buffer.
  void matrix_backward(std::span<const Real> x, Table which, std::span<const Real> dy,
                       std::span<Real> dx, GradientBuffer<Real>& g) const {
    const auto& m = params[which];
    const auto cols = m.dim();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto row = m.row(i);
      Real acc = 0;
      for (std::size_t j = 0; j < cols; ++j) acc += row[j] * dy[j];
      dx[i] += acc;
      const Real xi = x[i];
      if (xi != Real(0)) {
        auto gm = g.row(which, i);
        for (std::size_t j = 0; j < cols; ++j) gm[j] += xi * dy[j];
      }
    }
  }
};

// Scores every candidate entity for head or tail queries. Per-entity relation
// factors are query-independent and computed once.
template <typename Real>
class CandidateScorer {
 public:
  explicit CandidateScorer(const Model<Real>& model) : m_(model) {
    if (m_.spec.distance_based() && m_.rt_on()) {
      head_factors_.resize(m_.num_entities);
      tail_factors_.resize(m_.num_entities);
      for (std::size_t e = 0; e < m_.num_entities; ++e) {
        head_factors_[e] = m_.relation_factor(m_.entity(e), Table::A2);
        tail_factors_[e] = m_.relation_factor(m_.entity(e), Table::A3);
      }
    }
  }

  // scores[e] for (h, r, e). For tensor models r may be a reciprocal id.
  std::vector<Real> score_tails(EntityId h, RelationId r) const {
    std::vector<Real> out(m_.num_entities);
    if (!m_.spec.distance_based()) {
      auto q = tdm_query_vector(h, r);
      const auto& ent = m_.params[Table::Entity];
      for (std::size_t e = 0; e < out.size(); ++e) out[e] = vec::dot<Real>(q, ent.row(e));
      return out;
    }
    const auto op = m_.entity_filter(r);
    std::vector<Real> hr(m_.dim()), tr(m_.dim()), rel(m_.relation_dim());
    op.apply(m_.entity(h), hr);
    const auto base_rel = m_.relation(r);
    for (std::size_t e = 0; e < out.size(); ++e) {
      tail_side(op, static_cast<EntityId>(e), tr);
      relation_for(h, static_cast<EntityId>(e), base_rel, rel);
      out[e] = score<Real>(m_.spec, hr, rel, tr);
    }
    return out;
  }

  // scores[e] for (e, r, t). Tensor models use the reciprocal relation.
  std::vector<Real> score_heads(RelationId r, EntityId t) const {
    if (!m_.spec.distance_based()) return score_tails(t, m_.inverse(r));
    std::vector<Real> out(m_.num_entities);
    const auto op = m_.entity_filter(r);
    std::vector<Real> hr(m_.dim()), tr(m_.dim()), rel(m_.relation_dim());
    tail_side(op, t, tr);
    const auto base_rel = m_.relation(r);
    for (std::size_t e = 0; e < out.size(); ++e) {
      op.apply(m_.entity(static_cast<EntityId>(e)), hr);
      relation_for(static_cast<EntityId>(e), t, base_rel, rel);
      out[e] = score<Real>(m_.spec, hr, rel, tr);
    }
    return out;
  }

  Real score_triple(const Triple& tr) const {
    if (!m_.spec.distance_based()) {
      auto q = tdm_query_vector(tr.head, tr.relation);
      return vec::dot<Real>(q, m_.entity(tr.tail));
    }
    const auto op = m_.entity_filter(tr.relation);
    std::vector<Real> hr(m_.dim()), t(m_.dim()), rel(m_.relation_dim());
    op.apply(m_.entity(tr.head), hr);
    tail_side(op, tr.tail, t);
    relation_for(tr.head, tr.tail, m_.relation(tr.relation), rel);
    return score<Real>(m_.spec, hr, rel, t);
  }

  std::vector<Real> tdm_query_vector(EntityId h, RelationId r) const {
    const auto op = m_.entity_filter(r);
    std::vector<Real> hr(m_.dim()), q(m_.dim());
    op.apply(m_.entity(h), hr);
    std::vector<Real> rel(m_.relation(r).begin(), m_.relation(r).end());
    if (m_.rt_on()) {
      const auto f = m_.relation_factor(m_.entity(h), Table::A2);
      for (std::size_t i = 0; i < rel.size(); ++i) rel[i] *= f[i];
    }
    tdm_query<Real>(m_.spec, hr, rel, q);
    return q;
  }

 private:
  void tail_side(const EntityFilterOp<Real>& op, EntityId e, std::span<Real> out) const {
    if (m_.tail_filtered())
      op.apply(m_.entity(e), out);
    else {
      auto src = m_.entity(e);
      std::copy(src.begin(), src.end(), out.begin());
    }
  }

  void relation_for(EntityId h, EntityId t, std::span<const Real> base,
                    std::span<Real> out) const {
    if (!m_.rt_on()) {
      std::copy(base.begin(), base.end(), out.begin());
      return;
    }
    const auto& fh = head_factors_[h];
    const auto& ft = tail_factors_[t];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fh[i] * ft[i] * base[i];
  }

  const Model<Real>& m_;
  std::vector<std::vector<Real>> head_factors_;
  std::vector<std::vector<Real>> tail_factors_;
};

}  // namespace rscf
