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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rscf/core/params.hpp"
#include "rscf/core/rng.hpp"
#include "rscf/error.hpp"
#include "rscf/kg/data.hpp"
#include "rscf/model/model.hpp"
#include "rscf/model/score.hpp"

namespace rscf {

enum class TaskLoss { CrossEntropy, SelfAdversarial };

inline TaskLoss parse_task_loss(const std::string& s) {
  if (s == "cross-entropy" || s == "ce") return TaskLoss::CrossEntropy;
  if (s == "self-adversarial" || s == "sa") return TaskLoss::SelfAdversarial;
  throw InvalidConfig("unknown task loss: " + s);
}

inline std::string to_string(TaskLoss t) {
  return t == TaskLoss::CrossEntropy ? "cross-entropy" : "self-adversarial";
}

inline TaskLoss default_task_loss(const ModelSpec& m) {
  return m.distance_based() ? TaskLoss::SelfAdversarial : TaskLoss::CrossEntropy;
}

struct LossConfig {
  std::optional<TaskLoss> task_loss;  // unset: chosen by model family
  double rp_weight = 0.0;
  double dura_weight = 0.0;
  std::size_t negatives = 256;
  double adv_temperature = 1.0;
  double margin = 12.0;

  TaskLoss effective_task_loss(const ModelSpec& m) const {
    return task_loss.value_or(default_task_loss(m));
  }

  void validate(const ModelSpec& m) const {
    if (rp_weight < 0) throw InvalidConfig("rp weight must be nonnegative");
    if (dura_weight < 0) throw InvalidConfig("dura weight must be nonnegative");
    if (effective_task_loss(m) != default_task_loss(m))
      throw UnsupportedModel(to_string(effective_task_loss(m)) + " loss is not available for " +
                             to_string(m.kind));
    if (dura_weight > 0 && m.distance_based())
      throw UnsupportedModel("DURA applies to tensor-decomposition models only");
    if (m.distance_based() && negatives == 0)
      throw InvalidConfig("self-adversarial loss needs at least one negative");
  }
};

// ---------------------------------------------------------------------------
// Scalar losses

namespace detail {

inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

// -log softmax(scores)[target]; dscores += g * d/dscores when non-empty.
template <typename Real>
double cross_entropy(std::span<const Real> scores, std::size_t target,
                     std::span<Real> dscores = {}, double g = 1.0) {
  if (target >= scores.size())
    throw OutOfRange("cross_entropy: target " + std::to_string(target) + " out of range");
  double mx = -INFINITY;
  for (Real s : scores) mx = std::max(mx, static_cast<double>(s));
  double z = 0;
  for (Real s : scores) z += std::exp(static_cast<double>(s) - mx);
  const double lse = mx + std::log(z);
  if (!dscores.empty()) {
    for (std::size_t i = 0; i < scores.size(); ++i)
      dscores[i] += static_cast<Real>(g * std::exp(static_cast<double>(scores[i]) - lse));
    dscores[target] -= static_cast<Real>(g);
  }
  return lse - static_cast<double>(scores[target]);
}

// -log sigmoid(margin + s+) - sum_i p_i log sigmoid(-margin - s_i), with
// p = softmax(temperature * s-). The gradient flows through p as well.
template <typename Real>
double self_adversarial(Real positive, std::span<const Real> negatives, double margin,
                        double temperature, Real* dpositive = nullptr,
                        std::span<Real> dnegatives = {}, double g = 1.0) {
  const double pos_term = detail::softplus(-(margin + positive));
  if (negatives.empty()) {
    if (dpositive) *dpositive += static_cast<Real>(-g * detail::sigmoid(-(margin + positive)));
    return pos_term;
  }
  double mx = -INFINITY;
  for (Real s : negatives) mx = std::max(mx, temperature * s);
  std::vector<double> p(negatives.size()), ell(negatives.size());
  double z = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(temperature * negatives[i] - mx);
    z += p[i];
  }
  double neg_term = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] /= z;
    ell[i] = detail::softplus(margin + negatives[i]);
    neg_term += p[i] * ell[i];
  }
  if (dpositive) *dpositive += static_cast<Real>(-g * detail::sigmoid(-(margin + positive)));
  if (!dnegatives.empty())
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p[i] * detail::sigmoid(margin + negatives[i]) +
                       temperature * p[i] * (ell[i] - neg_term);
      dnegatives[i] += static_cast<Real>(g * d);
    }
  return pos_term + neg_term;
}

// ||h R||^2 + ||h||^2 + ||t||^2 + ||t R^T||^2 for one triple, where R is the
// relation operator of the tensor model. Gradients scaled by g accumulate into
// the non-empty spans.
template <typename Real>
double dura_penalty(const ModelSpec& m, std::span<const Real> h, std::span<const Real> r,
                    std::span<const Real> t, std::span<Real> dh = {},
                    std::span<Real> dr = {}, std::span<Real> dt = {}, double g = 1.0) {
  detail::check_shapes(m, h.size(), r.size(), t.size());
  const std::size_t n = m.dim;
  const Real gg = static_cast<Real>(g);
  switch (m.kind) {
    case ModelKind::CP: {
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const Real r2 = r[i] * r[i], h2 = h[i] * h[i], t2 = t[i] * t[i];
        acc += h2 * r2 + h2 + t2 + t2 * r2;
        if (!dh.empty()) dh[i] += gg * 2 * h[i] * (r2 + 1);
        if (!dr.empty()) dr[i] += gg * 2 * r[i] * (h2 + t2);
        if (!dt.empty()) dt[i] += gg * 2 * t[i] * (r2 + 1);
      }
      return acc;
    }
    case ModelKind::ComplEx: {
      const std::size_t k = n / 2;
      double acc = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const Real hm = h[i] * h[i] + h[k + i] * h[k + i];
        const Real rm = r[i] * r[i] + r[k + i] * r[k + i];
        const Real tm = t[i] * t[i] + t[k + i] * t[k + i];
        acc += (hm + tm) * rm + hm + tm;
        if (!dh.empty()) {
          dh[i] += gg * 2 * h[i] * (rm + 1);
          dh[k + i] += gg * 2 * h[k + i] * (rm + 1);
        }
        if (!dr.empty()) {
          dr[i] += gg * 2 * r[i] * (hm + tm);
          dr[k + i] += gg * 2 * r[k + i] * (hm + tm);
        }
        if (!dt.empty()) {
          dt[i] += gg * 2 * t[i] * (rm + 1);
          dt[k + i] += gg * 2 * t[k + i] * (rm + 1);
        }
      }
      return acc;
    }
    case ModelKind::Rescal: {
      std::vector<Real> u(n, Real(0)), v(n, Real(0));  // u = h R, v = R t
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          u[j] += h[i] * r[i * n + j];
          v[i] += r[i * n + j] * t[j];
        }
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        acc += u[i] * u[i] + h[i] * h[i] + t[i] * t[i] + v[i] * v[i];
      for (std::size_t i = 0; i < n; ++i) {
        Real ru = 0, rv = 0;
        for (std::size_t j = 0; j < n; ++j) {
          ru += r[i * n + j] * u[j];
          rv += r[j * n + i] * v[j];
          if (!dr.empty()) dr[i * n + j] += gg * 2 * (h[i] * u[j] + v[i] * t[j]);
        }
        if (!dh.empty()) dh[i] += gg * 2 * (ru + h[i]);
        if (!dt.empty()) dt[i] += gg * 2 * (t[i] + rv);
      }
      return acc;
    }
    default:
      throw UnsupportedModel("DURA is undefined for " + to_string(m.kind));
  }
}

// ---------------------------------------------------------------------------
// Batched objective

struct TrainingExample {
  Triple triple;
  std::vector<EntityId> negative_tails;  // distance models only
  std::vector<EntityId> negative_heads;
};

inline std::vector<EntityId> sample_negatives(Rng& rng, std::size_t num_entities,
                                              std::size_t k) {
  std::vector<EntityId> out(k);
  for (auto& e : out) e = static_cast<EntityId>(rng.below(num_entities));
  return out;
}

struct ObjectiveBreakdown {
  double task = 0;   // tail + head prediction terms
  double rp = 0;     // unweighted relation-prediction term
  double dura = 0;   // unweighted DURA penalty
  double total = 0;  // task + rp_weight * rp + dura_weight * dura

  ObjectiveBreakdown& operator+=(const ObjectiveBreakdown& o) {
    task += o.task;
    rp += o.rp;
    dura += o.dura;
    total += o.total;
    return *this;
  }
};

namespace detail {

// Collects gradient w.r.t. a materialised filter so the (possibly expensive)
// route back to its parameters runs once per query.
template <typename Real>
struct FilterGrad {
  const Model<Real>& model;
  const EntityFilterOp<Real>& op;
  RelationId relation;
  std::vector<Real> dweights;
  std::vector<Real> dbias;

  FilterGrad(const Model<Real>& m, const EntityFilterOp<Real>& o, RelationId r)
      : model(m), op(o), relation(r), dweights(o.weights.size(), Real(0)),
        dbias(o.bias.size(), Real(0)) {}

  void entity(EntityId e, std::span<const Real> dout, bool filtered,
              GradientBuffer<Real>& g) {
    auto de = g.row(Table::Entity, e);
    if (!filtered || op.shape == EntityFilterOp<Real>::Shape::Identity) {
      vec::axpy<Real>(Real(1), dout, de);
      return;
    }
    op.backward(model.entity(e), dout, de, dweights, dbias);
  }

  void flush(GradientBuffer<Real>& g) const {
    if (op.shape == EntityFilterOp<Real>::Shape::Identity) return;
    model.entity_filter_backward(relation, dweights, dbias, g);
  }
};

// One softmax query of a tensor model: anchor entity, effective relation id
// (possibly reciprocal) and the gold target.
template <typename Real>
void tdm_direction(const Model<Real>& model, EntityId anchor, RelationId rel,
                   EntityId target, const LossConfig& cfg, ObjectiveBreakdown& out,
                   GradientBuffer<Real>* g) {
  const auto& spec = model.spec;
  const auto n = spec.dim;
  const auto rd = spec.relation_dim();
  const auto& ent = model.params[Table::Entity];
  const auto op = model.entity_filter(rel);
  const bool rt = model.rt_on();

  std::vector<Real> ar(n), q(n);
  op.apply(model.entity(anchor), ar);
  const auto base_rel = model.relation(rel);
  std::vector<Real> rel_t(base_rel.begin(), base_rel.end());
  std::vector<Real> fh;
  if (rt) {
    fh = model.relation_factor(model.entity(anchor), Table::A2);
    for (std::size_t i = 0; i < rd; ++i) rel_t[i] *= fh[i];
  }
  tdm_query<Real>(spec, ar, rel_t, q);

  std::vector<Real> scores(ent.rows());
  for (std::size_t e = 0; e < scores.size(); ++e) scores[e] = vec::dot<Real>(q, ent.row(e));

  std::vector<Real> gscores;
  if (g) gscores.assign(scores.size(), Real(0));
  out.task += cross_entropy<Real>(scores, target, gscores);

  std::vector<Real> dar, drel;
  if (g) {
    dar.assign(n, Real(0));
    drel.assign(rd, Real(0));
  }
  if (cfg.dura_weight > 0) {
    const double p = dura_penalty<Real>(
        spec, ar, rel_t, model.entity(target), dar, drel,
        g ? g->row(Table::Entity, target) : std::span<Real>{}, cfg.dura_weight);
    out.dura += p;
  }
  if (!g) return;

  std::vector<Real> dq(n, Real(0));
  for (std::size_t e = 0; e < scores.size(); ++e) {
    const Real gs = gscores[e];
    vec::axpy<Real>(gs, ent.row(e), dq);
    vec::axpy<Real>(gs, q, g->row(Table::Entity, e));
  }
  tdm_query_backward<Real>(spec, ar, rel_t, dq, dar, drel);

  auto dr = g->row(Table::Relation, rel);
  if (rt) {
    std::vector<Real> dfh(rd);
    for (std::size_t i = 0; i < rd; ++i) {
      dr[i] += fh[i] * drel[i];
      dfh[i] = base_rel[i] * drel[i];
    }
    model.relation_factor_backward(anchor, Table::A2, dfh, *g);
  } else {
    vec::axpy<Real>(Real(1), drel, dr);
  }

  FilterGrad<Real> fg(model, op, rel);
  fg.entity(anchor, dar, true, *g);
  fg.flush(*g);
}

// Self-adversarial term of a distance model for one corruption side.
// candidates[0] is the gold entity; the rest are negatives.
template <typename Real>
void dbm_direction(const Model<Real>& model, const Triple& tr, bool corrupt_head,
                   std::span<const EntityId> negatives, const LossConfig& cfg,
                   ObjectiveBreakdown& out, GradientBuffer<Real>* g) {
  const auto& spec = model.spec;
  const auto n = spec.dim;
  const auto rd = spec.relation_dim();
  const auto op = model.entity_filter(tr.relation);
  const bool rt = model.rt_on();
  const bool tail_filtered = model.tail_filtered();
  const auto base_rel = model.relation(tr.relation);

  const std::size_t count = negatives.size() + 1;
  auto candidate = [&](std::size_t i) {
    return i == 0 ? (corrupt_head ? tr.head : tr.tail) : negatives[i - 1];
  };

  // Fixed side.
  const EntityId fixed = corrupt_head ? tr.tail : tr.head;
  std::vector<Real> fixed_x(n);
  if (corrupt_head && !tail_filtered) {
    auto src = model.entity(fixed);
    std::copy(src.begin(), src.end(), fixed_x.begin());
  } else {
    op.apply(model.entity(fixed), fixed_x);
  }
  std::vector<Real> fixed_factor;
  if (rt) fixed_factor = model.relation_factor(model.entity(fixed),
                                               corrupt_head ? Table::A3 : Table::A2);

  std::vector<std::vector<Real>> xs(count, std::vector<Real>(n));
  std::vector<std::vector<Real>> factors(rt ? count : 0);
  std::vector<std::vector<Real>> rels(count, std::vector<Real>(rd));
  std::vector<Real> scores(count);
  for (std::size_t i = 0; i < count; ++i) {
    const EntityId c = candidate(i);
    if (!corrupt_head && !tail_filtered) {
      auto src = model.entity(c);
      std::copy(src.begin(), src.end(), xs[i].begin());
    } else {
      op.apply(model.entity(c), xs[i]);
    }
    if (rt) {
      factors[i] = model.relation_factor(model.entity(c), corrupt_head ? Table::A2 : Table::A3);
      for (std::size_t j = 0; j < rd; ++j)
        rels[i][j] = fixed_factor[j] * factors[i][j] * base_rel[j];
    } else {
      std::copy(base_rel.begin(), base_rel.end(), rels[i].begin());
    }
    const auto& hx = corrupt_head ? xs[i] : fixed_x;
    const auto& tx = corrupt_head ? fixed_x : xs[i];
    scores[i] = score<Real>(spec, hx, rels[i], tx);
  }

  Real dpos = 0;
  std::vector<Real> dneg;
  if (g) dneg.assign(count - 1, Real(0));
  out.task += self_adversarial<Real>(scores[0], std::span<const Real>(scores).subspan(1),
                                     cfg.margin, cfg.adv_temperature, g ? &dpos : nullptr,
                                     dneg);
  if (!g) return;

  FilterGrad<Real> fg(model, op, tr.relation);
  std::vector<Real> dfixed(n, Real(0)), dfixed_factor(rt ? rd : 0, Real(0));
  auto dr = g->row(Table::Relation, tr.relation);
  std::vector<Real> dx(n), drel(rd), dfac(rd);
  for (std::size_t i = 0; i < count; ++i) {
    const Real gi = i == 0 ? dpos : dneg[i - 1];
    if (gi == Real(0)) continue;
    std::fill(dx.begin(), dx.end(), Real(0));
    std::fill(drel.begin(), drel.end(), Real(0));
    const auto& hx = corrupt_head ? xs[i] : fixed_x;
    const auto& tx = corrupt_head ? fixed_x : xs[i];
    std::span<Real> dh = corrupt_head ? std::span<Real>(dx) : std::span<Real>(dfixed);
    std::span<Real> dt = corrupt_head ? std::span<Real>(dfixed) : std::span<Real>(dx);
    score_backward<Real>(spec, hx, rels[i], tx, gi, dh, drel, dt);
    if (rt) {
      for (std::size_t j = 0; j < rd; ++j) {
        dr[j] += fixed_factor[j] * factors[i][j] * drel[j];
        dfixed_factor[j] += factors[i][j] * base_rel[j] * drel[j];
        dfac[j] = fixed_factor[j] * base_rel[j] * drel[j];
      }
      model.relation_factor_backward(candidate(i), corrupt_head ? Table::A2 : Table::A3, dfac,
                                     *g);
    } else {
      vec::axpy<Real>(Real(1), drel, dr);
    }
    fg.entity(candidate(i), dx, corrupt_head || tail_filtered, *g);
  }
  if (rt)
    model.relation_factor_backward(fixed, corrupt_head ? Table::A3 : Table::A2,
                                   dfixed_factor, *g);
  fg.entity(fixed, dfixed, !corrupt_head || tail_filtered, *g);
  fg.flush(*g);
}

}  // namespace detail

// Cross-entropy of the true relation over score_all_relations(h, t) with base
// embeddings; only the forward relation rows compete.
template <typename Real>
double rp_term(const Model<Real>& model, const Triple& tr, GradientBuffer<Real>* g = nullptr,
               double weight = 1.0) {
  const auto& spec = model.spec;
  const auto& rels = model.params[Table::Relation];
  const auto h = model.entity(tr.head);
  const auto t = model.entity(tr.tail);
  auto scores = score_all_relations<Real>(spec, h, t, rels, model.num_relations);
  std::vector<Real> gs;
  if (g) gs.assign(scores.size(), Real(0));
  const double loss = cross_entropy<Real>(scores, tr.relation, gs, weight);
  if (g) {
    auto dh = g->row(Table::Entity, tr.head);
    auto dt = g->row(Table::Entity, tr.tail);
    for (std::size_t r = 0; r < scores.size(); ++r)
      score_backward<Real>(spec, h, rels.row(r), t, gs[r], dh, g->row(Table::Relation, r), dt);
  }
  return loss;
}

// Sum over the batch of tail and head prediction terms, the weighted RP term
// and the weighted DURA penalty. Gradients of the weighted total accumulate
// into `grads` when given.
template <typename Real>
ObjectiveBreakdown total_objective(const Model<Real>& model,
                                   std::span<const TrainingExample> batch,
                                   const LossConfig& cfg, GradientBuffer<Real>* grads = nullptr) {
  ObjectiveBreakdown out;
  for (const auto& ex : batch) {
    const auto& tr = ex.triple;
    if (model.spec.distance_based()) {
      detail::dbm_direction(model, tr, false, ex.negative_tails, cfg, out, grads);
      detail::dbm_direction(model, tr, true, ex.negative_heads, cfg, out, grads);
    } else {
      detail::tdm_direction(model, tr.head, tr.relation, tr.tail, cfg, out, grads);
      detail::tdm_direction(model, tr.tail, model.inverse(tr.relation), tr.head, cfg, out,
                            grads);
    }
    if (cfg.rp_weight > 0) out.rp += rp_term(model, tr, grads, cfg.rp_weight);
  }
  out.total = out.task + cfg.rp_weight * out.rp + cfg.dura_weight * out.dura;
  return out;
}

// Builds examples for a batch, drawing negatives for distance models.
template <typename Real>
std::vector<TrainingExample> make_examples(const Model<Real>& model,
                                           std::span<const Triple> triples,
                                           const LossConfig& cfg, Rng& rng) {
  std::vector<TrainingExample> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    TrainingExample ex{t, {}, {}};
    if (model.spec.distance_based()) {
      ex.negative_tails = sample_negatives(rng, model.num_entities, cfg.negatives);
      ex.negative_heads = sample_negatives(rng, model.num_entities, cfg.negatives);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind { Adagrad, Sgd };

inline OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "adagrad") return OptimizerKind::Adagrad;
  if (s == "sgd") return OptimizerKind::Sgd;
  throw InvalidConfig("unknown optimizer: " + s);
}

inline std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::Adagrad ? "adagrad" : "sgd";
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adagrad;
  double lr = 0.1;
  double epsilon = 1e-10;
};

// Applies one update to the touched rows and clears the buffer.
template <typename Real>
void optimizer_step(ParameterStore<Real>& params, GradientBuffer<Real>& grads,
                    const OptimizerConfig& opt) {
  if (!(opt.lr > 0)) throw InvalidConfig("learning rate must be positive");
  if (!grads.all_finite()) throw NonFinite("non-finite gradient");
  for (Table t : params.present()) {
    if (!grads.has(t)) continue;
    auto& tab = params[t];
    auto& acc = params.accumulator(t);
    for (auto i : grads.touched_rows(t)) {
      auto p = tab.row(i);
      auto gr = grads.row(t, i);
      if (opt.kind == OptimizerKind::Sgd) {
        for (std::size_t j = 0; j < p.size(); ++j) p[j] -= static_cast<Real>(opt.lr) * gr[j];
      } else {
        auto a = acc.row(i);
        for (std::size_t j = 0; j < p.size(); ++j) {
          a[j] += gr[j] * gr[j];
          p[j] -= static_cast<Real>(opt.lr * gr[j] / (std::sqrt(a[j]) + opt.epsilon));
        }
      }
    }
  }
  grads.clear();
}

}  // namespace rscf
