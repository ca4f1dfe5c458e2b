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
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rscf/analysis/scales.hpp"
#include "rscf/config/run_config.hpp"
#include "rscf/eval/evaluation.hpp"
#include "rscf/train/checkpoint.hpp"
#include "rscf/train/objectives.hpp"

namespace rscf {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based, continues across warm starts
  bool filters_active = false;
  double loss = 0.0;      // sum of batch totals / number of train triples
  ObjectiveBreakdown terms;  // unnormalized sums over the epoch
  std::optional<double> valid_mrr;
  std::optional<ScaleRecord> scale;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
};

// Training stopped on a non-finite loss; `partial` holds completed epochs.
class TrainingDiverged : public DivergedLoss {
 public:
  TrainingDiverged(const std::string& what, TrainReport partial)
      : DivergedLoss(what), partial(std::move(partial)) {}
  TrainReport partial;
};

template <typename Real>
struct TrainState {
  Model<Real> model;
  Rng rng{0, 0};
  std::size_t epoch = 0;  // completed epochs
};

template <typename Real>
struct TrainResult {
  Checkpoint<Real> checkpoint;
  TrainReport report;
};

// One pass over `train` in a seeded shuffled order. Batches are split into
// contiguous per-worker chunks whose gradients are merged in worker order, so
// results depend on the worker count but not on thread scheduling.
template <typename Real>
EpochRecord train_epoch(TrainState<Real>& state, std::span<const Triple> train,
                        const TrainConfig& cfg, std::size_t run_epoch) {
  if (train.empty()) throw EmptySplit("training split is empty");
  auto& model = state.model;
  model.filters_active = run_epoch >= cfg.plugin_epoch;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  state.rng.shuffle(order.begin(), order.end());

  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  GradientBuffer<Real> grads(model.params);
  std::vector<GradientBuffer<Real>> local;
  if (workers > 1)
    for (std::size_t w = 0; w < workers; ++w) local.emplace_back(model.params);

  EpochRecord rec;
  rec.filters_active = model.filters_active;
  std::vector<Triple> batch;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(order.size(), start + cfg.batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
    const auto examples = make_examples<Real>(model, batch, cfg.loss, state.rng);

    ObjectiveBreakdown b;
    if (workers == 1 || examples.size() < 2) {
      b = total_objective<Real>(model, examples, cfg.loss, &grads);
    } else {
      const std::size_t k = std::min(workers, examples.size());
      std::vector<ObjectiveBreakdown> parts(k);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < k; ++w)
        pool.emplace_back([&, w] {
          const std::size_t lo = w * examples.size() / k, hi = (w + 1) * examples.size() / k;
          parts[w] = total_objective<Real>(
              model, std::span<const TrainingExample>(examples).subspan(lo, hi - lo),
              cfg.loss, &local[w]);
        });
      for (auto& t : pool) t.join();
      for (std::size_t w = 0; w < k; ++w) {
        b += parts[w];
        grads.merge(local[w]);
        local[w].clear();
      }
    }
    if (!std::isfinite(b.total))
      throw DivergedLoss("non-finite loss in epoch " + std::to_string(state.epoch + 1));
    rec.terms += b;
    optimizer_step(model.params, grads, cfg.optimizer);
  }
  rec.loss = rec.terms.total / static_cast<double>(train.size());
  ++state.epoch;
  rec.epoch = state.epoch;
  return rec;
}

struct TrainHooks {
  // Called after every epoch record is complete.
  std::function<void(const EpochRecord&)> on_epoch;
};

// Fresh model from the config, or a warm start: tables present in `warm`
// with matching shapes (and their optimizer state) are copied over, the rng
// resumes from the saved state and epoch numbering continues. Tables the warm
// checkpoint lacks, such as a newly plugged-in filter, keep their fresh
// initialisation.
template <typename Real>
TrainState<Real> make_train_state(const Dataset& data, const RunConfig& cfg,
                                  const Checkpoint<Real>* warm = nullptr) {
  cfg.validate();
  TrainState<Real> st;
  st.model = Model<Real>::create(cfg.train.model, cfg.train.filter, data.num_entities(),
                                 data.num_relations(), cfg.train.init, cfg.train.seed);
  st.rng = Rng::for_name(cfg.train.seed, "train");
  if (!warm) return st;
  if (!(warm->vocabulary == data.vocabulary))
    throw DataError("warm-start checkpoint vocabulary does not match the dataset");
  if (warm->model.spec.kind != cfg.train.model.kind || warm->model.spec.dim != cfg.train.model.dim)
    throw InvalidConfig("warm-start checkpoint has a different model kind or dimension");
  for (Table t : warm->model.params.present()) {
    if (!st.model.params.has(t)) continue;
    const auto& src = warm->model.params[t];
    auto& dst = st.model.params[t];
    if (src.rows() != dst.rows() || src.dim() != dst.dim())
      throw ShapeMismatch("warm-start table " + std::string(table_name(t)) + " has another shape");
    dst = src;
    st.model.params.accumulator(t) = warm->model.params.accumulator(t);
  }
  st.rng.restore(warm->rng_state);
  st.epoch = warm->epoch;
  return st;
}

template <typename Real>
TrainResult<Real> train(const Dataset& data, const RunConfig& cfg,
                        const Checkpoint<Real>* warm = nullptr, const TrainHooks& hooks = {}) {
  auto st = make_train_state<Real>(data, cfg, warm);
  const auto& tc = cfg.train;
  const bool traced = tc.telemetry.scale_trace &&
                      (tc.filter.kind != FilterKind::None || tc.filter.rt_enabled);
  const auto sample = traced ? sample_triples(data.train, tc.telemetry.scale_sample, tc.seed)
                             : std::vector<Triple>{};
  std::optional<FilterIndex> filter_index;
  TrainReport report;
  for (std::size_t e = 0; e < tc.epochs; ++e) {
    EpochRecord rec;
    try {
      rec = train_epoch(st, data.train, tc, e);
    } catch (const NumericalError& err) {
      throw TrainingDiverged(err.what(), std::move(report));
    }
    if (traced) rec.scale = scale_trace(st.model, sample);
    if (tc.telemetry.valid_every > 0 && !data.valid.empty() &&
        (e + 1) % tc.telemetry.valid_every == 0) {
      if (!filter_index) filter_index = build_filter_index(data);
      rec.valid_mrr = evaluate_split(st.model, data, *filter_index, Split::Valid,
                                     cfg.eval.directions, tc.workers)
                          .overall.mrr;
    }
    if (hooks.on_epoch) hooks.on_epoch(rec);
    report.epochs.push_back(rec);
  }
  // Filters stay as the last epoch used them; a run that never reached its
  // plugin epoch saves an inert filter.
  if (tc.epochs == 0) st.model.filters_active = tc.plugin_epoch == 0;
  Checkpoint<Real> ck{cfg, data.vocabulary, std::move(st.model), st.epoch, st.rng.state()};
  return {std::move(ck), std::move(report)};
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string opt_double(const std::optional<double>& x) {
  return x ? fmt_double(*x) : std::string();
}

}  // namespace detail

inline void write_train_report_csv(std::ostream& os, const TrainReport& rep) {
  os << "epoch,filters_active,loss,task,rp,dura,valid_mrr,transformation_scale,"
        "embedding_scale\n";
  for (const auto& r : rep.epochs) {
    os << r.epoch << ',' << (r.filters_active ? 1 : 0) << ',' << detail::fmt_double(r.loss)
       << ',' << detail::fmt_double(r.terms.task) << ',' << detail::fmt_double(r.terms.rp)
       << ',' << detail::fmt_double(r.terms.dura) << ',' << detail::opt_double(r.valid_mrr)
       << ',';
    if (r.scale)
      os << detail::fmt_double(r.scale->transformation) << ','
         << detail::fmt_double(r.scale->embedding);
    else
      os << ',';
    os << '\n';
  }
}

inline nlohmann::ordered_json train_report_json(const TrainReport& rep) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rep.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["filters_active"] = r.filters_active;
    j["loss"] = r.loss;
    j["task"] = r.terms.task;
    j["rp"] = r.terms.rp;
    j["dura"] = r.terms.dura;
    j["valid_mrr"] = r.valid_mrr ? nlohmann::ordered_json(*r.valid_mrr) : nullptr;
    if (r.scale) {
      j["transformation_scale"] = r.scale->transformation;
      j["embedding_scale"] = r.scale->embedding;
    } else {
      j["transformation_scale"] = nullptr;
      j["embedding_scale"] = nullptr;
    }
    arr.push_back(j);
  }
  nlohmann::ordered_json out;
  out["epochs"] = arr;
  return out;
}

}  // namespace rscf
