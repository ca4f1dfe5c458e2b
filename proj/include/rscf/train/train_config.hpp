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

#include <cstddef>
#include <cstdint>
#include <string>

#include "rscf/error.hpp"
#include "rscf/model/model.hpp"
#include "rscf/train/objectives.hpp"

namespace rscf {

struct TelemetryConfig {
  std::size_t valid_every = 5;  // 0 disables validation
  bool scale_trace = true;
  std::size_t scale_sample = 1000;
};

struct TrainConfig {
  ModelSpec model{ModelKind::ComplEx, 64, 1};
  FilterSpec filter;
  LossConfig loss;
  InitConfig init;
  OptimizerConfig optimizer;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  std::size_t plugin_epoch = 0;
  std::size_t workers = 1;
  std::string precision = "double";
  TelemetryConfig telemetry;

  void validate() const {
    model.validate();
    loss.validate(model);
    if (filter.p != 1 && filter.p != 2) throw InvalidConfig("filter.p must be 1 or 2");
    if (!model.distance_based() && filter.apply_to != ApplyTo::HeadOnly)
      throw InvalidConfig("tensor-decomposition models apply filters to the head only");
    if (batch_size == 0) throw InvalidConfig("train.batch_size must be >= 1");
    if (workers == 0) throw InvalidConfig("train.workers must be >= 1");
    if (plugin_epoch > epochs) throw InvalidConfig("train.plugin_epoch must be <= train.epochs");
    if (!(optimizer.lr > 0)) throw InvalidConfig("train.lr must be positive");
    if (precision != "double" && precision != "float")
      throw InvalidConfig("train.precision must be double or float");
  }
};

}  // namespace rscf
