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

#include "rscf/analysis/clusters.hpp"
#include "rscf/analysis/consistency.hpp"
#include "rscf/analysis/scales.hpp"
#include "rscf/analysis/scores.hpp"
#include "rscf/config/run_config.hpp"
#include "rscf/core/gradcheck.hpp"
#include "rscf/core/params.hpp"
#include "rscf/core/rng.hpp"
#include "rscf/core/tensor.hpp"
#include "rscf/error.hpp"
#include "rscf/eval/evaluation.hpp"
#include "rscf/kg/data.hpp"
#include "rscf/kg/synthetic.hpp"
#include "rscf/model/model.hpp"
#include "rscf/model/score.hpp"
#include "rscf/model/transforms.hpp"
#include "rscf/train/checkpoint.hpp"
#include "rscf/train/gradient_check.hpp"
#include "rscf/train/objectives.hpp"
#include "rscf/train/train_config.hpp"
#include "rscf/train/trainer.hpp"
