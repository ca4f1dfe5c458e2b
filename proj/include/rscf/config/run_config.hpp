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
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rscf/error.hpp"
#include "rscf/eval/evaluation.hpp"
#include "rscf/kg/synthetic.hpp"
#include "rscf/train/train_config.hpp"

namespace rscf {

// Flat run description. Text form is one "section.key = value" per line;
// '#' starts a comment, blank lines are ignored, keys may appear once.
struct DataConfig {
  std::string train;
  std::string valid;
  std::string test;
  TripleFormat format = TripleFormat::Tab;
  bool synthetic = false;  // use the built-in synthetic KG instead of files
  SyntheticKgConfig synthetic_kg;
};

struct EvalConfig {
  Directions directions = Directions::Both;
};

struct AnalysisConfig {
  std::string groups;  // relation-group file for grouped evaluation and clusters
  bool intra_literal_n = false;
};

struct RunConfig {
  DataConfig data;
  TrainConfig train;
  EvalConfig eval;
  AnalysisConfig analysis;

  void validate() const { train.validate(); }
};

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw InvalidConfig(key + ": expected a number, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw InvalidConfig(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidConfig(key + ": expected true or false, got '" + v + "'");
}

inline std::string bool_str(bool b) { return b ? "true" : "false"; }

struct KeySpec {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<KeySpec>& key_specs() {
  using C = RunConfig;
  static const std::vector<KeySpec> specs = {
      {"data.train", [](const C& c) { return c.data.train; },
       [](C& c, const std::string& v) { c.data.train = v; }},
      {"data.valid", [](const C& c) { return c.data.valid; },
       [](C& c, const std::string& v) { c.data.valid = v; }},
      {"data.test", [](const C& c) { return c.data.test; },
       [](C& c, const std::string& v) { c.data.test = v; }},
      {"data.format",
       [](const C& c) {
         return std::string(c.data.format == TripleFormat::Tab ? "tab" : "whitespace");
       },
       [](C& c, const std::string& v) { c.data.format = parse_triple_format(v); }},
      {"data.synthetic", [](const C& c) { return bool_str(c.data.synthetic); },
       [](C& c, const std::string& v) { c.data.synthetic = parse_bool("data.synthetic", v); }},
      {"data.synthetic_seed",
       [](const C& c) { return std::to_string(c.data.synthetic_kg.seed); },
       [](C& c, const std::string& v) {
         c.data.synthetic_kg.seed = parse_uint("data.synthetic_seed", v);
       }},

      {"model.kind", [](const C& c) { return to_string(c.train.model.kind); },
       [](C& c, const std::string& v) { c.train.model.kind = parse_model_kind(v); }},
      {"model.dim", [](const C& c) { return std::to_string(c.train.model.dim); },
       [](C& c, const std::string& v) { c.train.model.dim = parse_uint("model.dim", v); }},
      {"model.distance_p", [](const C& c) { return std::to_string(c.train.model.distance_p); },
       [](C& c, const std::string& v) {
         c.train.model.distance_p = static_cast<int>(parse_uint("model.distance_p", v));
       }},
      {"model.init", [](const C& c) { return to_string(c.train.init.scheme); },
       [](C& c, const std::string& v) { c.train.init.scheme = parse_init_scheme(v); }},
      {"model.init_scale", [](const C& c) { return format_double(c.train.init.scale); },
       [](C& c, const std::string& v) {
         c.train.init.scale = parse_double("model.init_scale", v);
       }},
      {"model.affine_scale",
       [](const C& c) { return format_double(c.train.init.affine_scale); },
       [](C& c, const std::string& v) {
         c.train.init.affine_scale = parse_double("model.affine_scale", v);
       }},

      {"filter.kind", [](const C& c) { return to_string(c.train.filter.kind); },
       [](C& c, const std::string& v) { c.train.filter.kind = parse_filter_kind(v); }},
      {"filter.p", [](const C& c) { return std::to_string(c.train.filter.p); },
       [](C& c, const std::string& v) {
         c.train.filter.p = static_cast<int>(parse_uint("filter.p", v));
       }},
      {"filter.apply_to",
       [](const C& c) {
         return std::string(c.train.filter.apply_to == ApplyTo::HeadOnly ? "head"
                                                                        : "head-and-tail");
       },
       [](C& c, const std::string& v) {
         if (v == "auto")
           c.train.filter.apply_to =
               c.train.model.distance_based() ? ApplyTo::HeadAndTail : ApplyTo::HeadOnly;
         else if (v == "head")
           c.train.filter.apply_to = ApplyTo::HeadOnly;
         else if (v == "head-and-tail")
           c.train.filter.apply_to = ApplyTo::HeadAndTail;
         else
           throw InvalidConfig("filter.apply_to: expected auto, head or head-and-tail");
       }},
      {"filter.rt", [](const C& c) { return bool_str(c.train.filter.rt_enabled); },
       [](C& c, const std::string& v) { c.train.filter.rt_enabled = parse_bool("filter.rt", v); }},
      {"filter.zero_change_epsilon",
       [](const C& c) { return format_double(c.train.filter.zero_change_epsilon); },
       [](C& c, const std::string& v) {
         c.train.filter.zero_change_epsilon = parse_double("filter.zero_change_epsilon", v);
       }},
      {"filter.linear2_add_one",
       [](const C& c) {
         return std::string(c.train.filter.linear2_add_one == Linear2AddOne::AllBlocks
                                ? "all-blocks"
                                : "diagonal-blocks");
       },
       [](C& c, const std::string& v) {
         if (v == "diagonal-blocks")
           c.train.filter.linear2_add_one = Linear2AddOne::DiagonalBlocks;
         else if (v == "all-blocks")
           c.train.filter.linear2_add_one = Linear2AddOne::AllBlocks;
         else
           throw InvalidConfig("filter.linear2_add_one: expected diagonal-blocks or all-blocks");
       }},

      {"loss.task",
       [](const C& c) {
         return c.train.loss.task_loss ? to_string(*c.train.loss.task_loss) : std::string("auto");
       },
       [](C& c, const std::string& v) {
         if (v == "auto")
           c.train.loss.task_loss.reset();
         else
           c.train.loss.task_loss = parse_task_loss(v);
       }},
      {"loss.rp_weight", [](const C& c) { return format_double(c.train.loss.rp_weight); },
       [](C& c, const std::string& v) {
         c.train.loss.rp_weight = parse_double("loss.rp_weight", v);
       }},
      {"loss.dura_weight", [](const C& c) { return format_double(c.train.loss.dura_weight); },
       [](C& c, const std::string& v) {
         c.train.loss.dura_weight = parse_double("loss.dura_weight", v);
       }},
      {"loss.negatives", [](const C& c) { return std::to_string(c.train.loss.negatives); },
       [](C& c, const std::string& v) {
         c.train.loss.negatives = parse_uint("loss.negatives", v);
       }},
      {"loss.adv_temperature",
       [](const C& c) { return format_double(c.train.loss.adv_temperature); },
       [](C& c, const std::string& v) {
         c.train.loss.adv_temperature = parse_double("loss.adv_temperature", v);
       }},
      {"loss.margin", [](const C& c) { return format_double(c.train.loss.margin); },
       [](C& c, const std::string& v) { c.train.loss.margin = parse_double("loss.margin", v); }},

      {"train.optimizer", [](const C& c) { return to_string(c.train.optimizer.kind); },
       [](C& c, const std::string& v) { c.train.optimizer.kind = parse_optimizer_kind(v); }},
      {"train.lr", [](const C& c) { return format_double(c.train.optimizer.lr); },
       [](C& c, const std::string& v) { c.train.optimizer.lr = parse_double("train.lr", v); }},
      {"train.epochs", [](const C& c) { return std::to_string(c.train.epochs); },
       [](C& c, const std::string& v) { c.train.epochs = parse_uint("train.epochs", v); }},
      {"train.batch_size", [](const C& c) { return std::to_string(c.train.batch_size); },
       [](C& c, const std::string& v) {
         c.train.batch_size = parse_uint("train.batch_size", v);
       }},
      {"train.seed", [](const C& c) { return std::to_string(c.train.seed); },
       [](C& c, const std::string& v) { c.train.seed = parse_uint("train.seed", v); }},
      {"train.plugin_epoch", [](const C& c) { return std::to_string(c.train.plugin_epoch); },
       [](C& c, const std::string& v) {
         c.train.plugin_epoch = parse_uint("train.plugin_epoch", v);
       }},
      {"train.workers", [](const C& c) { return std::to_string(c.train.workers); },
       [](C& c, const std::string& v) { c.train.workers = parse_uint("train.workers", v); }},
      {"train.precision", [](const C& c) { return c.train.precision; },
       [](C& c, const std::string& v) { c.train.precision = v; }},

      {"telemetry.valid_every",
       [](const C& c) { return std::to_string(c.train.telemetry.valid_every); },
       [](C& c, const std::string& v) {
         c.train.telemetry.valid_every = parse_uint("telemetry.valid_every", v);
       }},
      {"telemetry.scale_trace",
       [](const C& c) { return bool_str(c.train.telemetry.scale_trace); },
       [](C& c, const std::string& v) {
         c.train.telemetry.scale_trace = parse_bool("telemetry.scale_trace", v);
       }},
      {"telemetry.scale_sample",
       [](const C& c) { return std::to_string(c.train.telemetry.scale_sample); },
       [](C& c, const std::string& v) {
         c.train.telemetry.scale_sample = parse_uint("telemetry.scale_sample", v);
       }},

      {"eval.directions", [](const C& c) { return to_string(c.eval.directions); },
       [](C& c, const std::string& v) { c.eval.directions = parse_directions(v); }},

      {"analysis.groups", [](const C& c) { return c.analysis.groups; },
       [](C& c, const std::string& v) { c.analysis.groups = v; }},
      {"analysis.intra_mode",
       [](const C& c) {
         return std::string(c.analysis.intra_literal_n ? "literal-n" : "per-cluster-mean");
       },
       [](C& c, const std::string& v) {
         if (v == "per-cluster-mean")
           c.analysis.intra_literal_n = false;
         else if (v == "literal-n")
           c.analysis.intra_literal_n = true;
         else
           throw InvalidConfig("analysis.intra_mode: expected per-cluster-mean or literal-n");
       }},
  };
  return specs;
}

inline const KeySpec* find_key(const std::string& key) {
  for (const auto& s : key_specs())
    if (s.key == key) return &s;
  return nullptr;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& s : detail::key_specs()) out.push_back(s.key);
  return out;
}

// Parses the text form into key/value pairs without interpreting values.
inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
    auto key = detail::trim(std::string_view(body).substr(0, eq));
    auto value = detail::trim(std::string_view(body).substr(eq + 1));
    if (!detail::find_key(key))
      throw InvalidConfig("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!kv.emplace(key, value).second)
      throw InvalidConfig("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

// Applies values over the defaults. model.kind is applied first so that
// "auto" placeholders can see it; filter.apply_to defaults to "auto".
inline RunConfig from_key_values(const KeyValues& kv) {
  RunConfig c;
  for (const auto& [k, v] : kv)
    if (!detail::find_key(k)) throw InvalidConfig("unknown key '" + k + "'");
  if (auto it = kv.find("model.kind"); it != kv.end())
    detail::find_key("model.kind")->set(c, it->second);
  for (const auto& s : detail::key_specs()) {
    if (s.key == "model.kind") continue;
    auto it = kv.find(s.key);
    if (it != kv.end())
      s.set(c, it->second);
    else if (s.key == "filter.apply_to")
      s.set(c, "auto");
  }
  return c;
}

inline KeyValues to_key_values(const RunConfig& c) {
  KeyValues kv;
  for (const auto& s : detail::key_specs()) kv[s.key] = s.get(c);
  return kv;
}

// Canonical text form in declaration order.
inline std::string to_config_text(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& s : detail::key_specs()) os << s.key << " = " << s.get(c) << '\n';
  return os.str();
}

inline RunConfig parse_run_config(std::istream& in) { return from_key_values(parse_key_values(in)); }

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  return parse_run_config(in);
}

// Applies "key=value" overrides on top of an existing config.
inline RunConfig apply_overrides(const RunConfig& base, const std::vector<std::string>& sets) {
  auto kv = to_key_values(base);
  std::vector<std::string> explicit_keys;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidConfig("override '" + s + "': expected key=value");
    const auto key = detail::trim(std::string_view(s).substr(0, eq));
    if (!detail::find_key(key)) throw InvalidConfig("unknown key '" + key + "'");
    kv[key] = detail::trim(std::string_view(s).substr(eq + 1));
    explicit_keys.push_back(key);
  }
  // A new model kind re-derives apply_to unless that was overridden too.
  auto given = [&](const std::string& k) {
    return std::find(explicit_keys.begin(), explicit_keys.end(), k) != explicit_keys.end();
  };
  if (given("model.kind") && !given("filter.apply_to")) kv["filter.apply_to"] = "auto";
  return from_key_values(kv);
}

// Loads the configured splits. With `vocab` the ids are the checkpoint's and
// unseen names are a DataError.
inline Dataset load_run_dataset(const DataConfig& d, const Vocabulary* vocab = nullptr) {
  std::vector<RawTriple> tr, va, te;
  if (d.synthetic) {
    auto kg = make_synthetic_kg(d.synthetic_kg);
    tr = std::move(kg.train);
    va = std::move(kg.valid);
    te = std::move(kg.test);
  } else {
    if (d.train.empty()) throw InvalidConfig("data.train is required unless data.synthetic = true");
    tr = load_triples(d.train, d.format);
    if (!d.valid.empty()) va = load_triples(d.valid, d.format);
    if (!d.test.empty()) te = load_triples(d.test, d.format);
  }
  auto ds = vocab ? make_dataset(*vocab, tr, va, te) : make_dataset(tr, va, te);
  ds.validate();
  return ds;
}

}  // namespace rscf
