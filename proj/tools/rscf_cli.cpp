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

// rscf: command-line front end for training, evaluation and analysis.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rscf/rscf.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Globals {
  bool deterministic = false;
  std::size_t workers = 1;
  std::string out = ".";
};

Globals g;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json meta(const std::string& command) {
  json m;
  m["tool"] = "rscf";
  m["version"] = kVersion;
  m["command"] = command;
  if (!g.deterministic) m["created_at"] = utc_now();
  return m;
}

fs::path out_path(const std::string& name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw rscf::IoError("cannot write " + p.string());
  os << text;
  if (!os) throw rscf::IoError("write failed for " + p.string());
}

void write_json(const std::string& name, json body, const std::string& command) {
  json doc;
  doc["meta"] = meta(command);
  for (auto& [k, v] : body.items()) doc[k] = v;
  write_text(out_path(name), doc.dump(2) + "\n");
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string warm_start;
  bool quiet = false;
};

template <typename Real>
int run_train(const rscf::RunConfig& cfg, const TrainArgs& a) {
  const auto data = rscf::load_run_dataset(cfg.data);
  std::optional<rscf::Checkpoint<Real>> warm;
  if (!a.warm_start.empty()) warm = rscf::load_checkpoint<Real>(a.warm_start);
  rscf::TrainHooks hooks;
  if (!a.quiet)
    hooks.on_epoch = [](const rscf::EpochRecord& r) {
      std::cerr << "epoch " << r.epoch << " loss " << r.loss;
      if (r.valid_mrr) std::cerr << " valid_mrr " << *r.valid_mrr;
      if (r.scale) std::cerr << " scale " << r.scale->transformation;
      std::cerr << '\n';
    };
  auto write_report = [&](const rscf::TrainReport& rep) {
    std::ostringstream csv;
    rscf::write_train_report_csv(csv, rep);
    write_text(out_path("train_report.csv"), csv.str());
    auto body = rscf::train_report_json(rep);
    body["config"] = rscf::to_key_values(cfg);
    write_json("train_report.json", body, "train");
  };
  try {
    auto res = rscf::train<Real>(data, cfg, warm ? &*warm : nullptr, hooks);
    rscf::save_checkpoint(out_path("checkpoint.rscfckp").string(), res.checkpoint);
    write_text(out_path("config.cfg"), rscf::to_config_text(cfg));
    write_report(res.report);
  } catch (const rscf::TrainingDiverged& e) {
    write_report(e.partial);
    throw;
  }
  return 0;
}

int cmd_train(const TrainArgs& a) {
  rscf::RunConfig base;
  if (!a.config.empty()) base = rscf::load_run_config(a.config);
  else base = rscf::from_key_values({});
  auto cfg = rscf::apply_overrides(base, a.sets);
  if (g.workers > 1) cfg.train.workers = g.workers;
  cfg.validate();
  return cfg.train.precision == "float" ? run_train<float>(cfg, a) : run_train<double>(cfg, a);
}

// ---- evaluate ------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string split = "test";
  std::string directions;
  std::string group_by = "none";
  std::string groups;
  std::string relation;
  std::size_t buckets = 10;
  std::vector<std::string> sets;
  bool ranks = false;
};

template <typename Real>
int run_evaluate(const EvalArgs& a) {
  auto ck = rscf::load_checkpoint<Real>(a.checkpoint);
  const auto cfg = rscf::apply_overrides(ck.config, a.sets);
  const auto data = rscf::load_run_dataset(cfg.data, &ck.vocabulary);
  const auto filter = rscf::build_filter_index(data);
  const auto split = rscf::parse_split(a.split);
  const auto dirs = a.directions.empty() ? cfg.eval.directions : rscf::parse_directions(a.directions);
  auto rep = rscf::evaluate_split(ck.model, data, filter, split, dirs, g.workers);

  if (a.group_by != "none") {
    rscf::Grouping grouping;
    grouping.buckets = a.buckets;
    if (a.group_by == "frequency") {
      grouping.kind = rscf::Grouping::Kind::FrequencyBuckets;
    } else if (a.group_by == "groups") {
      grouping.kind = rscf::Grouping::Kind::RelationGroups;
      const auto path = a.groups.empty() ? cfg.analysis.groups : a.groups;
      grouping.groups = rscf::load_grouping_file(path);
    } else if (a.group_by == "relation") {
      grouping.kind = rscf::Grouping::Kind::SingleRelation;
      if (!ck.vocabulary.relations.contains(a.relation))
        throw rscf::UnknownName("unknown relation: " + a.relation);
      grouping.relation_name = a.relation;
    } else {
      throw rscf::InvalidConfig("--group-by must be none, frequency, groups or relation");
    }
    rscf::apply_grouping(rep, data, grouping);
    std::ostringstream csv;
    rscf::write_groups_csv(csv, rep);
    write_text(out_path("eval_" + a.split + "_groups.csv"), csv.str());
    if (rep.skipped_group_relations > 0)
      std::cerr << "warning: " << rep.skipped_group_relations
                << " group-file relations are not in the vocabulary\n";
  }
  auto body = rscf::eval_report_json(rep, ck.vocabulary);
  body["checkpoint_epoch"] = ck.epoch;
  if (a.ranks) {
    auto& rs = body["ranks"] = json::array();
    for (const auto& r : rep.ranks)
      rs.push_back({{"head", ck.vocabulary.entities.name(r.triple.head)},
                    {"relation", ck.vocabulary.relations.name(r.triple.relation)},
                    {"tail", ck.vocabulary.entities.name(r.triple.tail)},
                    {"direction", r.head_query ? "head" : "tail"},
                    {"rank", r.rank}});
  }
  write_json("eval_" + a.split + ".json", body, "evaluate");
  std::ostringstream csv;
  rscf::write_per_relation_csv(csv, rep, ck.vocabulary);
  write_text(out_path("eval_" + a.split + "_per_relation.csv"), csv.str());
  std::cout << "mrr " << rep.overall.mrr << " hits@1 " << rep.overall.hits1 << " hits@3 "
            << rep.overall.hits3 << " hits@10 " << rep.overall.hits10 << " queries "
            << rep.overall.count << '\n';
  return 0;
}

template <template <typename> class F, typename... Args>
int with_checkpoint_dtype(const std::string& path, Args&&... args) {
  if (rscf::peek_checkpoint_dtype(path) == "f32") return F<float>::run(args...);
  return F<double>::run(args...);
}

template <typename Real>
struct EvalCmd {
  static int run(const EvalArgs& a) { return run_evaluate<Real>(a); }
};

// ---- analyze-clusters ----------------------------------------------------

struct ClusterArgs {
  std::string checkpoint;
  std::string groups;
  std::string vectors;
  std::string intra_mode = "per-cluster-mean";
};

template <typename Real>
struct ClusterCmd {
  static int run(const ClusterArgs& a) {
    auto ck = rscf::load_checkpoint<Real>(a.checkpoint);
    const auto path = a.groups.empty() ? ck.config.analysis.groups : a.groups;
    const auto clusters = rscf::relation_group_clusters(ck.model, ck.vocabulary,
                                                        rscf::load_grouping_file(path));
    return finish(clusters, a);
  }
  static int finish(const std::vector<rscf::Cluster>& clusters, const ClusterArgs& a) {
    if (a.intra_mode != "per-cluster-mean" && a.intra_mode != "literal-n")
      throw rscf::InvalidConfig("--intra-mode must be per-cluster-mean or literal-n");
    const auto rep = rscf::cluster_report(clusters, a.intra_mode == "literal-n");
    write_json("clusters.json", rscf::cluster_report_json(rep), "analyze-clusters");
    std::cout << "mean_intra " << rep.mean_intra << " mean_inter "
              << (rep.mean_inter ? std::to_string(*rep.mean_inter) : "null") << '\n';
    return 0;
  }
};

int cmd_clusters(const ClusterArgs& a) {
  if (!a.vectors.empty() == !a.checkpoint.empty())
    throw rscf::InvalidConfig("give exactly one of --vectors or --checkpoint");
  if (!a.vectors.empty()) return ClusterCmd<double>::finish(rscf::load_cluster_csv(a.vectors), a);
  return with_checkpoint_dtype<ClusterCmd>(a.checkpoint, a);
}

// ---- analyze-scales ------------------------------------------------------

struct ScaleArgs {
  std::string checkpoint;
  std::string split = "train";
  std::size_t sample = 1000;
  std::uint64_t seed = 0;
};

template <typename Real>
struct ScaleCmd {
  static int run(const ScaleArgs& a) {
    auto ck = rscf::load_checkpoint<Real>(a.checkpoint);
    const auto data = rscf::load_run_dataset(ck.config.data, &ck.vocabulary);
    const auto& triples = data.split(rscf::parse_split(a.split));
    const auto sample = rscf::sample_triples(triples, a.sample, a.seed);
    const auto rec = rscf::scale_trace(ck.model, sample);
    std::ostringstream csv;
    csv << "epoch,transformation_scale,embedding_scale\n"
        << ck.epoch << ',' << rscf::detail::fmt_double(rec.transformation) << ','
        << rscf::detail::fmt_double(rec.embedding) << '\n';
    write_text(out_path("scales.csv"), csv.str());
    std::cout << "transformation_scale " << rec.transformation << " embedding_scale "
              << rec.embedding << '\n';
    return 0;
  }
};

// ---- export-scores -------------------------------------------------------

struct ExportArgs {
  std::string checkpoint;
  std::string queries;
  std::size_t random = 10;
  std::uint64_t seed = 0;
};

template <typename Real>
struct ExportCmd {
  static int run(const ExportArgs& a) {
    auto ck = rscf::load_checkpoint<Real>(a.checkpoint);
    std::vector<std::pair<rscf::EntityId, rscf::RelationId>> qs;
    if (!a.queries.empty()) {
      std::ifstream in(a.queries);
      if (!in) throw rscf::IoError("cannot open " + a.queries);
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw rscf::MalformedLine(lineno, "expected head<TAB>relation");
        qs.emplace_back(
            static_cast<rscf::EntityId>(ck.vocabulary.entities.id(line.substr(0, tab))),
            static_cast<rscf::RelationId>(ck.vocabulary.relations.id(line.substr(tab + 1))));
      }
    } else {
      auto rng = rscf::Rng::for_name(a.seed, "export_queries");
      for (std::size_t i = 0; i < a.random; ++i)
        qs.emplace_back(static_cast<rscf::EntityId>(rng.below(ck.model.num_entities)),
                        static_cast<rscf::RelationId>(rng.below(ck.model.num_relations)));
    }
    std::ostringstream csv;
    rscf::export_score_distribution(csv, ck.model, qs);
    write_text(out_path("scores.csv"), csv.str());
    std::ostringstream qcsv;
    qcsv << "row,head,relation\n";
    for (std::size_t i = 0; i < qs.size(); ++i)
      qcsv << i << ',' << rscf::detail::csv_quote(ck.vocabulary.entities.name(qs[i].first)) << ','
           << rscf::detail::csv_quote(ck.vocabulary.relations.name(qs[i].second)) << '\n';
    write_text(out_path("score_queries.csv"), qcsv.str());
    return 0;
  }
};

// ---- simulate-consistency / check-dura-sign / check-gradients ------------

int cmd_simulate(rscf::ConsistencySimConfig cfg) {
  cfg.workers = g.workers;
  const auto rep = rscf::monte_carlo_consistency(cfg);
  write_json("consistency.json", rscf::consistency_report_json(rep), "simulate-consistency");
  std::cout << std::left << std::setw(16) << "" ;
  for (const auto& c : rep.columns) std::cout << std::setw(12) << c;
  std::cout << '\n' << std::fixed << std::setprecision(3);
  for (std::size_t r = 0; r < 3; ++r) {
    std::cout << std::setw(16) << rscf::kConsistencyRows[r];
    for (double x : rep.rates[r]) std::cout << std::setw(12) << x;
    std::cout << '\n';
  }
  return 0;
}

int cmd_dura_sign(std::size_t trials, std::uint64_t seed) {
  auto rng = rscf::Rng::for_name(seed, "dura_sign");
  const auto rep = rscf::dura_sign_check(trials, rng);
  write_json("dura_sign.json", rscf::dura_sign_json(rep), "check-dura-sign");
  std::cout << "trials " << rep.trials << " failures " << rep.failures.size() << '\n';
  return rep.failures.empty() ? 0 : 3;
}

int cmd_gradients(std::uint64_t seed, std::size_t dim, double tol) {
  json cases = json::array();
  double worst = 0;
  std::size_t failed = 0;
  for (const auto& c : rscf::objective_gradient_grid(seed, dim)) {
    const auto r = rscf::check_objective_gradient(c);
    worst = std::max(worst, r.max_relative_error);
    const bool ok = r.max_relative_error < tol;
    failed += !ok;
    cases.push_back({{"case", c.label()},
                     {"max_relative_error", r.max_relative_error},
                     {"worst_table", r.worst_table},
                     {"coordinates", r.coordinates_checked},
                     {"pass", ok}});
  }
  json body;
  body["tolerance"] = tol;
  body["cases"] = cases.size();
  body["failed"] = failed;
  body["max_relative_error"] = worst;
  body["results"] = cases;
  write_json("gradients.json", body, "check-gradients");
  std::cout << "cases " << cases.size() << " failed " << failed << " worst " << worst << '\n';
  return failed == 0 ? 0 : 3;
}

// ---- make-synthetic ------------------------------------------------------

int cmd_make_synthetic(const rscf::SyntheticKgConfig& cfg) {
  const auto kg = rscf::make_synthetic_kg(cfg);
  auto dump = [](const std::vector<rscf::RawTriple>& ts) {
    std::string s;
    for (const auto& t : ts) s += t.head + '\t' + t.relation + '\t' + t.tail + '\n';
    return s;
  };
  write_text(out_path("train.txt"), dump(kg.train));
  write_text(out_path("valid.txt"), dump(kg.valid));
  write_text(out_path("test.txt"), dump(kg.test));
  std::cout << "train " << kg.train.size() << " valid " << kg.valid.size() << " test "
            << kg.test.size() << '\n';
  return 0;
}

int exit_code(const rscf::Error& e) {
  switch (e.category()) {
    case rscf::ErrorCategory::Usage: return 1;
    case rscf::ErrorCategory::Data: return 2;
    case rscf::ErrorCategory::Numerical: return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation-semantics consistent filters for knowledge graph embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.add_flag("--deterministic", g.deterministic, "Omit timestamps from reports");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");

  auto common = [](CLI::App* sub) {
    sub->add_flag("--deterministic", g.deterministic, "Omit timestamps from reports");
    sub->add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", g.out, "Output directory");
  };

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model from a run config");
  common(train);
  train->add_option("--config", ta.config, "Run config file (section.key = value)");
  train->add_option("--set", ta.sets, "Override a config key (key=value)");
  train->add_option("--warm-start", ta.warm_start, "Continue from a checkpoint");
  train->add_flag("--quiet", ta.quiet, "No per-epoch progress on stderr");

  EvalArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Filtered ranking metrics");
  common(evaluate);
  evaluate->add_option("--checkpoint", ea.checkpoint)->required();
  evaluate->add_option("--split", ea.split)->check(CLI::IsMember({"train", "valid", "test"}));
  evaluate->add_option("--directions", ea.directions)
      ->check(CLI::IsMember({"head", "tail", "both"}));
  evaluate->add_option("--group-by", ea.group_by)
      ->check(CLI::IsMember({"none", "frequency", "groups", "relation"}));
  evaluate->add_option("--groups", ea.groups, "Relation-group file (group<TAB>relation)");
  evaluate->add_option("--relation", ea.relation, "Relation name for --group-by relation");
  evaluate->add_option("--buckets", ea.buckets)->check(CLI::PositiveNumber);
  evaluate->add_option("--set", ea.sets, "Override a config key, e.g. data.test=path");
  evaluate->add_flag("--ranks", ea.ranks, "Include per-query ranks in the JSON report");

  ClusterArgs ca;
  auto* clusters = app.add_subcommand("analyze-clusters", "Intra/inter cluster distances");
  common(clusters);
  clusters->add_option("--checkpoint", ca.checkpoint);
  clusters->add_option("--groups", ca.groups, "Relation-group file");
  clusters->add_option("--vectors", ca.vectors, "CSV of cluster,x1,x2,...");
  clusters->add_option("--intra-mode", ca.intra_mode);

  ScaleArgs sa;
  auto* scales = app.add_subcommand("analyze-scales", "Transformation and embedding scale");
  common(scales);
  scales->add_option("--checkpoint", sa.checkpoint)->required();
  scales->add_option("--split", sa.split)->check(CLI::IsMember({"train", "valid", "test"}));
  scales->add_option("--sample", sa.sample)->check(CLI::PositiveNumber);
  scales->add_option("--seed", sa.seed);

  ExportArgs xa;
  auto* exp = app.add_subcommand("export-scores", "Score distribution over all tails");
  common(exp);
  exp->add_option("--checkpoint", xa.checkpoint)->required();
  exp->add_option("--queries", xa.queries, "File of head<TAB>relation lines");
  exp->add_option("--random", xa.random, "Number of random queries when --queries is absent");
  exp->add_option("--seed", xa.seed);

  rscf::ConsistencySimConfig mc;
  auto* sim = app.add_subcommand("simulate-consistency", "Monte Carlo consistency table");
  common(sim);
  sim->add_option("--samples", mc.samples)->check(CLI::PositiveNumber);
  sim->add_option("--dim", mc.dim)->check(CLI::PositiveNumber);
  sim->add_option("--seed", mc.seed);
  sim->add_option("--p", mc.p)->check(CLI::IsMember({1, 2}));

  std::uint64_t grad_seed = 1;
  std::size_t grad_dim = 8;
  double grad_tol = 1e-4;
  auto* grads = app.add_subcommand("check-gradients", "Finite-difference gradient grid");
  common(grads);
  grads->add_option("--seed", grad_seed);
  grads->add_option("--dim", grad_dim)->check(CLI::Range(2, 8));
  grads->add_option("--tolerance", grad_tol);

  std::size_t dura_trials = 1000;
  std::uint64_t dura_seed = 0;
  auto* dura = app.add_subcommand("check-dura-sign", "DURA gradient sign check");
  common(dura);
  dura->add_option("--trials", dura_trials)->check(CLI::PositiveNumber);
  dura->add_option("--seed", dura_seed);

  rscf::SyntheticKgConfig syn;
  auto* make_syn = app.add_subcommand("make-synthetic", "Write the synthetic KG as TSV splits");
  common(make_syn);
  make_syn->add_option("--seed", syn.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*evaluate) return with_checkpoint_dtype<EvalCmd>(ea.checkpoint, ea);
    if (*clusters) return cmd_clusters(ca);
    if (*scales) return with_checkpoint_dtype<ScaleCmd>(sa.checkpoint, sa);
    if (*exp) return with_checkpoint_dtype<ExportCmd>(xa.checkpoint, xa);
    if (*sim) return cmd_simulate(mc);
    if (*grads) return cmd_gradients(grad_seed, grad_dim, grad_tol);
    if (*dura) return cmd_dura_sign(dura_trials, dura_seed);
    if (*make_syn) return cmd_make_synthetic(syn);
  } catch (const rscf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.category() == rscf::ErrorCategory::Usage) std::cerr << app.help();
    return exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
