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
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rscf/error.hpp"
#include "rscf/kg/data.hpp"
#include "rscf/model/model.hpp"

namespace rscf {

enum class Directions { Head, Tail, Both };

inline Directions parse_directions(const std::string& s) {
  if (s == "head") return Directions::Head;
  if (s == "tail") return Directions::Tail;
  if (s == "both") return Directions::Both;
  throw InvalidConfig("unknown directions: " + s);
}

inline std::string to_string(Directions d) {
  switch (d) {
    case Directions::Head: return "head";
    case Directions::Tail: return "tail";
    case Directions::Both: return "both";
  }
  return "?";
}

// Filtered mid-rank of `gold`: candidates in `known_true` other than gold are
// removed; ties with gold count half.
template <typename Real>
double filtered_rank(EntityId gold, std::span<const Real> scores,
                     std::span<const EntityId> known_true) {
  if (gold >= scores.size())
    throw OutOfRange("filtered_rank: gold " + std::to_string(gold) + " out of range");
  const Real s = scores[gold];
  if (!std::isfinite(static_cast<double>(s))) throw NonFinite("filtered_rank: gold score");
  std::size_t greater = 0, ties = 0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (scores[e] > s) ++greater;
    else if (scores[e] == s) ++ties;
  }
  --ties;  // gold itself
  EntityId prev = static_cast<EntityId>(-1);
  for (EntityId e : known_true) {
    if (e == gold || e == prev || e >= scores.size()) continue;
    prev = e;
    if (scores[e] > s) --greater;
    else if (scores[e] == s) --ties;
  }
  return 1.0 + static_cast<double>(greater) + static_cast<double>(ties) / 2.0;
}

struct RankResult {
  Triple triple;
  bool head_query = false;
  double rank = 1.0;
};

struct Metrics {
  std::size_t count = 0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;

  static Metrics from_ranks(const std::vector<double>& ranks) {
    Metrics m;
    m.count = ranks.size();
    if (ranks.empty()) return m;
    for (double r : ranks) {
      m.mrr += 1.0 / r;
      m.hits1 += r <= 1.0;
      m.hits3 += r <= 3.0;
      m.hits10 += r <= 10.0;
    }
    const double n = static_cast<double>(ranks.size());
    m.mrr /= n;
    m.hits1 /= n;
    m.hits3 /= n;
    m.hits10 /= n;
    return m;
  }
};

struct EvalReport {
  std::string split;
  std::string directions;
  Metrics overall;
  std::map<RelationId, Metrics> per_relation;
  std::string grouping;  // "", "frequency", "groups" or "relation"
  std::vector<std::pair<std::string, Metrics>> groups;
  std::size_t skipped_group_relations = 0;  // group-file names absent from vocab
  std::vector<RankResult> ranks;
};

namespace detail {

template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w * n / workers; i < (w + 1) * n / workers; ++i) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

// Filtered ranks for every query of the split, tail queries first per triple.
template <typename Real>
std::vector<RankResult> rank_queries(const Model<Real>& model, const Dataset& data,
                                     const FilterIndex& filter, Split split,
                                     Directions dirs, std::size_t workers = 1) {
  const auto& triples = data.split(split);
  if (triples.empty()) throw EmptySplit("split " + to_string(split) + " is empty");
  const bool tail = dirs != Directions::Head;
  const bool head = dirs != Directions::Tail;
  const std::size_t per = (tail ? 1 : 0) + (head ? 1 : 0);
  std::vector<RankResult> out(triples.size() * per);
  CandidateScorer<Real> scorer(model);
  detail::parallel_for(triples.size(), workers, [&](std::size_t i) {
    const auto& t = triples[i];
    std::size_t slot = i * per;
    if (tail) {
      auto s = scorer.score_tails(t.head, t.relation);
      out[slot++] = {t, false,
                     filtered_rank<Real>(t.tail, s, filter.true_tails(t.head, t.relation))};
    }
    if (head) {
      auto s = scorer.score_heads(t.relation, t.tail);
      out[slot] = {t, true,
                   filtered_rank<Real>(t.head, s, filter.true_heads(t.relation, t.tail))};
    }
  });
  return out;
}

inline EvalReport summarize_ranks(std::vector<RankResult> ranks, Split split, Directions dirs) {
  EvalReport rep;
  rep.split = to_string(split);
  rep.directions = to_string(dirs);
  std::vector<double> all;
  std::map<RelationId, std::vector<double>> by_rel;
  for (const auto& r : ranks) {
    all.push_back(r.rank);
    by_rel[r.triple.relation].push_back(r.rank);
  }
  rep.overall = Metrics::from_ranks(all);
  for (const auto& [rel, v] : by_rel) rep.per_relation[rel] = Metrics::from_ranks(v);
  rep.ranks = std::move(ranks);
  return rep;
}

template <typename Real>
EvalReport evaluate_split(const Model<Real>& model, const Dataset& data,
                          const FilterIndex& filter, Split split,
                          Directions dirs = Directions::Both, std::size_t workers = 1) {
  return summarize_ranks(rank_queries(model, data, filter, split, dirs, workers), split, dirs);
}

// How test queries are partitioned for grouped reports.
struct Grouping {
  enum class Kind { FrequencyBuckets, RelationGroups, SingleRelation };
  Kind kind = Kind::FrequencyBuckets;
  std::size_t buckets = 10;
  RelationGroups groups;       // RelationGroups mode
  std::string relation_name;   // SingleRelation mode
};

// Relation-group file for grouped reports; a missing file is UnknownGroupFile.
inline RelationGroups load_grouping_file(const std::string& path) {
  if (path.empty()) throw UnknownGroupFile("no relation-group file given");
  std::ifstream in(path);
  if (!in) throw UnknownGroupFile("cannot open relation-group file " + path);
  return parse_relation_groups(in);
}

// Partitions the report's queries by group. Groups are ordered: buckets by
// index, named groups alphabetically followed by "_other".
inline void apply_grouping(EvalReport& rep, const Dataset& data, const Grouping& g) {
  std::vector<std::string> names;
  std::vector<std::optional<std::size_t>> group_of(data.num_relations());
  switch (g.kind) {
    case Grouping::Kind::FrequencyBuckets: {
      rep.grouping = "frequency";
      auto b = relation_frequency_buckets(data.train, data.num_relations(), g.buckets);
      for (std::size_t i = 0; i < g.buckets; ++i) names.push_back("bucket_" + std::to_string(i));
      for (RelationId r = 0; r < data.num_relations(); ++r) group_of[r] = b.bucket_of[r];
      break;
    }
    case Grouping::Kind::RelationGroups: {
      rep.grouping = "groups";
      names = g.groups.group_names();
      const std::size_t other = names.size();
      names.push_back("_other");
      for (RelationId r = 0; r < data.num_relations(); ++r) group_of[r] = other;
      for (const auto& [rel, grp] : g.groups.group_of) {
        if (!data.vocabulary.relations.contains(rel)) {
          ++rep.skipped_group_relations;
          continue;
        }
        const auto idx = static_cast<std::size_t>(
            std::find(names.begin(), names.end(), grp) - names.begin());
        group_of[data.vocabulary.relations.id(rel)] = idx;
      }
      break;
    }
    case Grouping::Kind::SingleRelation: {
      rep.grouping = "relation";
      names.push_back(g.relation_name);
      group_of[data.vocabulary.relations.id(g.relation_name)] = 0;
      break;
    }
  }
  std::vector<std::vector<double>> buckets(names.size());
  for (const auto& r : rep.ranks)
    if (auto gi = group_of[r.triple.relation]) buckets[*gi].push_back(r.rank);
  rep.groups.clear();
  for (std::size_t i = 0; i < names.size(); ++i)
    rep.groups.emplace_back(names[i], Metrics::from_ranks(buckets[i]));
}

template <typename Real>
EvalReport evaluate_grouped(const Model<Real>& model, const Dataset& data,
                            const FilterIndex& filter, Split split, const Grouping& grouping,
                            Directions dirs = Directions::Both, std::size_t workers = 1) {
  auto rep = evaluate_split(model, data, filter, split, dirs, workers);
  apply_grouping(rep, data, grouping);
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["count"] = m.count;
  j["mrr"] = m.mrr;
  j["hits@1"] = m.hits1;
  j["hits@3"] = m.hits3;
  j["hits@10"] = m.hits10;
  return j;
}

inline nlohmann::ordered_json eval_report_json(const EvalReport& rep, const Vocabulary& vocab) {
  nlohmann::ordered_json j;
  j["split"] = rep.split;
  j["directions"] = rep.directions;
  j["queries"] = rep.overall.count;
  j["overall"] = metrics_json(rep.overall);
  auto& rel = j["per_relation"] = nlohmann::ordered_json::array();
  for (const auto& [r, m] : rep.per_relation) {
    auto row = metrics_json(m);
    row["relation"] = vocab.relations.name(r);
    rel.push_back(row);
  }
  if (!rep.grouping.empty()) {
    j["grouping"] = rep.grouping;
    auto& gs = j["groups"] = nlohmann::ordered_json::array();
    for (const auto& [name, m] : rep.groups) {
      auto row = metrics_json(m);
      row["group"] = name;
      gs.push_back(row);
    }
    if (rep.grouping == "groups") j["skipped_group_relations"] = rep.skipped_group_relations;
  }
  return j;
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string fmt_double(double x) { return nlohmann::json(x).dump(); }

inline void metrics_csv_row(std::ostream& os, const std::string& key, const Metrics& m) {
  os << csv_quote(key) << ',' << m.count << ',' << fmt_double(m.mrr) << ','
     << fmt_double(m.hits1) << ',' << fmt_double(m.hits3) << ',' << fmt_double(m.hits10)
     << '\n';
}

}  // namespace detail

inline void write_per_relation_csv(std::ostream& os, const EvalReport& rep,
                                   const Vocabulary& vocab) {
  os << "relation,count,mrr,hits@1,hits@3,hits@10\n";
  for (const auto& [r, m] : rep.per_relation)
    detail::metrics_csv_row(os, vocab.relations.name(r), m);
}

inline void write_groups_csv(std::ostream& os, const EvalReport& rep) {
  os << "group,count,mrr,hits@1,hits@3,hits@10\n";
  for (const auto& [name, m] : rep.groups) detail::metrics_csv_row(os, name, m);
}

}  // namespace rscf
